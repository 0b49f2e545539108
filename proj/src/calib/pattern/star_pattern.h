#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "calib/core/types.h"

namespace calib {

// Calibration target made of a grid of star squares. Each square holds a
// star with segment_count alternating black/white angular segments around
// its center feature point; adjacent squares have opposite polarity, so
// corner features arise at square boundaries. segment_count = 4 yields a
// checkerboard. Segment boundaries are measured from the +x axis with a
// boundary at angle zero.
//
// Note on symmetry: the intensity is point-symmetric about every star
// center when segment_count is a multiple of 4 (counts of the form 4k+2
// invert under mirroring), so supported patterns use multiples of 4.
class StarPattern {
 public:
  StarPattern(int segment_count, int squares_x, int squares_y,
              double square_size = 1.0, double physical_square_size = 0.0);

  int segment_count() const { return segment_count_; }
  int squares_x() const { return squares_x_; }
  int squares_y() const { return squares_y_; }
  double square_size() const { return square_size_; }
  double physical_square_size() const { return physical_square_size_; }

  void set_fiducial_region(std::set<std::pair<int, int>> squares) {
    fiducial_region_ = std::move(squares);
  }
  const std::set<std::pair<int, int>>& fiducial_region() const {
    return fiducial_region_;
  }
  bool IsFiducialSquare(int i, int j) const {
    return fiducial_region_.count({i, j}) > 0;
  }

  // Pattern-space extent.
  double extent_x() const { return squares_x_ * square_size_; }
  double extent_y() const { return squares_y_ * square_size_; }
  bool InPattern(const Vec2d& p) const {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= extent_x() &&
           p.y() <= extent_y();
  }

  // Star-center feature coordinate of square (i, j).
  Vec2d FeaturePosition(int i, int j) const {
    return Vec2d((i + 0.5) * square_size_, (j + 0.5) * square_size_);
  }

  // All star-center features (fiducial squares excluded), sorted by (j, i).
  std::vector<std::pair<int, int>> FeatureSquares() const;

  // Ideal binary pattern value at a pattern-space point; empty outside the
  // pattern extent. Fiducial squares are rendered mid-gray.
  std::optional<double> Intensity(const Vec2d& p) const;

 private:
  int segment_count_;
  int squares_x_;
  int squares_y_;
  double square_size_;
  double physical_square_size_;
  std::set<std::pair<int, int>> fiducial_region_;
};

}  // namespace calib
