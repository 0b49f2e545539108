#pragma once

#include <optional>
#include <vector>

#include "calib/core/types.h"
#include "calib/features/detector.h"
#include "calib/pattern/star_pattern.h"

namespace calib {

// Per-pixel approximate pattern coordinates for one image, interpolated
// between detected features. Only used for initialization, never for the
// final refinement.
class DenseMatchMap {
 public:
  DenseMatchMap() = default;
  DenseMatchMap(int width, int height)
      : width_(width), height_(height),
        coords_(static_cast<size_t>(width) * height, Eigen::Vector2f::Zero()),
        defined_(static_cast<size_t>(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }

  bool Defined(int x, int y) const {
    return defined_[static_cast<size_t>(y) * width_ + x] != 0;
  }
  std::optional<Vec2d> At(int x, int y) const {
    const size_t idx = static_cast<size_t>(y) * width_ + x;
    if (!defined_[idx]) return std::nullopt;
    return coords_[idx].cast<double>();
  }
  void Set(int x, int y, const Vec2d& pattern_point) {
    const size_t idx = static_cast<size_t>(y) * width_ + x;
    coords_[idx] = pattern_point.cast<float>();
    defined_[idx] = 1;
  }

  int64_t defined_count() const;
  const std::vector<uint8_t>& mask() const { return defined_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Eigen::Vector2f> coords_;
  std::vector<uint8_t> defined_;
};

// Fills every pixel inside each complete square of four adjacent detections
// with its pattern coordinate via the square's 4-point homography.
// Returns an empty map when no complete square exists.
DenseMatchMap InterpolateDenseMatches(
    const std::vector<FeatureDetection>& detections, const StarPattern& pattern,
    int width, int height);

}  // namespace calib
