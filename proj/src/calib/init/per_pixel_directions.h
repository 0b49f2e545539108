#pragma once

#include <optional>
#include <vector>

#include "calib/core/rigid_transform.h"
#include "calib/core/types.h"
#include "calib/init/dense_matches.h"

namespace calib {

// Per-pixel camera model used during initialization: an observation
// direction for each initialized pixel, averaged over all contributing
// images for robustness.
class PerPixelDirections {
 public:
  PerPixelDirections() = default;
  PerPixelDirections(int width, int height)
      : width_(width), height_(height),
        sums_(static_cast<size_t>(width) * height, Vec3d::Zero()),
        counts_(static_cast<size_t>(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }

  void Accumulate(int x, int y, const Vec3d& direction) {
    const size_t idx = static_cast<size_t>(y) * width_ + x;
    sums_[idx] += direction;
    counts_[idx] += 1;
  }

  int count(int x, int y) const {
    return counts_[static_cast<size_t>(y) * width_ + x];
  }

  // Normalized average of the contributing directions.
  std::optional<Vec3d> At(int x, int y) const {
    const size_t idx = static_cast<size_t>(y) * width_ + x;
    if (counts_[idx] == 0) return std::nullopt;
    const double norm = sums_[idx].norm();
    if (norm < 1e-12) return std::nullopt;
    return sums_[idx] / norm;
  }

  // Direction at the nearest defined pixel within the search radius.
  std::optional<Vec3d> AtNearby(int x, int y, int radius) const;

  int64_t defined_count() const;

  // Back-projects every dense match of one localized image and accumulates
  // the resulting directions.
  void AccumulateView(const DenseMatchMap& matches,
                      const RigidTransform& pose);

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Vec3d> sums_;
  std::vector<int> counts_;
};

}  // namespace calib
