#pragma once

#include <optional>

namespace calib {

// Stereo depth-bias calculator for the disparity relation d = b f / x.
struct StereoBiasConfig {
  double baseline_m = 0.0;
  double focal_px = 0.0;
  double depth_m = 0.0;
  double disparity_error_px = 0.0;
};

// Depth error caused by a disparity error: d - bf / (bf/d + dx).
// Empty for invalid geometry (non-positive baseline/focal/depth, or a
// perturbed disparity that is not positive).
std::optional<double> StereoDepthBias(const StereoBiasConfig& config);

}  // namespace calib
