#include "calib/eval/stereo_bias.h"

namespace calib {

std::optional<double> StereoDepthBias(const StereoBiasConfig& config) {
  if (config.baseline_m <= 0.0 || config.focal_px <= 0.0 ||
      config.depth_m <= 0.0) {
    return std::nullopt;
  }
  const double bf = config.baseline_m * config.focal_px;
  const double disparity = bf / config.depth_m + config.disparity_error_px;
  if (disparity <= 0.0) return std::nullopt;
  return config.depth_m - bf / disparity;
}

}  // namespace calib
