#pragma once

#include <optional>

#include "calib/core/lm.h"
#include "calib/models/central_generic.h"
#include "calib/models/parametric.h"

namespace calib {

// Per-pixel reprojection difference between two calibrations over the full
// image; invalid outside the shared calibrated area.
struct DeviationMap {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector2f> delta_px;
  std::vector<uint8_t> valid;

  double MaxMagnitude() const;
  double MedianMagnitude() const;
};

struct ParametricFitOptions {
  int sample_grid_x = 48;  // direction samples across the area
  int sample_grid_y = 36;
  LMSettings lm{.max_iterations = 80};
};

struct ParametricFitResult {
  ParametricCameraModel model;
  Mat3d rotation = Mat3d::Identity();  // applied to the generic directions
  double rms_angle_rad = 0.0;          // direction mismatch after the fit
  LMReport report;
};

// Fits a parametric model to a generic calibration by minimizing the
// per-pixel deviation of observation directions over a sample grid, jointly
// with a 3D rotation (a consistent rotation of all poses is part of the
// intrinsic calibration, so it must not count as model deviation).
std::optional<ParametricFitResult> FitParametricToGeneric(
    const CentralGenericModel& target, CameraModelKind variant,
    const ParametricFitOptions& options = ParametricFitOptions());

// Reprojection-difference map: for every pixel of the shared area, the
// reference model's (rotated) direction is projected through the other
// model and compared with the pixel. Works for parametric and generic
// "other" models.
DeviationMap ComputeDeviationMap(const CentralGenericModel& reference,
                                 const CameraModel& other,
                                 const Mat3d& rotation);

// Best-fit rotation between the direction fields of two central models over
// their shared area (the rotation gauge between calibrations).
std::optional<Mat3d> AlignDirectionFields(const CentralGenericModel& reference,
                                          const CameraModel& other,
                                          int samples_x = 40,
                                          int samples_y = 30);

}  // namespace calib
