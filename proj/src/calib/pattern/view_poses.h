#pragma once

#include <vector>

#include "calib/core/random.h"
#include "calib/core/rigid_transform.h"
#include "calib/models/camera_model.h"
#include "calib/pattern/star_pattern.h"

namespace calib {

struct ViewPoseOptions {
  // Pattern-center distance range along the chosen viewing ray, as a factor
  // of the distance at which the pattern fills the image.
  double distance_min_factor = 1.0;
  double distance_max_factor = 1.7;
  double max_tilt_deg = 32.0;  // yaw/pitch
  double max_roll_deg = 18.0;
};

// Deterministic set of pattern poses for calibration data collection:
// cycles the pattern center over a 3x3 grid of image targets with jitter,
// varying distance and tilt, so that the union of views covers the full
// image area.
std::vector<RigidTransform> GenerateViewPoses(const StarPattern& pattern,
                                              const CameraModel& camera,
                                              int count, uint64_t seed,
                                              const ViewPoseOptions& options =
                                                  ViewPoseOptions());

}  // namespace calib
