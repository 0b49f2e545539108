#pragma once

#include <optional>

#include "calib/init/localize.h"
#include "calib/models/camera_model.h"

namespace calib {

// Camera pose-estimation bias experiment: per trial, un-project random
// pixels to random depths with the ground-truth model, then localize a
// camera against these 2D-3D correspondences using the test model. A model
// mismatch shows up as a nonzero camera-center error.
struct PoseBiasOptions {
  int points_per_trial = 15;
  double depth_min_m = 1.5;
  double depth_max_m = 2.5;
  int trials = 20;
  uint64_t seed = 0;
  LocalizeOptions localize;
};

struct PoseBiasResult {
  double median_center_error_m = 0.0;
  int failed_trials = 0;
  std::vector<double> trial_errors_m;
};

std::optional<PoseBiasResult> PoseBiasExperiment(const CameraModel& model_gt,
                                                 const CameraModel& model_test,
                                                 const PoseBiasOptions& options =
                                                     PoseBiasOptions());

// Correspondences of one trial (deterministic in seed and trial index):
// 3D points from ground-truth un-projection at random depths, observation
// directions from the test model. Shared with independent checkers.
bool PoseBiasTrialData(const CameraModel& model_gt,
                       const CameraModel& model_test,
                       const PoseBiasOptions& options, int trial,
                       std::vector<Vec3d>* directions,
                       std::vector<Vec3d>* points);

}  // namespace calib
