#include "calib/eval/pose_bias.h"

#include <algorithm>

#include "calib/core/random.h"

namespace calib {

std::optional<PoseBiasResult> PoseBiasExperiment(const CameraModel& model_gt,
                                                 const CameraModel& model_test,
                                                 const PoseBiasOptions& options) {
  // Shared calibrated area.
  CalibratedArea area;
  area.min_x = std::max(model_gt.area().min_x, model_test.area().min_x);
  area.min_y = std::max(model_gt.area().min_y, model_test.area().min_y);
  area.max_x = std::min(model_gt.area().max_x, model_test.area().max_x);
  area.max_y = std::min(model_gt.area().max_y, model_test.area().max_y);
  if (!area.Valid()) return std::nullopt;

  PoseBiasResult result;
  for (int trial = 0; trial < options.trials; ++trial) {
    std::vector<Vec3d> directions, points;
    if (!PoseBiasTrialData(model_gt, model_test, options, trial, &directions,
                           &points)) {
      ++result.failed_trials;
      continue;
    }
    const auto pose = LocalizePose(directions, points, RigidTransform{},
                                   options.localize);
    if (!pose) {
      ++result.failed_trials;
      continue;
    }
    // Camera center in the ground-truth frame.
    const Vec3d center = -(pose->rotation.conjugate() * pose->translation);
    result.trial_errors_m.push_back(center.norm());
  }
  if (result.trial_errors_m.empty()) return std::nullopt;
  std::vector<double> sorted = result.trial_errors_m;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  result.median_center_error_m =
      n % 2 == 1 ? sorted[n / 2]
                 : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return result;
}

bool PoseBiasTrialData(const CameraModel& model_gt,
                       const CameraModel& model_test,
                       const PoseBiasOptions& options, int trial,
                       std::vector<Vec3d>* directions,
                       std::vector<Vec3d>* points) {
  CalibratedArea area;
  area.min_x = std::max(model_gt.area().min_x, model_test.area().min_x);
  area.min_y = std::max(model_gt.area().min_y, model_test.area().min_y);
  area.max_x = std::min(model_gt.area().max_x, model_test.area().max_x);
  area.max_y = std::min(model_gt.area().max_y, model_test.area().max_y);
  if (!area.Valid()) return false;

  Rng rng(HashCombine(options.seed, 0xb1a5ULL + trial));
  directions->clear();
  points->clear();
  for (int n = 0; n < options.points_per_trial; ++n) {
    const Vec2d px(rng.Uniform(area.min_x, area.max_x),
                   rng.Uniform(area.min_y, area.max_y));
    const double depth = rng.Uniform(options.depth_min_m, options.depth_max_m);
    const auto gt_dir = model_gt.UnprojectDirection(px);
    const auto test_dir = model_test.UnprojectDirection(px);
    if (!gt_dir || !test_dir) continue;
    points->push_back(depth * *gt_dir);
    directions->push_back(*test_dir);
  }
  return directions->size() >= 6;
}

}  // namespace calib
