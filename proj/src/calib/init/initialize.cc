#include "calib/init/initialize.h"

#include "calib/core/parallel.h"
#include "calib/init/localize.h"
#include "calib/init/triple_selection.h"

namespace calib {

std::optional<CalibratedArea> ObservationBounds(
    const DetectionSet& detections,
    const std::vector<std::string>& image_ids) {
  CalibratedArea area{1e30, 1e30, -1e30, -1e30};
  bool any = false;
  for (const std::string& id : image_ids) {
    const auto it = detections.find(id);
    if (it == detections.end()) continue;
    for (const FeatureDetection& d : it->second) {
      area.min_x = std::min(area.min_x, d.position.x());
      area.min_y = std::min(area.min_y, d.position.y());
      area.max_x = std::max(area.max_x, d.position.x());
      area.max_y = std::max(area.max_y, d.position.y());
      any = true;
    }
  }
  if (!any || !area.Valid()) return std::nullopt;
  return area;
}

std::optional<InitializationResult> InitializeCalibration(
    const DetectionSet& detections, const StarPattern& pattern,
    int image_width, int image_height, const InitializeOptions& options) {
  std::vector<std::string> ids;
  for (const auto& [id, list] : detections) ids.push_back(id);
  if (ids.size() < 3) return std::nullopt;

  // Dense interpolated matches per image (parallel over images).
  std::vector<DenseMatchMap> maps(ids.size());
  ParallelFor(0, static_cast<int64_t>(ids.size()), [&](int64_t k) {
    maps[k] = InterpolateDenseMatches(detections.at(ids[k]), pattern,
                                      image_width, image_height);
  });

  std::vector<const DenseMatchMap*> map_ptrs;
  for (const auto& m : maps) map_ptrs.push_back(&m);
  const auto triple = SelectTriple(map_ptrs, options.seed);
  if (!triple || triple->score <= 0) return std::nullopt;

  const std::array<const std::vector<FeatureDetection>*, 3> triple_detections =
      {&detections.at(ids[triple->indices[0]]),
       &detections.at(ids[triple->indices[1]]),
       &detections.at(ids[triple->indices[2]])};
  const auto triple_init = InitTriplePoses(triple_detections, pattern,
                                           image_width, image_height);
  if (!triple_init) return std::nullopt;

  InitializationResult result{
      CentralGenericModel(image_width, image_height,
                          CalibratedArea{0, 0, 1, 1}, 4, 4),
      {}, triple_init->pinhole, CalibratedArea{}, 0.0, 0};

  PerPixelDirections field(image_width, image_height);
  for (int v = 0; v < 3; ++v) {
    const std::string& id = ids[triple->indices[v]];
    result.poses[id] = triple_init->poses[v];
    field.AccumulateView(maps[triple->indices[v]], triple_init->poses[v]);
  }

  // Localize the remaining images against the growing per-pixel model;
  // every localized image extends the field.
  for (int round = 0; round < options.max_rounds; ++round) {
    bool added = false;
    for (size_t k = 0; k < ids.size(); ++k) {
      if (result.poses.count(ids[k])) continue;
      const auto& image_detections = detections.at(ids[k]);
      std::vector<Vec3d> dirs, points;
      for (const FeatureDetection& d : image_detections) {
        const int x = static_cast<int>(std::lround(d.position.x()));
        const int y = static_cast<int>(std::lround(d.position.y()));
        if (x < 0 || y < 0 || x >= image_width || y >= image_height) continue;
        const auto dir = field.AtNearby(x, y, 2);
        if (!dir) continue;
        const Vec2d fp = pattern.FeaturePosition(d.i, d.j);
        dirs.push_back(*dir);
        points.emplace_back(fp.x(), fp.y(), 0.0);
      }
      const auto pose =
          LocalizePose(dirs, points, std::nullopt, options.localize);
      if (!pose) continue;
      result.poses[ids[k]] = *pose;
      field.AccumulateView(maps[k], *pose);
      added = true;
    }
    if (!added) break;
  }

  std::vector<std::string> localized_ids;
  for (const auto& [id, pose] : result.poses) localized_ids.push_back(id);
  const auto area = ObservationBounds(detections, localized_ids);
  if (!area) return std::nullopt;
  result.area = *area;
  result.per_pixel_count = field.defined_count();

  auto fit = FitGridToDirections(field, image_width, image_height, *area,
                                 options.grid_fit);
  if (!fit) return std::nullopt;

  // One improvement round: re-localize every image against the fitted
  // model (which, unlike the provisional pinhole, captures distortion),
  // rebuild the per-pixel field, and refit.
  std::map<std::string, RigidTransform> refined_poses;
  PerPixelDirections refined_field(image_width, image_height);
  for (size_t k = 0; k < ids.size(); ++k) {
    const auto pose_it = result.poses.find(ids[k]);
    if (pose_it == result.poses.end()) continue;
    std::vector<Vec3d> dirs, points;
    for (const FeatureDetection& d : detections.at(ids[k])) {
      const auto dir = fit->model.UnprojectDirection(d.position);
      if (!dir) continue;
      const Vec2d fp = pattern.FeaturePosition(d.i, d.j);
      dirs.push_back(*dir);
      points.emplace_back(fp.x(), fp.y(), 0.0);
    }
    const auto pose =
        LocalizePose(dirs, points, pose_it->second, options.localize);
    // Re-localization is a polish step; a large rotation jump indicates the
    // two-fold planar pose ambiguity, so keep the previous estimate then.
    RigidTransform refined = pose_it->second;
    if (pose &&
        RotationDistance(pose->rotation, pose_it->second.rotation) < 0.05) {
      refined = *pose;
    }
    refined_poses[ids[k]] = refined;
    refined_field.AccumulateView(maps[k], refined);
  }
  if (refined_poses.size() >= 3) {
    const auto refit = FitGridToDirections(refined_field, image_width,
                                           image_height, *area,
                                           options.grid_fit);
    if (refit) {
      result.poses = std::move(refined_poses);
      result.per_pixel_count = refined_field.defined_count();
      fit = refit;
    }
  }

  result.model = fit->model;
  result.grid_fit_rms = fit->angular_rms;
  return result;
}

}  // namespace calib
