#include "calib/ba/metric_scale.h"

#include <algorithm>
#include <map>

#include "calib/models/noncentral_generic.h"

namespace calib {

std::optional<double> ApplyMetricScale(CalibrationProblem* problem,
                                       double physical_square_size) {
  if (physical_square_size <= 0.0) return std::nullopt;

  std::map<std::pair<int, int>, int> by_square;
  for (size_t k = 0; k < problem->points.size(); ++k) {
    by_square[problem->point_squares[k]] = static_cast<int>(k);
  }
  std::vector<double> spacings;
  for (const auto& [square, index] : by_square) {
    const auto [i, j] = square;
    for (const auto& neighbor :
         {std::make_pair(i + 1, j), std::make_pair(i, j + 1)}) {
      const auto it = by_square.find(neighbor);
      if (it == by_square.end()) continue;
      spacings.push_back(
          (problem->points[index] - problem->points[it->second]).norm());
    }
  }
  if (spacings.empty()) return std::nullopt;  // degenerate span
  std::sort(spacings.begin(), spacings.end());
  const double median =
      spacings.size() % 2 == 1
          ? spacings[spacings.size() / 2]
          : 0.5 * (spacings[spacings.size() / 2 - 1] +
                   spacings[spacings.size() / 2]);
  if (median < 1e-12) return std::nullopt;

  const double factor = physical_square_size / median;
  problem->pattern_square_size *= factor;
  for (Vec3d& p : problem->points) p *= factor;
  for (ProblemImage& image : problem->images) {
    image.pose.translation *= factor;
  }
  for (ProblemCamera& camera : problem->cameras) {
    camera.rig_transform.translation *= factor;
    if (camera.model->kind() == CameraModelKind::kNoncentralGeneric) {
      auto& points =
          static_cast<NoncentralGenericModel*>(camera.model.get())
              ->mutable_line_points();
      for (Vec3d& p : points) p *= factor;
    }
  }
  return factor;
}

}  // namespace calib
