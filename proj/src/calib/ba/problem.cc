#include "calib/ba/problem.h"

#include "calib/ba/robust_loss.h"
#include "calib/core/parallel.h"

namespace calib {

CalibrationProblem::CalibrationProblem(const CalibrationProblem& other)
    : images(other.images), points(other.points),
      point_squares(other.point_squares), observations(other.observations),
      pattern_square_size(other.pattern_square_size) {
  cameras.reserve(other.cameras.size());
  for (const ProblemCamera& c : other.cameras) {
    cameras.push_back(ProblemCamera{c.model->Clone(), c.rig_transform});
  }
}

CalibrationProblem& CalibrationProblem::operator=(
    const CalibrationProblem& other) {
  if (this == &other) return *this;
  CalibrationProblem copy(other);
  *this = std::move(copy);
  return *this;
}

CalibrationProblem CalibrationProblem::Assemble(
    const DetectionSet& detections, const StarPattern& pattern,
    const std::map<std::string, RigidTransform>& poses,
    std::unique_ptr<CameraModel> model) {
  CalibrationProblem problem;
  problem.pattern_square_size = pattern.square_size();
  problem.cameras.push_back(ProblemCamera{std::move(model), RigidTransform{}});

  std::map<std::pair<int, int>, int> point_index;
  for (const auto& [id, list] : detections) {
    const auto pose_it = poses.find(id);
    if (pose_it == poses.end()) continue;
    const int image_index = static_cast<int>(problem.images.size());
    problem.images.push_back(ProblemImage{id, 0, pose_it->second});
    for (const FeatureDetection& d : list) {
      auto [it, inserted] = point_index.try_emplace(
          std::make_pair(d.i, d.j), static_cast<int>(problem.points.size()));
      if (inserted) {
        const Vec2d fp = pattern.FeaturePosition(d.i, d.j);
        problem.points.emplace_back(fp.x(), fp.y(), 0.0);
        problem.point_squares.emplace_back(d.i, d.j);
      }
      problem.observations.push_back(
          Observation{0, image_index, it->second, d.position});
    }
  }
  return problem;
}

bool CalibrationProblem::PointsWithinBounds() const {
  const double bound = 10.0 * pattern_square_size;
  for (size_t k = 0; k < points.size(); ++k) {
    const auto& [i, j] = point_squares[k];
    const Vec3d nominal((i + 0.5) * pattern_square_size,
                        (j + 0.5) * pattern_square_size, 0.0);
    if ((points[k] - nominal).lpNorm<Eigen::Infinity>() > bound) return false;
  }
  return true;
}

double ResidualEvaluation::TotalRobustCost() const {
  double sum = 0.0;
  for (size_t k = 0; k < values.size(); ++k) {
    if (valid[k]) sum += HuberCost(values[k].squaredNorm());
  }
  return sum;
}

namespace {

ResidualEvaluation EvaluateResidualsImpl(const CalibrationProblem& problem,
                                         const std::vector<Vec2d>* hints,
                                         bool parallel) {
  const size_t n = problem.observations.size();
  ResidualEvaluation eval;
  eval.values.assign(n, Vec2d::Zero());
  eval.valid.assign(n, 0);
  // NaN marks "no warm-start hint" when this evaluation seeds the next.
  eval.projections.assign(
      n, Vec2d::Constant(std::numeric_limits<double>::quiet_NaN()));

  const auto evaluate_one = [&](int64_t k) {
    const Observation& obs = problem.observations[k];
    const ProblemImage& image = problem.images[obs.image];
    const ProblemCamera& camera = problem.cameras[obs.camera];
    const Vec3d in_camera =
        camera.rig_transform * (image.pose * problem.points[obs.point]);
    const Vec2d* hint =
        (hints && (*hints)[k].allFinite()) ? &(*hints)[k] : nullptr;
    const auto projection = camera.model->Project(in_camera, hint);
    if (!projection) return;
    eval.values[k] = *projection - obs.detection;
    eval.valid[k] = 1;
    eval.projections[k] = *projection;
  };

  if (parallel) {
    ParallelFor(0, static_cast<int64_t>(n), evaluate_one);
  } else {
    for (int64_t k = 0; k < static_cast<int64_t>(n); ++k) evaluate_one(k);
  }
  for (uint8_t v : eval.valid) eval.valid_count += v;
  return eval;
}

}  // namespace

ResidualEvaluation EvaluateResiduals(const CalibrationProblem& problem,
                                     const std::vector<Vec2d>* hints) {
  return EvaluateResidualsImpl(problem, hints, /*parallel=*/true);
}

ResidualEvaluation EvaluateResidualsSerial(const CalibrationProblem& problem,
                                           const std::vector<Vec2d>* hints) {
  return EvaluateResidualsImpl(problem, hints, /*parallel=*/false);
}

StateComparison CompareStates(const ResidualEvaluation& a,
                              const ResidualEvaluation& b) {
  StateComparison result;
  const size_t n = std::min(a.values.size(), b.values.size());
  for (size_t k = 0; k < n; ++k) {
    if (!a.valid[k] || !b.valid[k]) continue;
    result.cost_a += HuberCost(a.values[k].squaredNorm());
    result.cost_b += HuberCost(b.values[k].squaredNorm());
    ++result.common_count;
  }
  result.b_better = result.common_count > 0 && result.cost_b < result.cost_a;
  return result;
}

}  // namespace calib
