#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "calib/ba/bundle_adjuster.h"
#include "calib/ba/metric_scale.h"
#include "calib/ba/robust_loss.h"
#include "calib/init/grid_fit.h"
#include "calib/init/per_pixel_directions.h"
#include "oracles.h"
#include "test_scenes.h"

using namespace calib;
using calib::testing::DatasetOptions;
using calib::testing::MakeDataset;

namespace {

// A calibration problem at (nearly) ground truth: the model is a grid fit
// of the true camera's direction field, poses and points are exact.
struct GroundTruthProblem {
  calib::testing::SyntheticDataset data;
  CalibrationProblem problem;
};

GroundTruthProblem MakeGroundTruthProblem(const DatasetOptions& options,
                                          double cell_px = 16.0) {
  GroundTruthProblem out;
  out.data = MakeDataset(options);

  PerPixelDirections field(options.width, options.height);
  for (int y = 0; y < options.height; ++y) {
    for (int x = 0; x < options.width; ++x) {
      const auto dir = out.data.camera->UnprojectDirection(Vec2d(x, y));
      if (dir) field.Accumulate(x, y, *dir);
    }
  }
  const double margin = options.margin;
  CalibratedArea area{margin, margin, options.width - 1 - margin,
                      options.height - 1 - margin};
  GridFitOptions fit_options;
  fit_options.cell_px = cell_px;
  fit_options.pixel_stride = 2;
  const auto fit = FitGridToDirections(field, options.width, options.height,
                                       area, fit_options);
  REQUIRE(fit);

  std::map<std::string, RigidTransform> poses;
  for (size_t v = 0; v < out.data.ids.size(); ++v) {
    poses[out.data.ids[v]] = out.data.poses[v];
  }
  out.problem = CalibrationProblem::Assemble(
      out.data.detections, out.data.pattern, poses,
      std::make_unique<CentralGenericModel>(fit->model));
  return out;
}

double MedianReprojectionError(const CalibrationProblem& problem) {
  const ResidualEvaluation eval = EvaluateResiduals(problem);
  std::vector<double> norms;
  for (size_t k = 0; k < eval.values.size(); ++k) {
    if (eval.valid[k]) norms.push_back(eval.values[k].norm());
  }
  REQUIRE(!norms.empty());
  return oracles::SortMedian(norms);
}

}  // namespace

TEST_CASE("huber loss values and boundary") {
  CHECK(HuberCost(0.0) == 0.0);
  CHECK(HuberCost(1.0) == 1.0);
  CHECK(HuberCost(4.0) == 3.0);
  // Left/right derivatives at s = 1 both equal 1.
  const double h = 1e-7;
  CHECK((HuberCost(1.0) - HuberCost(1.0 - h)) / h ==
        doctest::Approx(1.0).epsilon(1e-5));
  CHECK((HuberCost(1.0 + h) - HuberCost(1.0)) / h ==
        doctest::Approx(1.0).epsilon(1e-5));
  CHECK(HuberWeight(0.5) == 1.0);
  CHECK(HuberWeight(4.0) == doctest::Approx(0.5));
}

TEST_CASE("direction updates stay unit and follow the tangents") {
  Rng rng(30);
  for (int n = 0; n < 200; ++n) {
    const Vec3d g = Vec3d(rng.Uniform(-1, 1), rng.Uniform(-1, 1),
                          rng.Uniform(-1, 1))
                        .normalized();
    const TangentBasis basis = AnyTangents(g);
    CHECK(std::abs(basis.t1.norm() - 1.0) < 1e-12);
    CHECK(std::abs(basis.t2.norm() - 1.0) < 1e-12);
    CHECK(std::abs(basis.t1.dot(basis.t2)) < 1e-12);
    CHECK(std::abs(basis.t1.dot(g)) < 1e-12);
    CHECK(std::abs(basis.t2.dot(g)) < 1e-12);

    Vec3d updated;
    SUBCASE("") {}
    REQUIRE(ApplyDirectionUpdate(g, basis, 0.0, 0.0, &updated));
    CHECK((updated - g).norm() < 1e-15);

    const double x1 = rng.Uniform(-10, 10);
    const double x2 = rng.Uniform(-10, 10);
    REQUIRE(ApplyDirectionUpdate(g, basis, x1, x2, &updated));
    CHECK(std::abs(updated.norm() - 1.0) < 1e-12);

    // First order: update(eps, 0) = g + eps t1 + O(eps^2).
    const double eps = 1e-4;
    REQUIRE(ApplyDirectionUpdate(g, basis, eps, 0.0, &updated));
    CHECK((updated - (g + eps * basis.t1)).norm() <= eps * eps);
  }
}

TEST_CASE("residuals vanish at ground truth and fail behind the camera") {
  auto gt = MakeGroundTruthProblem({.views = 6, .seed = 31});
  const ResidualEvaluation eval = EvaluateResiduals(gt.problem);
  int valid = 0;
  for (size_t k = 0; k < eval.values.size(); ++k) {
    if (!eval.valid[k]) continue;
    // The grid fit approximates the true camera to ~1e-5 rad; residuals at
    // ground truth stay at that level.
    CHECK(eval.values[k].norm() < 0.05);
    ++valid;
  }
  CHECK(valid > 100);

  // Moving a pattern point behind the camera invalidates its residuals.
  CalibrationProblem moved = gt.problem;
  moved.points[0] = Vec3d(0, 0, -10.0);
  const ResidualEvaluation eval2 = EvaluateResiduals(moved);
  for (size_t k = 0; k < moved.observations.size(); ++k) {
    if (moved.observations[k].point == 0) CHECK(!eval2.valid[k]);
  }
}

TEST_CASE("hand-built single observation matches a manual chain") {
  // One camera with a constant-direction model is awkward to project into,
  // so use a fitted pinhole grid and one observation, then verify the
  // residual against an explicit transform + projection computation.
  auto gt = MakeGroundTruthProblem({.views = 1, .seed = 32});
  CalibrationProblem problem = gt.problem;
  problem.observations.resize(1);
  Observation& obs = problem.observations[0];
  obs.detection = Vec2d(101.25, 77.5);

  const ResidualEvaluation eval = EvaluateResiduals(problem);
  REQUIRE(eval.valid[0]);

  const Vec3d point = problem.points[obs.point];
  const RigidTransform& pose = problem.images[obs.image].pose;
  const Vec3d in_camera = pose.rotation * point + pose.translation;
  const auto projected = problem.cameras[0].model->Project(in_camera);
  REQUIRE(projected);
  const Vec2d manual = *projected - obs.detection;
  CHECK((eval.values[0] - manual).norm() < 1e-10);
}

TEST_CASE("parallel and serial residual evaluation are bit-identical") {
  auto gt = MakeGroundTruthProblem({.views = 4, .seed = 33});
  const ResidualEvaluation a = EvaluateResiduals(gt.problem);
  const ResidualEvaluation b = EvaluateResidualsSerial(gt.problem);
  REQUIRE(a.values.size() == b.values.size());
  for (size_t k = 0; k < a.values.size(); ++k) {
    CHECK(a.valid[k] == b.valid[k]);
    CHECK(a.values[k].x() == b.values[k].x());
    CHECK(a.values[k].y() == b.values[k].y());
  }
}

TEST_CASE("compare_states semantics") {
  ResidualEvaluation a, b;
  a.values = {Vec2d(1, 0), Vec2d(0, 2), Vec2d(3, 0)};
  a.valid = {1, 1, 1};
  b.values = {Vec2d(0.5, 0), Vec2d(0, 1), Vec2d(1, 0)};
  b.valid = {1, 1, 1};

  SUBCASE("full overlap equals plain comparison") {
    const StateComparison cmp = CompareStates(a, b);
    CHECK(cmp.common_count == 3);
    CHECK(cmp.cost_a ==
          doctest::Approx(HuberCost(1) + HuberCost(4) + HuberCost(9)));
    CHECK(cmp.cost_b ==
          doctest::Approx(HuberCost(0.25) + HuberCost(1) + HuberCost(1)));
    CHECK(cmp.b_better);
  }

  SUBCASE("residuals valid on one side only are excluded") {
    b.valid = {1, 0, 1};
    const StateComparison cmp = CompareStates(a, b);
    CHECK(cmp.common_count == 2);
    CHECK(cmp.cost_a == doctest::Approx(HuberCost(1) + HuberCost(9)));
  }

  SUBCASE("identical states are not better") {
    const StateComparison cmp = CompareStates(a, a);
    CHECK(cmp.cost_a == cmp.cost_b);
    CHECK(!cmp.b_better);
  }

  SUBCASE("empty common set is not better") {
    b.valid = {0, 0, 0};
    const StateComparison cmp = CompareStates(a, b);
    CHECK(cmp.common_count == 0);
    CHECK(!cmp.b_better);
  }
}

TEST_CASE("BA Jacobian columns match full central finite differences") {
  auto gt = MakeGroundTruthProblem({.views = 3, .seed = 34});
  CalibrationProblem problem = gt.problem;

  // Perturb the state so residuals and Jacobians are generic.
  Rng rng(35);
  for (auto& image : problem.images) {
    image.pose = ApplyPoseUpdate(
        image.pose,
        0.002 * Vec3d(rng.Gaussian(), rng.Gaussian(), rng.Gaussian()),
        0.002 * Vec3d(rng.Gaussian(), rng.Gaussian(), rng.Gaussian()));
  }

  BAOptions options;
  const ResidualEvaluation eval = EvaluateResiduals(problem);
  const BALayout layout = ComputeLayout(problem, eval);
  const auto tangents = ComputeGridTangents(problem);
  const auto blocks =
      LinearizeObservations(problem, layout, tangents, eval, options);

  // Full finite differences of the residual through ApplyBAStep.
  const double h = 1e-6;
  int checked_obs = 0;
  for (size_t k = 0; k < blocks.size() && checked_obs < 10; k += 23) {
    const ObservationBlock& block = blocks[k];
    if (!block.valid) continue;
    ++checked_obs;
    for (size_t cidx = 0; cidx < block.columns.size(); ++cidx) {
      const int column = block.columns[cidx];
      VecXd delta = VecXd::Zero(layout.total);
      delta[column] = h;
      const CalibrationProblem plus =
          ApplyBAStep(problem, layout, tangents, delta);
      delta[column] = -h;
      const CalibrationProblem minus =
          ApplyBAStep(problem, layout, tangents, delta);
      const ResidualEvaluation ep = EvaluateResiduals(plus, &eval.projections);
      const ResidualEvaluation em = EvaluateResiduals(minus, &eval.projections);
      REQUIRE(ep.valid[k]);
      REQUIRE(em.valid[k]);
      const Vec2d numeric = (ep.values[k] - em.values[k]) / (2.0 * h);
      const Vec2d analytic = block.jac.col(cidx);
      const double scale =
          std::max({1.0, numeric.norm(), analytic.norm()});
      CHECK((numeric - analytic).norm() / scale <= 1e-5);
    }
  }
  CHECK(checked_obs >= 5);
}

TEST_CASE("BA at ground truth terminates immediately") {
  auto gt = MakeGroundTruthProblem({.views = 5, .seed = 36}, 12.0);
  // Tighten to the true optimum first (the grid fit is only near-exact),
  // then restart: the restarted run must stop within two iterations with
  // no significant cost change.
  BAOptions options;
  options.lm.max_iterations = 30;
  BundleAdjust(gt.problem, options);

  CalibrationProblem at_optimum = gt.problem;
  options.lm.max_iterations = 2;
  const BAReport report = BundleAdjust(at_optimum, options);
  CHECK(report.iterations <= 2);
  const double change =
      std::abs(report.final_cost - report.initial_cost);
  CHECK(change <= 1e-12 * std::max(1.0, report.initial_cost) + 1e-15);
}

TEST_CASE("BA recovers perturbed poses on noise-free data") {
  auto gt = MakeGroundTruthProblem({.views = 8, .seed = 37}, 12.0);
  CalibrationProblem problem = gt.problem;

  Rng rng(38);
  for (auto& image : problem.images) {
    const Vec3d axis =
        Vec3d(rng.Gaussian(), rng.Gaussian(), rng.Gaussian()).normalized();
    image.pose = ApplyPoseUpdate(image.pose, (0.5 * M_PI / 180.0) * axis,
                                 0.005 * Vec3d(rng.Gaussian(), rng.Gaussian(),
                                               rng.Gaussian()));
  }

  BAOptions options;
  options.lm.max_iterations = 60;
  const BAReport report = BundleAdjust(problem, options);
  CHECK(report.steps.size() > 0);
  CHECK(!report.diverged);
  CHECK(MedianReprojectionError(problem) < 1e-3);
  CHECK(problem.PointsWithinBounds());
}

TEST_CASE("accepted common-valid costs decrease monotonically") {
  auto gt = MakeGroundTruthProblem({.views = 6, .noise_px = 0.05, .seed = 39},
                                   16.0);
  BAOptions options;
  options.lm.max_iterations = 25;
  const BAReport report = BundleAdjust(gt.problem, options);
  for (const BAStepInfo& step : report.steps) {
    if (step.accepted) {
      CHECK(step.common_cost_after < step.common_cost_before);
    }
  }
}

TEST_CASE("gauge invariance of residuals") {
  auto gt = MakeGroundTruthProblem({.views = 4, .seed = 40});
  const ResidualEvaluation base = EvaluateResiduals(gt.problem);

  SUBCASE("global rigid transform plus uniform scale") {
    CalibrationProblem transformed = gt.problem;
    RigidTransform g;
    g.rotation = Quatd(Eigen::AngleAxisd(0.3, Vec3d(0.2, 1.0, -0.4).normalized()));
    g.translation = Vec3d(0.21, -0.05, 0.4);
    const double scale = 1.37;
    const RigidTransform g_inverse = g.Inverse();
    // p' = s (G p); T' = T о G^-1 with translation scaled: X = T'(p') must
    // reproduce s X up to the central model's scale invariance.
    for (Vec3d& p : transformed.points) p = scale * (g * p);
    for (ProblemImage& image : transformed.images) {
      RigidTransform composed = image.pose * g_inverse;
      composed.translation *= scale;
      image.pose = composed;
    }
    const ResidualEvaluation eval = EvaluateResiduals(transformed);
    for (size_t k = 0; k < base.values.size(); ++k) {
      REQUIRE(eval.valid[k] == base.valid[k]);
      if (base.valid[k]) {
        CHECK((eval.values[k] - base.values[k]).norm() <= 1e-10);
      }
    }
  }

  SUBCASE("rotating poses against grid directions") {
    CalibrationProblem transformed = gt.problem;
    const Mat3d r = RotationExp(Vec3d(0.01, -0.02, 0.015));
    for (ProblemImage& image : transformed.images) {
      RigidTransform rot;
      rot.rotation = Quatd(r);
      image.pose = rot * image.pose;
    }
    auto* model =
        static_cast<CentralGenericModel*>(transformed.cameras[0].model.get());
    for (Vec3d& d : model->mutable_directions()) d = r * d;
    const ResidualEvaluation eval = EvaluateResiduals(transformed);
    for (size_t k = 0; k < base.values.size(); ++k) {
      if (base.valid[k] && eval.valid[k]) {
        CHECK((eval.values[k] - base.values[k]).norm() <= 1e-8);
      }
    }
  }
}

TEST_CASE("noncentral gauge: translating poses against line points") {
  auto data = MakeDataset({.views = 4, .seed = 41, .noncentral = true});
  // Build a non-central problem at ground truth with a fitted central model
  // extended by zero line points, then check the translation gauge.
  PerPixelDirections field(320, 240);
  for (int y = 0; y < 240; ++y) {
    for (int x = 0; x < 320; ++x) {
      const auto line = data.camera->UnprojectLine(Vec2d(x, y));
      if (line) field.Accumulate(x, y, line->direction);
    }
  }
  GridFitOptions fit_options;
  fit_options.cell_px = 16.0;
  const auto fit = FitGridToDirections(field, 320, 240,
                                       CalibratedArea{13, 13, 306, 226},
                                       fit_options);
  REQUIRE(fit);
  NoncentralGenericModel noncentral = NoncentralFromCentral(fit->model);

  std::map<std::string, RigidTransform> poses;
  for (size_t v = 0; v < data.ids.size(); ++v) poses[data.ids[v]] = data.poses[v];
  CalibrationProblem problem = CalibrationProblem::Assemble(
      data.detections, data.pattern, poses,
      std::make_unique<NoncentralGenericModel>(noncentral));

  const ResidualEvaluation base = EvaluateResiduals(problem);
  CalibrationProblem transformed = problem;
  const Vec3d shift(0.003, -0.002, 0.004);
  for (ProblemImage& image : transformed.images) {
    image.pose.translation += shift;
  }
  auto* model = static_cast<NoncentralGenericModel*>(
      transformed.cameras[0].model.get());
  for (Vec3d& p : model->mutable_line_points()) p += shift;
  const ResidualEvaluation eval = EvaluateResiduals(transformed);
  int compared = 0;
  for (size_t k = 0; k < base.values.size(); ++k) {
    if (base.valid[k] && eval.valid[k]) {
      CHECK((eval.values[k] - base.values[k]).norm() <= 1e-8);
      ++compared;
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("robustness to gross outliers") {
  // Enough views per grid cell that the solution is well determined. Each
  // outlier pulls its image's pose by roughly 1/n_observations px (a Huber
  // influence-bound effect), so the 20% regression bound presumes detection
  // noise above that floor.
  auto clean = MakeGroundTruthProblem({.views = 20, .noise_px = 0.15,
                                       .seed = 42}, 28.0);
  BAOptions options;
  options.lm.max_iterations = 40;
  CalibrationProblem clean_problem = clean.problem;
  BundleAdjust(clean_problem, options);
  const double clean_median = MedianReprojectionError(clean_problem);

  // Inject 1% gross outliers (>= 20 px, random directions).
  CalibrationProblem dirty_problem = clean.problem;
  Rng rng(43);
  const size_t n = dirty_problem.observations.size();
  for (size_t k = 0; k < n; k += 100) {
    const double angle = rng.Uniform(0.0, 2.0 * M_PI);
    const double radius = rng.Uniform(22.0, 40.0);
    dirty_problem.observations[k].detection +=
        radius * Vec2d(std::cos(angle), std::sin(angle));
  }
  BundleAdjust(dirty_problem, options);
  // Median over the clean observations only.
  const ResidualEvaluation eval = EvaluateResiduals(dirty_problem);
  std::vector<double> norms;
  for (size_t k = 0; k < n; ++k) {
    if (k % 100 == 0) continue;
    if (eval.valid[k]) norms.push_back(eval.values[k].norm());
  }
  const double dirty_median = oracles::SortMedian(norms);
  CHECK(std::abs(dirty_median - clean_median) <=
        0.2 * std::max(clean_median, 1e-6));
  CHECK(clean_median > 0.01);  // guards against an overfitted comparison
}

TEST_CASE("pattern non-planarity is recovered") {
  // Bend the pattern by a known 1 mm bow and build detections from the bent
  // geometry; BA starting from planar points recovers the offsets.
  auto data = MakeDataset({.views = 20, .seed = 44});
  const double bow = 0.001;
  const double ex = data.pattern.extent_x();
  const double ey = data.pattern.extent_y();
  const auto bent_z = [&](const Vec2d& fp) {
    const double nx = 2.0 * fp.x() / ex - 1.0;
    const double ny = 2.0 * fp.y() / ey - 1.0;
    return bow * (1.0 - nx * nx) * (1.0 - ny * ny);
  };
  DetectionSet detections;
  for (size_t v = 0; v < data.ids.size(); ++v) {
    for (const auto& [i, j] : data.pattern.FeatureSquares()) {
      const Vec2d fp = data.pattern.FeaturePosition(i, j);
      const Vec3d bent(fp.x(), fp.y(), bent_z(fp));
      const auto px = data.camera->Project(data.poses[v] * bent);
      if (!px) continue;
      if (px->x() < 13 || px->y() < 13 || px->x() > 306 || px->y() > 226)
        continue;
      detections[data.ids[v]].push_back({i, j, *px, {}, true});
    }
  }

  PerPixelDirections field(320, 240);
  for (int y = 0; y < 240; ++y) {
    for (int x = 0; x < 320; ++x) {
      const auto dir = data.camera->UnprojectDirection(Vec2d(x, y));
      if (dir) field.Accumulate(x, y, *dir);
    }
  }
  GridFitOptions fit_options;
  fit_options.cell_px = 16.0;
  const auto fit = FitGridToDirections(field, 320, 240,
                                       CalibratedArea{13, 13, 306, 226},
                                       fit_options);
  REQUIRE(fit);
  std::map<std::string, RigidTransform> poses;
  for (size_t v = 0; v < data.ids.size(); ++v) poses[data.ids[v]] = data.poses[v];
  CalibrationProblem problem = CalibrationProblem::Assemble(
      detections, data.pattern, poses,
      std::make_unique<CentralGenericModel>(fit->model));

  BAOptions options;
  options.lm.max_iterations = 60;
  BundleAdjust(problem, options);

  // Remove the rigid gauge to first order: a global translation/tilt of the
  // recovered geometry is unobservable, so compare bow shapes after
  // subtracting the best-fit plane from the z offsets.
  MatXd a(problem.points.size(), 3);
  VecXd b(problem.points.size());
  for (size_t k = 0; k < problem.points.size(); ++k) {
    const auto& [i, j] = problem.point_squares[k];
    const Vec2d fp = data.pattern.FeaturePosition(i, j);
    a.row(k) << 1.0, fp.x(), fp.y();
    b[k] = problem.points[k].z() - bent_z(fp);
  }
  const Vec3d plane = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  double max_error = 0.0;
  for (size_t k = 0; k < problem.points.size(); ++k) {
    max_error = std::max(max_error, std::abs(b[k] - a.row(k).dot(plane)));
  }
  CHECK(max_error < 1e-4);  // 0.1 mm
}

TEST_CASE("metric scaling") {
  auto gt = MakeGroundTruthProblem({.views = 4, .seed = 45});

  SUBCASE("already metric: factor 1") {
    CalibrationProblem problem = gt.problem;
    const auto factor = ApplyMetricScale(&problem, 0.04);
    REQUIRE(factor);
    CHECK(*factor == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("doubled problem recovers factor 0.5") {
    CalibrationProblem problem = gt.problem;
    for (Vec3d& p : problem.points) p *= 2.0;
    for (ProblemImage& image : problem.images) image.pose.translation *= 2.0;
    const auto factor = ApplyMetricScale(&problem, 0.04);
    REQUIRE(factor);
    CHECK(*factor == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("pattern-unit problem recovers the physical scale") {
    // Rebuild the same geometry with square size 1 (pattern units).
    StarPattern unit_pattern(16, 10, 8, 1.0);
    CalibrationProblem problem = gt.problem;
    const double to_units = 1.0 / 0.04;
    for (Vec3d& p : problem.points) p *= to_units;
    for (ProblemImage& image : problem.images) {
      image.pose.translation *= to_units;
    }
    problem.pattern_square_size = 1.0;
    const auto factor = ApplyMetricScale(&problem, 0.04);
    REQUIRE(factor);
    CHECK(std::abs(*factor - 0.04) < 1e-6 * 0.04);
  }

  SUBCASE("single point is degenerate") {
    CalibrationProblem problem = gt.problem;
    problem.points.resize(1);
    problem.point_squares.resize(1);
    CHECK(!ApplyMetricScale(&problem, 0.04));
  }
}
