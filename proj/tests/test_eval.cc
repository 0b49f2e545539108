#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "calib/core/random.h"
#include "calib/eval/direction_map.h"
#include "calib/eval/error_field.h"
#include "calib/eval/pose_bias.h"
#include "calib/eval/stereo_bias.h"
#include "calib/models/parametric_fit.h"
#include "calib/models/synthetic_camera.h"
#include "oracles.h"

using namespace calib;

TEST_CASE("reprojection medians") {
  ErrorVectorField field;
  SUBCASE("empty field is an error") {
    CHECK(!ComputeReprojectionMedians(field));
  }
  SUBCASE("all zero errors") {
    for (int k = 0; k < 5; ++k) {
      field.entries.push_back({Vec2d(k, k), Vec2d::Zero(), k % 2 == 0});
    }
    const auto stats = *ComputeReprojectionMedians(field);
    CHECK(*stats.train == 0.0);
    CHECK(*stats.test == 0.0);
  }
  SUBCASE("norms 1 2 3 give median 2") {
    field.entries.push_back({Vec2d(0, 0), Vec2d(1, 0), false});
    field.entries.push_back({Vec2d(1, 0), Vec2d(0, 2), false});
    field.entries.push_back({Vec2d(2, 0), Vec2d(3, 0), false});
    const auto stats = *ComputeReprojectionMedians(field);
    CHECK(*stats.train == 2.0);
    CHECK(!stats.test);
  }
  SUBCASE("random field matches the sort oracle") {
    Rng rng(50);
    std::vector<double> norms;
    for (int k = 0; k < 101; ++k) {
      const Vec2d e(rng.Gaussian(), rng.Gaussian());
      field.entries.push_back({Vec2d(k, 0), e, false});
      norms.push_back(e.norm());
    }
    const auto stats = *ComputeReprojectionMedians(field);
    CHECK(*stats.train == doctest::Approx(oracles::SortMedian(norms))
                              .epsilon(1e-15));
  }
}

namespace {

ErrorVectorField GaussianField(const CalibratedArea& area, int per_cell,
                               int grid, double sigma, uint64_t seed) {
  ErrorVectorField field;
  Rng rng(seed);
  for (int cy = 0; cy < grid; ++cy) {
    for (int cx = 0; cx < grid; ++cx) {
      for (int n = 0; n < per_cell; ++n) {
        const Vec2d pos(
            area.min_x + (cx + rng.Uniform()) / grid * area.width(),
            area.min_y + (cy + rng.Uniform()) / grid * area.height());
        field.entries.push_back(
            {pos, sigma * Vec2d(rng.Gaussian(), rng.Gaussian()), false});
      }
    }
  }
  return field;
}

}  // namespace

TEST_CASE("biasedness of isotropic Gaussian errors is near zero") {
  const CalibratedArea area{0, 0, 100, 100};
  BiasednessOptions options;
  options.grid = 4;  // 10k samples per cell stays tractable
  const ErrorVectorField field = GaussianField(area, 10000, 4, 0.05, 51);
  const auto kl = Biasedness(field, area, options);
  REQUIRE(kl);
  CHECK(*kl < 0.01);
}

TEST_CASE("biasedness of identical nonzero vectors is large") {
  const CalibratedArea area{0, 0, 100, 100};
  ErrorVectorField field;
  Rng rng(52);
  for (int n = 0; n < 5000; ++n) {
    field.entries.push_back(
        {Vec2d(rng.Uniform(0, 100), rng.Uniform(0, 100)), Vec2d(0.2, 0.1),
         false});
  }
  BiasednessOptions options;
  options.grid = 4;
  const auto kl = Biasedness(field, area, options);
  REQUIRE(kl);
  CHECK(*kl > 5.0);
}

TEST_CASE("biasedness of standard normal vectors is near zero") {
  const CalibratedArea area{0, 0, 50, 50};
  BiasednessOptions options;
  options.grid = 2;
  const ErrorVectorField field = GaussianField(area, 20000, 2, 1.0, 53);
  const auto kl = Biasedness(field, area, options);
  REQUIRE(kl);
  CHECK(*kl < 0.01);
}

TEST_CASE("biasedness is invariant to uniform scaling") {
  const CalibratedArea area{0, 0, 100, 100};
  ErrorVectorField field = GaussianField(area, 200, 6, 0.1, 54);
  // Make the field anisotropic so the metric is nontrivial.
  for (auto& e : field.entries) e.error.y() *= 0.3;
  BiasednessOptions options;
  options.grid = 6;
  const auto kl1 = Biasedness(field, area, options);
  ErrorVectorField scaled = field;
  for (auto& e : scaled.entries) e.error *= 3.7;
  const auto kl2 = Biasedness(scaled, area, options);
  REQUIRE(kl1);
  REQUIRE(kl2);
  CHECK(std::abs(*kl1 - *kl2) <= 1e-10);
}

TEST_CASE("biasedness requires qualifying cells") {
  const CalibratedArea area{0, 0, 100, 100};
  ErrorVectorField field;
  field.entries.push_back({Vec2d(5, 5), Vec2d(0.1, 0), false});
  CHECK(!Biasedness(field, area, BiasednessOptions()));
}

TEST_CASE("single observation paints a uniform direction map") {
  ErrorVectorField field;
  field.entries.push_back({Vec2d(10, 10), Vec2d(1, 1), false});
  const DirectionMapImage image = ErrorDirectionMap(field, 32, 24);
  const Rgb expected = HueColor(std::atan2(1.0, 1.0));
  for (const Rgb& px : image.pixels) {
    CHECK(px == expected);
  }
}

TEST_CASE("two observations split the map at the bisector") {
  ErrorVectorField field;
  field.entries.push_back({Vec2d(8, 12), Vec2d(1, 0), false});
  field.entries.push_back({Vec2d(24, 12), Vec2d(-1, 0), false});
  const DirectionMapImage image = ErrorDirectionMap(field, 32, 24);
  const Rgb left = HueColor(0.0);
  const Rgb right = HueColor(M_PI);
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 32; ++x) {
      const Rgb& px = image.pixels[static_cast<size_t>(y) * 32 + x];
      if (x < 16) CHECK(px == left);
      if (x > 16) CHECK(px == right);
    }
  }
}

TEST_CASE("direction map equals brute force exactly on 64x64") {
  Rng rng(55);
  ErrorVectorField field;
  for (int n = 0; n < 150; ++n) {
    field.entries.push_back(
        {Vec2d(rng.Uniform(0, 63), rng.Uniform(0, 63)),
         Vec2d(rng.Gaussian(), rng.Gaussian()), false});
  }
  // Add ties: duplicate positions with different errors.
  field.entries.push_back({field.entries[3].position, Vec2d(9, 9), false});
  const DirectionMapImage fast = ErrorDirectionMap(field, 64, 64);
  const DirectionMapImage brute = ErrorDirectionMapSerial(field, 64, 64);
  REQUIRE(fast.pixels.size() == brute.pixels.size());
  for (size_t k = 0; k < fast.pixels.size(); ++k) {
    CHECK(fast.pixels[k] == brute.pixels[k]);
  }
}

TEST_CASE("direction map ignores error magnitudes") {
  ErrorVectorField field;
  Rng rng(56);
  for (int n = 0; n < 20; ++n) {
    field.entries.push_back(
        {Vec2d(rng.Uniform(0, 31), rng.Uniform(0, 31)),
         rng.Uniform(0.1, 10.0) * Vec2d(1, 0), false});
  }
  const DirectionMapImage image = ErrorDirectionMap(field, 32, 32);
  const Rgb expected = HueColor(0.0);
  for (const Rgb& px : image.pixels) CHECK(px == expected);
}

TEST_CASE("stereo depth bias") {
  SUBCASE("the worked example: about 0.6 cm at 2 m") {
    const auto bias = StereoDepthBias({0.05, 650.0, 2.0, 0.05});
    REQUIRE(bias);
    CHECK(std::abs(*bias) >= 0.0056);
    CHECK(std::abs(*bias) <= 0.0066);
  }
  SUBCASE("zero disparity error, zero bias") {
    CHECK(*StereoDepthBias({0.05, 650.0, 2.0, 0.0}) == 0.0);
  }
  SUBCASE("the error grows quadratically with depth") {
    const double at_2m = *StereoDepthBias({0.05, 650.0, 2.0, 0.05});
    const double at_4m = *StereoDepthBias({0.05, 650.0, 4.0, 0.05});
    CHECK(std::abs(at_4m) == doctest::Approx(0.0245).epsilon(0.02));
    const double ratio = at_4m / at_2m;
    CHECK(ratio >= 3.8);
    CHECK(ratio <= 4.2);
  }
  SUBCASE("antisymmetric to first order") {
    const StereoBiasConfig cfg{0.05, 650.0, 2.0, 0.05};
    StereoBiasConfig neg = cfg;
    neg.disparity_error_px = -cfg.disparity_error_px;
    const double sum = *StereoDepthBias(cfg) + *StereoDepthBias(neg);
    const double d = cfg.depth_m;
    const double bf = cfg.baseline_m * cfg.focal_px;
    const double dx = cfg.disparity_error_px;
    const double bound = dx * dx * std::pow(d * d / bf, 2.0) * 2.0 / d;
    CHECK(std::abs(sum) <= bound);
  }
  SUBCASE("degenerate configurations") {
    CHECK(!StereoDepthBias({0.0, 650.0, 2.0, 0.05}));
    CHECK(!StereoDepthBias({0.05, 650.0, 2.0, -100.0}));
  }
}

namespace {

SyntheticCamera MakePoseBiasCamera() {
  SyntheticCamera camera(640, 480, 600, 600, 319.5, 239.5);
  camera.radial_k1 = -0.03;
  camera.warp_terms.push_back({0.002, Vec2d(1.7, 0.8), 0.3, 0});
  camera.warp_terms.push_back({0.0015, Vec2d(0.9, 2.1), 1.2, 1});
  return camera;
}

}  // namespace

TEST_CASE("pose bias experiment self-consistency") {
  const SyntheticCamera camera = MakePoseBiasCamera();
  PoseBiasOptions options;
  options.trials = 10;
  options.seed = 57;
  const auto result = PoseBiasExperiment(camera, camera, options);
  REQUIRE(result);
  CHECK(result->failed_trials == 0);
  CHECK(result->median_center_error_m <= 1e-9);
}

TEST_CASE("pose bias experiment absorbs a rotation as pose") {
  const SyntheticCamera gt = MakePoseBiasCamera();
  // Rotating all observation directions is a pose, not a bias. Approximate
  // a rotated model by warping the normalized coordinates: a small rotation
  // about y shifts m.x by the angle.
  SyntheticCamera rotated = gt;
  const double angle = 0.01 * M_PI / 180.0;
  rotated.warp_terms.push_back({angle, Vec2d(0.0, 0.0), M_PI_2, 0});
  PoseBiasOptions options;
  options.trials = 10;
  options.seed = 58;
  const auto result = PoseBiasExperiment(gt, rotated, options);
  REQUIRE(result);
  CHECK(result->median_center_error_m < 1e-6);
}

TEST_CASE("pose bias matches the independent pose-search oracle") {
  const SyntheticCamera gt = MakePoseBiasCamera();
  // Constructed model discrepancy at the 0.1 px scale.
  SyntheticCamera test = gt;
  test.warp_terms.push_back({0.1 / 600.0, Vec2d(2.4, 1.3), 0.8, 0});
  test.warp_terms.push_back({0.08 / 600.0, Vec2d(1.1, 2.2), 2.0, 1});

  PoseBiasOptions options;
  options.trials = 15;
  options.seed = 59;
  const auto result = PoseBiasExperiment(gt, test, options);
  REQUIRE(result);
  CHECK(result->median_center_error_m > 1e-6);

  std::vector<double> oracle_errors;
  for (int trial = 0; trial < options.trials; ++trial) {
    std::vector<Vec3d> directions, points;
    REQUIRE(PoseBiasTrialData(gt, test, options, trial, &directions, &points));
    oracle_errors.push_back(
        oracles::PoseSearchCenter(directions, points).norm());
  }
  const double oracle_median = oracles::SortMedian(oracle_errors);
  CHECK(std::abs(result->median_center_error_m - oracle_median) <=
        0.05 * oracle_median);
}

TEST_CASE("pose bias experiment is deterministic") {
  const SyntheticCamera gt = MakePoseBiasCamera();
  SyntheticCamera test = gt;
  test.warp_terms.push_back({0.1 / 600.0, Vec2d(2.4, 1.3), 0.8, 0});
  PoseBiasOptions options;
  options.trials = 5;
  options.seed = 60;
  const auto a = PoseBiasExperiment(gt, test, options);
  const auto b = PoseBiasExperiment(gt, test, options);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->median_center_error_m == b->median_center_error_m);
}

TEST_CASE("parametric fit: model in class reaches near-zero deviation") {
  // Ground truth inside the ThinPrismFisheye class.
  auto gt = ParametricCameraModel::Pinhole(CameraModelKind::kThinPrismFisheye,
                                           320, 240, 300, 305, 160.2, 119.4);
  gt.mutable_params()[4] = 0.02;   // k1
  gt.mutable_params()[5] = -0.004; // k2
  gt.mutable_params()[8] = 3e-4;   // p1
  gt.mutable_params()[10] = 2e-4;  // sx1

  // Sample its direction field into a generic grid model.
  CalibratedArea area{8, 8, 311, 231};
  CentralGenericModel target(320, 240, area, 20, 16);
  for (int gy = 0; gy < target.grid_h(); ++gy) {
    for (int gx = 0; gx < target.grid_w(); ++gx) {
      const Vec2d px = area.Clamp(target.PixelFromGrid(Vec2d(gx, gy)));
      const auto dir = gt.UnprojectDirection(px);
      REQUIRE(dir);
      target.set_direction(gx, gy, *dir);
    }
  }
  // Note: the grid interpolates the sampled field, so the target is only
  // near the parametric class; fit residuals reflect both.
  const auto fit =
      FitParametricToGeneric(target, CameraModelKind::kThinPrismFisheye);
  REQUIRE(fit);
  const DeviationMap map = ComputeDeviationMap(target, fit->model,
                                               fit->rotation);
  CHECK(map.MedianMagnitude() < 1e-3);

  SUBCASE("a rotated target is absorbed by the rotation") {
    const Mat3d r = RotationExp(Vec3d(0.5 * M_PI / 180.0, -0.3 * M_PI / 180.0,
                                      0.2 * M_PI / 180.0));
    CentralGenericModel rotated = target;
    for (Vec3d& d : rotated.mutable_directions()) d = r * d;
    const auto fit2 =
        FitParametricToGeneric(rotated, CameraModelKind::kThinPrismFisheye);
    REQUIRE(fit2);
    // Recovered rotation undoes r (up to the fit residual).
    const Mat3d recovered = fit2->rotation;
    CHECK(RotationLog(recovered.transpose() * r.transpose()).norm() < 2e-4);
    const DeviationMap map2 = ComputeDeviationMap(rotated, fit2->model,
                                                  fit2->rotation);
    CHECK(map2.MedianMagnitude() < 1e-3);
  }
}

TEST_CASE("parametric fit: out-of-class wiggles appear in the map") {
  SyntheticCamera gt(320, 240, 300, 300, 159.5, 119.5);
  gt.warp_terms.push_back({1e-4, Vec2d(3.0, 1.5), 0.5, 0});
  gt.warp_terms.push_back({1e-4, Vec2d(1.5, 3.1), 1.4, 1});

  CalibratedArea area{8, 8, 311, 231};
  CentralGenericModel target(320, 240, area, 28, 22);
  for (int gy = 0; gy < target.grid_h(); ++gy) {
    for (int gx = 0; gx < target.grid_w(); ++gx) {
      const Vec2d px = area.Clamp(target.PixelFromGrid(Vec2d(gx, gy)));
      target.set_direction(gx, gy, *gt.UnprojectDirection(px));
    }
  }
  const auto fit =
      FitParametricToGeneric(target, CameraModelKind::kThinPrismFisheye);
  REQUIRE(fit);
  const DeviationMap map = ComputeDeviationMap(target, fit->model,
                                               fit->rotation);
  // Warp amplitude 1e-4 rad at f = 300 px is 0.03 px of deviation; the
  // sinusoid is invisible to the parametric class.
  CHECK(map.MaxMagnitude() >= 0.7 * 1e-4 * 300.0);
}
