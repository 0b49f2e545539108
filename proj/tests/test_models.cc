#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "calib/core/random.h"
#include "calib/models/bspline.h"
#include "calib/models/central_generic.h"
#include "calib/models/noncentral_generic.h"
#include "calib/models/parametric.h"
#include "calib/models/synthetic_camera.h"
#include "oracles.h"

using namespace calib;

namespace {

std::vector<Vec3d> RandomGrid(int w, int h, uint64_t seed) {
  std::vector<Vec3d> grid(static_cast<size_t>(w) * h);
  Rng rng(seed);
  for (Vec3d& v : grid) {
    v = Vec3d(rng.Uniform(-1, 1), rng.Uniform(-1, 1), rng.Uniform(-1, 1));
  }
  return grid;
}

// Mildly distorted direction grid that stays smooth and front-facing.
CentralGenericModel MakeWarpedModel(int width = 64, int height = 48) {
  CalibratedArea area{2.0, 2.0, width - 3.0, height - 3.0};
  CentralGenericModel model(width, height, area, 10, 8);
  for (int gy = 0; gy < model.grid_h(); ++gy) {
    for (int gx = 0; gx < model.grid_w(); ++gx) {
      const Vec2d px = model.PixelFromGrid(Vec2d(gx, gy));
      const double mx = (px.x() - width / 2.0) / (0.9 * width);
      const double my = (px.y() - height / 2.0) / (0.9 * width);
      const double wobble = 0.01 * std::sin(3.0 * mx + 2.0 * my);
      model.set_direction(gx, gy, Vec3d(mx + wobble, my - wobble, 1.0));
    }
  }
  return model;
}

}  // namespace

TEST_CASE("cubic B-spline weights form a partition of unity") {
  Rng rng(1);
  for (int n = 0; n < 1000; ++n) {
    const double t = rng.Uniform();
    double w[4], dw[4];
    CubicBSplineWeights(t, w);
    CubicBSplineDerivativeWeights(t, dw);
    CHECK(std::abs(w[0] + w[1] + w[2] + w[3] - 1.0) < 1e-14);
    CHECK(std::abs(dw[0] + dw[1] + dw[2] + dw[3]) < 1e-14);
  }
}

TEST_CASE("constant control grid reproduces the constant") {
  const Vec3d c(0.3, -0.7, 2.0);
  std::vector<Vec3d> grid(6 * 5, c);
  Rng rng(2);
  for (int n = 0; n < 100; ++n) {
    const double u = rng.Uniform(1.0, 4.0);
    const double v = rng.Uniform(1.0, 3.0);
    const Vec3d value = *EvalBSplineSurface(grid, 6, 5, u, v);
    CHECK((value - c).norm() < 1e-14);
  }
}

TEST_CASE("surface evaluation matches the de Boor oracle") {
  const int gw = 9, gh = 7;
  const auto grid = RandomGrid(gw, gh, 3);
  Rng rng(4);
  for (int n = 0; n < 1000; ++n) {
    const double u = rng.Uniform(1.0, gw - 2.0);
    const double v = rng.Uniform(1.0, gh - 2.0);
    const Vec3d ours = *EvalBSplineSurface(grid, gw, gh, u, v);
    const Vec3d oracle = oracles::DeBoorSurface(grid, gw, gh, u, v);
    CHECK((ours - oracle).norm() <= 1e-12);
  }
}

TEST_CASE("surface evaluation fails outside the supported domain") {
  const auto grid = RandomGrid(5, 5, 5);
  CHECK(!EvalBSplineSurface(grid, 5, 5, 0.99, 2.0));
  CHECK(!EvalBSplineSurface(grid, 5, 5, 2.0, 3.01));
  CHECK(EvalBSplineSurface(grid, 5, 5, 1.0, 3.0));
}

TEST_CASE("spline jacobian matches numeric differentiation") {
  const int gw = 8, gh = 8;
  const auto grid = RandomGrid(gw, gh, 6);
  Rng rng(7);
  for (int n = 0; n < 200; ++n) {
    const double u = rng.Uniform(1.1, gw - 2.1);
    const double v = rng.Uniform(1.1, gh - 2.1);
    Vec3d value, du, dv;
    REQUIRE(EvalBSplineSurfaceWithJacobian(grid, gw, gh, u, v, &value, &du,
                                           &dv));
    const double h = 1e-6;
    const Vec3d du_num = (*EvalBSplineSurface(grid, gw, gh, u + h, v) -
                          *EvalBSplineSurface(grid, gw, gh, u - h, v)) /
                         (2 * h);
    const Vec3d dv_num = (*EvalBSplineSurface(grid, gw, gh, u, v + h) -
                          *EvalBSplineSurface(grid, gw, gh, u, v - h)) /
                         (2 * h);
    CHECK((du - du_num).norm() < 1e-6);
    CHECK((dv - dv_num).norm() < 1e-6);
  }
}

TEST_CASE("central generic: constant direction field") {
  CalibratedArea area{0, 0, 63, 47};
  CentralGenericModel model(64, 48, area, 6, 5);
  const Vec3d d = Vec3d(0.1, -0.2, 1.0).normalized();
  for (int gy = 0; gy < 5; ++gy) {
    for (int gx = 0; gx < 6; ++gx) model.set_direction(gx, gy, d);
  }
  Rng rng(8);
  for (int n = 0; n < 100; ++n) {
    const Vec2d px(rng.Uniform(0, 63), rng.Uniform(0, 47));
    CHECK((*model.UnprojectDirection(px) - d).norm() < 1e-14);
  }
  CHECK(!model.UnprojectDirection(Vec2d(-0.5, 10)));
}

TEST_CASE("central generic: un-projections are unit norm") {
  CentralGenericModel model = MakeWarpedModel();
  Rng rng(9);
  for (int n = 0; n < 1000; ++n) {
    const Vec2d px(rng.Uniform(model.area().min_x, model.area().max_x),
                   rng.Uniform(model.area().min_y, model.area().max_y));
    CHECK(std::abs(model.UnprojectDirection(px)->norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("central generic: project/unproject round trip") {
  CentralGenericModel model = MakeWarpedModel();
  Rng rng(10);
  int tested = 0;
  for (int n = 0; n < 1000; ++n) {
    const Vec2d px(rng.Uniform(model.area().min_x, model.area().max_x),
                   rng.Uniform(model.area().min_y, model.area().max_y));
    const Vec3d dir = *model.UnprojectDirection(px);
    const double lambda = rng.Uniform(0.1, 100.0);
    const auto projected = model.Project(lambda * dir);
    REQUIRE(projected);
    CHECK((*projected - px).norm() <= 1e-4);
    ++tested;
  }
  CHECK(tested == 1000);
}

TEST_CASE("central generic: point behind the camera does not project") {
  CentralGenericModel model = MakeWarpedModel();
  CHECK(!model.Project(Vec3d(0.0, 0.0, -2.0)));
}

TEST_CASE("unproject jacobian matches numeric differentiation") {
  CentralGenericModel model = MakeWarpedModel();
  Rng rng(11);
  for (int n = 0; n < 100; ++n) {
    const Vec2d px(rng.Uniform(model.area().min_x + 1, model.area().max_x - 1),
                   rng.Uniform(model.area().min_y + 1, model.area().max_y - 1));
    Vec3d dir;
    Eigen::Matrix<double, 3, 2> jac;
    REQUIRE(model.UnprojectWithJacobian(px, &dir, &jac));
    const double h = 1e-6;
    for (int k = 0; k < 2; ++k) {
      Vec2d dp = Vec2d::Zero();
      dp[k] = h;
      const Vec3d numeric =
          (*model.UnprojectDirection(px + dp) - *model.UnprojectDirection(px - dp)) /
          (2 * h);
      CHECK((jac.col(k) - numeric).norm() < 1e-6);
    }
  }
}

TEST_CASE("noncentral generic with zero line points matches central") {
  CentralGenericModel central = MakeWarpedModel();
  NoncentralGenericModel noncentral(central.width(), central.height(),
                                    central.area(), central.grid_w(),
                                    central.grid_h());
  noncentral.mutable_directions() = central.directions();

  Rng rng(12);
  for (int n = 0; n < 200; ++n) {
    const Vec2d px(rng.Uniform(central.area().min_x, central.area().max_x),
                   rng.Uniform(central.area().min_y, central.area().max_y));
    const auto line = *noncentral.UnprojectLine(px);
    CHECK(line.origin.norm() < 1e-14);
    CHECK((line.direction - *central.UnprojectDirection(px)).norm() < 1e-14);

    const Vec3d point = 3.0 * *central.UnprojectDirection(px);
    const auto p_central = central.Project(point);
    const auto p_noncentral = noncentral.Project(point);
    REQUIRE(p_central);
    REQUIRE(p_noncentral);
    CHECK((*p_central - *p_noncentral).norm() < 1e-6);
  }
}

TEST_CASE("noncentral generic: constant direction with planar line points") {
  CalibratedArea area{0, 0, 63, 47};
  NoncentralGenericModel model(64, 48, area, 6, 5);
  const Vec3d d = Vec3d(0.05, 0.1, 1.0).normalized();
  for (int gy = 0; gy < 5; ++gy) {
    for (int gx = 0; gx < 6; ++gx) {
      model.set_direction(gx, gy, d);
      const Vec2d px = model.PixelFromGrid(Vec2d(gx, gy));
      model.set_line_point(gx, gy, Vec3d(0.001 * px.x(), 0.002 * px.y(), 0.0));
    }
  }
  Rng rng(13);
  for (int n = 0; n < 100; ++n) {
    const Vec2d px(rng.Uniform(0, 63), rng.Uniform(0, 47));
    const auto line = *model.UnprojectLine(px);
    CHECK((line.direction - d).norm() < 1e-13);
    // Origins interpolate the plane z = 0.
    CHECK(std::abs(line.origin.z()) < 1e-13);
  }
}

TEST_CASE("noncentral generic: moving stored points along their lines") {
  CalibratedArea area{0, 0, 63, 47};
  NoncentralGenericModel model(64, 48, area, 7, 6);
  Rng rng(14);
  for (int gy = 0; gy < 6; ++gy) {
    for (int gx = 0; gx < 7; ++gx) {
      const Vec3d d =
          Vec3d(rng.Uniform(-0.2, 0.2), rng.Uniform(-0.2, 0.2), 1.0).normalized();
      model.set_direction(gx, gy, d);
      model.set_line_point(gx, gy, Vec3d(rng.Uniform(-0.01, 0.01),
                                         rng.Uniform(-0.01, 0.01), 0.0));
    }
  }
  NoncentralGenericModel shifted = model;
  for (int gy = 0; gy < 6; ++gy) {
    for (int gx = 0; gx < 7; ++gx) {
      shifted.set_line_point(
          gx, gy, model.line_point(gx, gy) + 0.37 * model.direction(gx, gy));
    }
  }
  // At grid-node-aligned pixels no mixing occurs, so the line is unchanged.
  for (int gy = 1; gy < 5; ++gy) {
    for (int gx = 1; gx < 6; ++gx) {
      const Vec2d px = model.PixelFromGrid(Vec2d(gx, gy));
      if (!model.area().Contains(px)) continue;
      const auto a = *model.UnprojectLine(px);
      const auto b = *shifted.UnprojectLine(px);
      CHECK((a.direction - b.direction).norm() < 1e-12);
      // Same line: the origin offset is parallel to the direction.
      const Vec3d offset = b.origin - a.origin;
      CHECK((offset - offset.dot(a.direction) * a.direction).norm() < 1e-9);
    }
  }
}

TEST_CASE("parametric: zero distortion reduces to pinhole") {
  for (const auto kind :
       {CameraModelKind::kPolynomial12, CameraModelKind::kThinPrismFisheye,
        CameraModelKind::kCentralRadial}) {
    auto model =
        ParametricCameraModel::Pinhole(kind, 640, 480, 600, 610, 321, 242);
    Rng rng(15);
    for (int n = 0; n < 100; ++n) {
      const Vec3d point(rng.Uniform(-0.4, 0.4), rng.Uniform(-0.3, 0.3), 1.0);
      const auto px = model.Project(point);
      REQUIRE(px);
      CHECK(px->x() ==
            doctest::Approx(600 * point.x() / point.z() + 321).epsilon(1e-10));
      CHECK(px->y() ==
            doctest::Approx(610 * point.y() / point.z() + 242).epsilon(1e-10));
    }
    // Optical axis projects to the principal point.
    const auto pp = model.Project(Vec3d(0, 0, 2.0));
    REQUIRE(pp);
    CHECK((*pp - Vec2d(321, 242)).norm() < 1e-12);
  }
}

TEST_CASE("polynomial12 with only k1 matches a scalar oracle") {
  auto model = ParametricCameraModel::Pinhole(CameraModelKind::kPolynomial12,
                                              640, 480, 600, 600, 320, 240);
  model.mutable_params()[4] = 0.12;  // k1
  Rng rng(16);
  for (int n = 0; n < 100; ++n) {
    const double x = rng.Uniform(-0.4, 0.4);
    const double y = rng.Uniform(-0.3, 0.3);
    const auto px = model.Project(Vec3d(x, y, 1.0));
    REQUIRE(px);
    // r' = r (1 + k1 r^2), computed independently per coordinate.
    const double r2 = x * x + y * y;
    const double expected_u = 600 * (x * (1.0 + 0.12 * r2)) + 320;
    const double expected_v = 600 * (y * (1.0 + 0.12 * r2)) + 240;
    CHECK(px->x() == doctest::Approx(expected_u).epsilon(1e-12));
    CHECK(px->y() == doctest::Approx(expected_v).epsilon(1e-12));
  }
}

TEST_CASE("parametric unprojection inverts projection") {
  for (const auto kind :
       {CameraModelKind::kPolynomial12, CameraModelKind::kThinPrismFisheye,
        CameraModelKind::kCentralRadial}) {
    auto model =
        ParametricCameraModel::Pinhole(kind, 640, 480, 620, 615, 318, 243);
    auto& p = model.mutable_params();
    if (kind == CameraModelKind::kPolynomial12) {
      p[4] = 0.05;   // k1
      p[5] = -0.01;  // k2
      p[10] = 5e-4;  // p1
      p[11] = -3e-4; // p2
    } else if (kind == CameraModelKind::kThinPrismFisheye) {
      p[4] = 0.03;
      p[5] = -0.005;
      p[8] = 4e-4;
      p[10] = 2e-4;
    } else {
      p[4] = 3e-4;
      p[5] = -2e-4;
      p[6] = 1e-4;
      for (int i = 0; i < model.radial_spline_size(); ++i) {
        const double t = i / (model.radial_spline_size() - 1.0);
        p[8 + i] = 1.0 + 0.08 * t * t;
      }
    }
    Rng rng(17);
    for (int n = 0; n < 100; ++n) {
      const Vec2d px(rng.Uniform(20, 620), rng.Uniform(20, 460));
      const auto dir = model.UnprojectDirection(px);
      REQUIRE(dir);
      CHECK(std::abs(dir->norm() - 1.0) < 1e-12);
      const auto round = model.Project(*dir);
      REQUIRE(round);
      CHECK((*round - px).norm() < 1e-7);
    }
  }
}

TEST_CASE("synthetic camera: unproject/project consistency with warp") {
  SyntheticCamera camera(640, 480, 600, 605, 319, 241);
  camera.radial_k1 = -0.05;
  camera.warp_terms.push_back({0.002, Vec2d(3.0, 1.0), 0.4, 0});
  camera.warp_terms.push_back({0.0015, Vec2d(1.5, 2.5), 1.1, 1});
  Rng rng(18);
  for (int n = 0; n < 200; ++n) {
    const Vec2d px(rng.Uniform(5, 635), rng.Uniform(5, 475));
    const Vec3d dir = *camera.UnprojectDirection(px);
    const auto projected = camera.Project(2.0 * dir);
    REQUIRE(projected);
    CHECK((*projected - px).norm() < 1e-6);
  }
}
