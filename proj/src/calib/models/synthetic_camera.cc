#include "calib/models/synthetic_camera.h"

#include <cmath>

#include "calib/core/lm.h"

namespace calib {

SyntheticCamera::SyntheticCamera(int width, int height, double fx, double fy,
                                 double cx, double cy, bool central)
    : CameraModel(central ? CameraModelKind::kSyntheticCentral
                          : CameraModelKind::kSyntheticNoncentral,
                  width, height,
                  // Closed form everywhere; extend one pixel beyond the image
                  // so border subpixel samples stay un-projectable.
                  CalibratedArea{-1.0, -1.0, static_cast<double>(width),
                                 static_cast<double>(height)}),
      fx_(fx), fy_(fy), cx_(cx), cy_(cy), central_(central) {}

Vec2d SyntheticCamera::WarpedNormalized(const Vec2d& px) const {
  const Vec2d m0((px.x() - cx_) / fx_, (px.y() - cy_) / fy_);
  Vec2d m = m0 * (1.0 + radial_k1 * m0.squaredNorm());
  for (const DirectionWarpTerm& term : warp_terms) {
    const double s = term.amplitude *
                     std::sin(2.0 * M_PI * term.frequency.dot(m0) + term.phase);
    m[term.axis] += s;
  }
  return m;
}

std::optional<Vec3d> SyntheticCamera::UnprojectDirection(
    const Vec2d& px) const {
  if (!area_.Contains(px)) return std::nullopt;
  const Vec2d m = WarpedNormalized(px);
  return Vec3d(m.x(), m.y(), 1.0).normalized();
}

std::optional<ObservationLine> SyntheticCamera::UnprojectLine(
    const Vec2d& px) const {
  const auto dir = UnprojectDirection(px);
  if (!dir) return std::nullopt;
  ObservationLine line;
  line.direction = *dir;
  if (!central_) {
    const Vec2d m0((px.x() - cx_) / fx_, (px.y() - cy_) / fy_);
    for (const OriginOffsetTerm& term : origin_terms) {
      line.origin += term.amplitude *
                     std::sin(2.0 * M_PI * term.frequency.dot(m0) + term.phase);
    }
  }
  return line;
}

namespace {

struct SyntheticProjectionProblem {
  const SyntheticCamera* model;
  Vec3d target;
  Vec2d pixel;

  using State = Vec2d;
  State SaveState() const { return pixel; }
  void RestoreState(const State& s) { pixel = s; }
  int NumParameters() const { return 2; }

  bool ResidualAt(const Vec2d& px, Vec3d* r) const {
    const auto line = model->UnprojectLine(px);
    if (!line) return false;
    const Vec3d w = target - line->origin;
    const double range = w.norm();
    if (range < 1e-12) return false;
    *r = w / range - line->direction;
    return true;
  }

  bool EvaluateCost(double* cost) const {
    Vec3d r;
    if (!ResidualAt(pixel, &r)) return false;
    *cost = r.squaredNorm();
    return true;
  }

  bool EvaluateNormalEquations(MatXd* jtj, VecXd* jtr, double* cost) const {
    Vec3d r;
    if (!ResidualAt(pixel, &r)) return false;
    *cost = r.squaredNorm();
    const double h = 1e-5;
    Eigen::Matrix<double, 3, 2> jac;
    for (int k = 0; k < 2; ++k) {
      Vec2d dp = Vec2d::Zero();
      dp[k] = h;
      Vec3d rp, rm;
      if (!ResidualAt(model->area().Clamp(pixel + dp), &rp) ||
          !ResidualAt(model->area().Clamp(pixel - dp), &rm)) {
        return false;
      }
      jac.col(k) = (rp - rm) / (2.0 * h);
    }
    *jtj = jac.transpose() * jac;
    *jtr = jac.transpose() * r;
    return true;
  }

  bool ApplyStep(const VecXd& delta) {
    pixel = model->area().Clamp(pixel + Vec2d(delta[0], delta[1]));
    return true;
  }
};

}  // namespace

std::optional<Vec2d> SyntheticCamera::Project(const Vec3d& point,
                                              const Vec2d* hint) const {
  SyntheticProjectionProblem problem;
  problem.model = this;
  problem.target = point;

  if (hint && area_.Contains(*hint)) {
    problem.pixel = *hint;
  } else if (point.z() > 1e-9) {
    // Pinhole initialization; the warp is a small correction.
    problem.pixel = area_.Clamp(Vec2d(fx_ * point.x() / point.z() + cx_,
                                      fy_ * point.y() / point.z() + cy_));
  } else {
    return std::nullopt;
  }

  LMSettings settings;
  settings.max_iterations = 50;
  settings.parameter_tolerance = 1e-12;
  settings.cost_tolerance = 1e-14;
  SolveLevenbergMarquardt(problem, settings);

  double final_cost = 0.0;
  if (!problem.EvaluateCost(&final_cost) || final_cost >= 1e-16) {
    return std::nullopt;
  }
  return problem.pixel;
}

}  // namespace calib
