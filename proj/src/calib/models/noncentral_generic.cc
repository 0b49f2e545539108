#include "calib/models/noncentral_generic.h"

#include "calib/core/lm.h"

namespace calib {

bool NoncentralGenericModel::SupportPoints(const Vec2d& px,
                                           int indices[16]) const {
  const Vec2d g = GridFromPixel(px);
  const auto su = LocateBSplineSegment(g.x(), grid_w_);
  const auto sv = LocateBSplineSegment(g.y(), grid_h_);
  if (!su || !sv) return false;
  int n = 0;
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      indices[n++] = (sv->index + b) * grid_w_ + (su->index + a);
    }
  }
  return true;
}

std::optional<Vec3d> NoncentralGenericModel::UnprojectDirection(
    const Vec2d& px) const {
  const Vec2d g = GridFromPixel(px);
  const auto value = EvalBSplineSurface(directions_, grid_w_, grid_h_, g.x(),
                                        g.y());
  if (!value) return std::nullopt;
  const double norm = value->norm();
  if (norm < 1e-12) return std::nullopt;
  return *value / norm;
}

std::optional<ObservationLine> NoncentralGenericModel::UnprojectLine(
    const Vec2d& px) const {
  const Vec2d g = GridFromPixel(px);
  const auto dir = EvalBSplineSurface(directions_, grid_w_, grid_h_, g.x(),
                                      g.y());
  const auto origin = EvalBSplineSurface(points_, grid_w_, grid_h_, g.x(),
                                         g.y());
  if (!dir || !origin) return std::nullopt;
  const double norm = dir->norm();
  if (norm < 1e-12) return std::nullopt;
  return ObservationLine{*origin, *dir / norm};
}

bool NoncentralGenericModel::UnprojectLineWithJacobian(
    const Vec2d& px, ObservationLine* line,
    Eigen::Matrix<double, 3, 2>* dorigin,
    Eigen::Matrix<double, 3, 2>* ddirection) const {
  const Vec2d g = GridFromPixel(px);
  Vec3d dir_raw, dir_du, dir_dv, origin, origin_du, origin_dv;
  if (!EvalBSplineSurfaceWithJacobian(directions_, grid_w_, grid_h_, g.x(),
                                      g.y(), &dir_raw, &dir_du, &dir_dv) ||
      !EvalBSplineSurfaceWithJacobian(points_, grid_w_, grid_h_, g.x(), g.y(),
                                      &origin, &origin_du, &origin_dv)) {
    return false;
  }
  const double norm = dir_raw.norm();
  if (norm < 1e-12) return false;
  line->direction = dir_raw / norm;
  line->origin = origin;
  const Mat3d dnorm =
      (Mat3d::Identity() - line->direction * line->direction.transpose()) /
      norm;
  const double su = (grid_w_ - 3) / area_.width();
  const double sv = (grid_h_ - 3) / area_.height();
  ddirection->col(0) = dnorm * dir_du * su;
  ddirection->col(1) = dnorm * dir_dv * sv;
  dorigin->col(0) = origin_du * su;
  dorigin->col(1) = origin_dv * sv;
  return true;
}

namespace {

// Residual: perpendicular offset of the target point from the observation
// line, divided by the range along the line (angle-equivalent units).
struct NoncentralProjectionProblem {
  const NoncentralGenericModel* model;
  Vec3d target;
  Vec2d pixel;

  using State = Vec2d;
  State SaveState() const { return pixel; }
  void RestoreState(const State& s) { pixel = s; }
  int NumParameters() const { return 2; }

  bool Residual(const Vec2d& px, Vec3d* r) const {
    const auto line = model->UnprojectLine(px);
    if (!line) return false;
    const Vec3d w = target - line->origin;
    const double range = w.norm();
    if (range < 1e-12) return false;
    *r = (w - line->direction.dot(w) * line->direction) / range;
    return true;
  }

  bool EvaluateCost(double* cost) const {
    Vec3d r;
    if (!Residual(pixel, &r)) return false;
    *cost = r.squaredNorm();
    return true;
  }

  bool EvaluateNormalEquations(MatXd* jtj, VecXd* jtr, double* cost) const {
    ObservationLine line;
    Eigen::Matrix<double, 3, 2> dorigin, ddir;
    if (!model->UnprojectLineWithJacobian(pixel, &line, &dorigin, &ddir)) {
      return false;
    }
    const Vec3d w = target - line.origin;
    const double range = w.norm();
    if (range < 1e-12) return false;
    const Vec3d& d = line.direction;
    const Vec3d perp = w - d.dot(w) * d;
    const Vec3d r = perp / range;
    *cost = r.squaredNorm();

    Eigen::Matrix<double, 3, 2> jac;
    for (int k = 0; k < 2; ++k) {
      const Vec3d dw = -dorigin.col(k);
      const Vec3d dd = ddir.col(k);
      const double drange = w.dot(dw) / range;
      const Vec3d dperp = dw - dd * d.dot(w) - d * (dd.dot(w) + d.dot(dw));
      jac.col(k) = dperp / range - perp * (drange / (range * range));
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

std::optional<Vec2d> NoncentralGenericModel::Project(const Vec3d& point,
                                                     const Vec2d* hint) const {
  if (!point.allFinite()) return std::nullopt;

  NoncentralProjectionProblem problem;
  problem.model = this;
  problem.target = point;
  problem.pixel = (hint && area_.Contains(*hint)) ? *hint : area_.Center();

  LMSettings settings;
  settings.max_iterations = 50;
  settings.parameter_tolerance = 1e-12;
  settings.cost_tolerance = 1e-14;
  SolveLevenbergMarquardt(problem, settings);

  double final_cost = 0.0;
  if (!problem.EvaluateCost(&final_cost) ||
      final_cost >= kProjectionAcceptThreshold) {
    return std::nullopt;
  }
  return problem.pixel;
}

}  // namespace calib
