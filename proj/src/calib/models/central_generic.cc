#include "calib/models/central_generic.h"

#include "calib/core/lm.h"

namespace calib {

bool CentralGenericModel::SupportPoints(const Vec2d& px,
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

std::optional<Vec3d> CentralGenericModel::UnprojectDirection(
    const Vec2d& px) const {
  const Vec2d g = GridFromPixel(px);
  const auto value = EvalBSplineSurface(directions_, grid_w_, grid_h_, g.x(),
                                        g.y());
  if (!value) return std::nullopt;
  const double norm = value->norm();
  if (norm < 1e-12) return std::nullopt;
  return *value / norm;
}

bool CentralGenericModel::UnprojectWithJacobian(
    const Vec2d& px, Vec3d* direction,
    Eigen::Matrix<double, 3, 2>* jacobian) const {
  const Vec2d g = GridFromPixel(px);
  Vec3d value, du, dv;
  if (!EvalBSplineSurfaceWithJacobian(directions_, grid_w_, grid_h_, g.x(),
                                      g.y(), &value, &du, &dv)) {
    return false;
  }
  const double norm = value.norm();
  if (norm < 1e-12) return false;
  *direction = value / norm;
  // d(normalize(p))/dp = (I - d d^T) / |p|, chained with the affine
  // pixel-to-grid scaling.
  const Mat3d dnorm =
      (Mat3d::Identity() - *direction * direction->transpose()) / norm;
  const double su = (grid_w_ - 3) / area_.width();
  const double sv = (grid_h_ - 3) / area_.height();
  jacobian->col(0) = dnorm * du * su;
  jacobian->col(1) = dnorm * dv * sv;
  return true;
}

namespace {

// Levenberg-Marquardt projection: find the pixel whose un-projection matches
// the target direction, constrained to the calibrated area.
struct CentralProjectionProblem {
  const CentralGenericModel* model;
  Vec3d target;  // unit direction
  Vec2d pixel;

  using State = Vec2d;
  State SaveState() const { return pixel; }
  void RestoreState(const State& s) { pixel = s; }
  int NumParameters() const { return 2; }

  bool EvaluateCost(double* cost) const {
    const auto dir = model->UnprojectDirection(pixel);
    if (!dir) return false;
    *cost = (*dir - target).squaredNorm();
    return true;
  }

  bool EvaluateNormalEquations(MatXd* jtj, VecXd* jtr, double* cost) const {
    Vec3d dir;
    Eigen::Matrix<double, 3, 2> jac;
    if (!model->UnprojectWithJacobian(pixel, &dir, &jac)) return false;
    const Vec3d r = dir - target;
    *cost = r.squaredNorm();
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

std::optional<Vec2d> CentralGenericModel::Project(const Vec3d& point,
                                                  const Vec2d* hint) const {
  const double norm = point.norm();
  if (!(norm > 1e-12) || !point.allFinite()) return std::nullopt;

  CentralProjectionProblem problem;
  problem.model = this;
  problem.target = point / norm;
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
