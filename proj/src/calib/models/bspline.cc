#include "calib/models/bspline.h"

namespace calib {

std::optional<Vec3d> EvalBSplineSurface(const std::vector<Vec3d>& values,
                                        int grid_w, int grid_h, double u,
                                        double v) {
  const auto su = LocateBSplineSegment(u, grid_w);
  const auto sv = LocateBSplineSegment(v, grid_h);
  if (!su || !sv) return std::nullopt;
  double wu[4], wv[4];
  CubicBSplineWeights(su->t, wu);
  CubicBSplineWeights(sv->t, wv);
  Vec3d result = Vec3d::Zero();
  for (int b = 0; b < 4; ++b) {
    const Vec3d* row = &values[static_cast<size_t>(sv->index + b) * grid_w +
                              su->index];
    result += wv[b] * (wu[0] * row[0] + wu[1] * row[1] + wu[2] * row[2] +
                       wu[3] * row[3]);
  }
  return result;
}

bool EvalBSplineSurfaceWithJacobian(const std::vector<Vec3d>& values,
                                    int grid_w, int grid_h, double u, double v,
                                    Vec3d* value, Vec3d* du, Vec3d* dv) {
  const auto su = LocateBSplineSegment(u, grid_w);
  const auto sv = LocateBSplineSegment(v, grid_h);
  if (!su || !sv) return false;
  double wu[4], wv[4], dwu[4], dwv[4];
  CubicBSplineWeights(su->t, wu);
  CubicBSplineWeights(sv->t, wv);
  CubicBSplineDerivativeWeights(su->t, dwu);
  CubicBSplineDerivativeWeights(sv->t, dwv);
  *value = Vec3d::Zero();
  *du = Vec3d::Zero();
  *dv = Vec3d::Zero();
  for (int b = 0; b < 4; ++b) {
    const Vec3d* row = &values[static_cast<size_t>(sv->index + b) * grid_w +
                              su->index];
    const Vec3d sum_w = wu[0] * row[0] + wu[1] * row[1] + wu[2] * row[2] +
                        wu[3] * row[3];
    const Vec3d sum_dw = dwu[0] * row[0] + dwu[1] * row[1] + dwu[2] * row[2] +
                         dwu[3] * row[3];
    *value += wv[b] * sum_w;
    *du += wv[b] * sum_dw;
    *dv += dwv[b] * sum_w;
  }
  return true;
}

std::optional<double> EvalBSplineCurve(const double* values, int n, double u) {
  const auto s = LocateBSplineSegment(u, n);
  if (!s) return std::nullopt;
  double w[4];
  CubicBSplineWeights(s->t, w);
  return w[0] * values[s->index] + w[1] * values[s->index + 1] +
         w[2] * values[s->index + 2] + w[3] * values[s->index + 3];
}

double EvalBSplineCurveDerivative(const std::vector<double>& values,
                                  double u) {
  const auto s = LocateBSplineSegment(u, static_cast<int>(values.size()));
  if (!s) return 0.0;
  double dw[4];
  CubicBSplineDerivativeWeights(s->t, dw);
  return dw[0] * values[s->index] + dw[1] * values[s->index + 1] +
         dw[2] * values[s->index + 2] + dw[3] * values[s->index + 3];
}

}  // namespace calib
