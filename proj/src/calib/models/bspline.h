#pragma once

#include <optional>
#include <vector>

#include "calib/core/types.h"

namespace calib {

// Uniform cubic B-spline machinery. Control points sit at integer parameter
// values; evaluating at parameter u uses the four points
// floor(u)-1 .. floor(u)+2, so the supported domain for a grid of size n is
// [1, n-2].

inline void CubicBSplineWeights(double t, double w[4]) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double mt = 1.0 - t;
  w[0] = mt * mt * mt / 6.0;
  w[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
  w[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
  w[3] = t3 / 6.0;
}

inline void CubicBSplineDerivativeWeights(double t, double dw[4]) {
  const double t2 = t * t;
  dw[0] = -0.5 * (1.0 - t) * (1.0 - t);
  dw[1] = 0.5 * (3.0 * t2 - 4.0 * t);
  dw[2] = 0.5 * (-3.0 * t2 + 2.0 * t + 1.0);
  dw[3] = 0.5 * t2;
}

struct BSplineSegment {
  int index;  // first control point of the 4-point support
  double t;   // local parameter in [0, 1]
};

// Locates the spline segment for parameter u on a grid of grid_size points.
// Empty outside the supported domain [1, grid_size - 2].
inline std::optional<BSplineSegment> LocateBSplineSegment(double u,
                                                          int grid_size) {
  if (!(u >= 1.0 && u <= grid_size - 2.0)) return std::nullopt;
  int i = static_cast<int>(u);
  if (i > grid_size - 3) i = grid_size - 3;
  return BSplineSegment{i - 1, u - i};
}

// Tensor-product surface evaluation over a row-major grid of 3-vectors.
std::optional<Vec3d> EvalBSplineSurface(const std::vector<Vec3d>& values,
                                        int grid_w, int grid_h, double u,
                                        double v);

// Surface value plus partial derivatives with respect to (u, v).
bool EvalBSplineSurfaceWithJacobian(const std::vector<Vec3d>& values,
                                    int grid_w, int grid_h, double u, double v,
                                    Vec3d* value, Vec3d* du, Vec3d* dv);

// Scalar 1D spline over n control values; domain [1, n-2].
std::optional<double> EvalBSplineCurve(const double* values, int n, double u);
inline std::optional<double> EvalBSplineCurve(const std::vector<double>& values,
                                              double u) {
  return EvalBSplineCurve(values.data(), static_cast<int>(values.size()), u);
}
double EvalBSplineCurveDerivative(const std::vector<double>& values, double u);

}  // namespace calib
