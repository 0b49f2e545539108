// Independent reference implementations used to derive expected test values.
// These intentionally avoid the code paths they check.
#pragma once

#include <utility>
#include <vector>

#include "calib/core/types.h"

namespace calib::oracles {

// Tensor-product cubic B-spline surface evaluation via de Boor's recursive
// algorithm on integer knots. Matches the convention of EvalBSplineSurface:
// parameter u uses control columns floor(u)-1 .. floor(u)+2.
Vec3d DeBoorSurface(const std::vector<Vec3d>& grid, int grid_w, int grid_h,
                    double u, double v);

// Least-squares affine brightness fit q ~ f*p + b by directly solving the
// 2x2 normal equations with Cramer's rule.
std::pair<double, double> AffineFitNormalEquations(
    const std::vector<double>& p, const std::vector<double>& q);

// Exhaustive nearest-neighbor index.
int BruteForceNearest(const std::vector<Vec2d>& points, const Vec2d& query);

// Sort-based median (mean of the two middle elements for even sizes).
double SortMedian(std::vector<double> values);

// Camera-center estimate by coarse-to-fine grid search over the center with
// the rotation solved in closed form (orthogonal Procrustes) per candidate.
// Independent of the LM pose parameterization.
Vec3d PoseSearchCenter(const std::vector<Vec3d>& directions,
                       const std::vector<Vec3d>& points,
                       double initial_half_range = 0.02, int levels = 5);

}  // namespace calib::oracles
