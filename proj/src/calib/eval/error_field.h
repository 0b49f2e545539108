#pragma once

#include <optional>
#include <vector>

#include "calib/core/types.h"
#include "calib/models/camera_model.h"

namespace calib {

// Reprojection errors at their image locations, tagged train/test.
struct ErrorVector {
  Vec2d position = Vec2d::Zero();
  Vec2d error = Vec2d::Zero();
  bool test_set = false;
};

struct ErrorVectorField {
  std::vector<ErrorVector> entries;
};

struct ReprojectionMedians {
  std::optional<double> train;  // px
  std::optional<double> test;
};

// Median error norms per tag. Empty when the field is empty.
std::optional<ReprojectionMedians> ComputeReprojectionMedians(
    const ErrorVectorField& field);

struct BiasednessOptions {
  int grid = 50;
  int min_samples = 20;
  double eigenvalue_floor = 1e-8;
};

// Biasedness metric: the error vectors of each qualifying cell of a regular
// grid over the calibrated area are scaled so their mean norm matches a
// standard 2D normal's (sqrt(pi/2)), fitted with a Gaussian, and compared
// against N(0, I) by closed-form KL divergence; the median over cells is
// returned. Near-singular sample covariances are floored, which maps
// maximally biased cells to large finite values. Empty when no cell
// qualifies.
std::optional<double> Biasedness(const ErrorVectorField& field,
                                 const CalibratedArea& area,
                                 const BiasednessOptions& options =
                                     BiasednessOptions());

}  // namespace calib
