#pragma once

#include <vector>

#include "calib/ba/problem.h"
#include "calib/core/lm.h"
#include "calib/core/tangents.h"

namespace calib {

struct BAOptions {
  LMSettings lm{.max_iterations = 50};
  // Central finite-difference steps for the projection Jacobian parts.
  double point_fd_step = 1e-4;       // camera-frame point, scaled by range
  double grid_fd_step = 1e-4;        // direction tangent coordinates
  double line_point_fd_step = 1e-5;  // non-central line points
  double parametric_fd_step = 1e-6;  // parametric coefficients, relative
  // Stop after this many consecutive rejections caused purely by residual
  // validity churn (the common-valid sets keep changing near the optimum).
  int max_validity_churn_rejects = 5;
};

// Parameter layout. Offsets are global column indices; -1 marks frozen
// blocks (unobserved control points, images/points without valid residuals,
// the fixed first rig transform).
struct BALayout {
  std::vector<int> image_offset;  // 6 params each
  std::vector<int> rig_offset;    // 6 params each
  std::vector<int> point_offset;  // 3 params each
  struct ModelLayout {
    int offset = -1;
    int params_per_point = 0;        // 2 central, 5 non-central
    std::vector<int> grid_slot;      // per control point; -1 frozen
    int param_count = 0;             // total model parameters
  };
  std::vector<ModelLayout> models;
  int total = 0;
};

// Jacobian rows of one observation over its active columns.
struct ObservationBlock {
  bool valid = false;
  Vec2d residual = Vec2d::Zero();
  std::vector<int> columns;
  Eigen::Matrix<double, 2, Eigen::Dynamic> jac;
};

BALayout ComputeLayout(const CalibrationProblem& problem,
                       const ResidualEvaluation& base_eval);

std::vector<std::vector<TangentBasis>> ComputeGridTangents(
    const CalibrationProblem& problem);

// Jacobians for all observations at the current state. Pose, rig and point
// columns are composed from an analytic transform chain and a
// finite-difference projection Jacobian; model columns use warm-started
// central finite differences through the projection.
std::vector<ObservationBlock> LinearizeObservations(
    const CalibrationProblem& problem, const BALayout& layout,
    const std::vector<std::vector<TangentBasis>>& tangents,
    const ResidualEvaluation& eval, const BAOptions& options,
    bool parallel = true);

// Applies a parameter update to a copy of the problem (poses and rigs via
// local updates, grid directions via tangent-space updates).
CalibrationProblem ApplyBAStep(const CalibrationProblem& problem,
                               const BALayout& layout,
                               const std::vector<std::vector<TangentBasis>>&
                                   tangents,
                               const VecXd& delta);

struct BAStepInfo {
  double common_cost_before = 0.0;
  double common_cost_after = 0.0;
  int common_count = 0;
  int valid_count = 0;
  bool accepted = false;
};

struct BAReport {
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  double initial_cost = 0.0;  // robust cost over valid residuals
  double final_cost = 0.0;
  int initial_valid_count = 0;
  int final_valid_count = 0;
  int parameter_count = 0;
  double seconds = 0.0;
  std::vector<BAStepInfo> steps;
};

// Robust bundle adjustment: joint Levenberg-Marquardt over camera model
// parameters, image poses (and rig transforms), and pattern points, with
// Huber-weighted normal equations, validity-aware step comparison, and no
// explicit gauge fixing.
BAReport BundleAdjust(CalibrationProblem& problem,
                      const BAOptions& options = BAOptions());

}  // namespace calib
