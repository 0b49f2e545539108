#pragma once

#include <Eigen/Cholesky>

#include "calib/core/types.h"

namespace calib {

// Shared Levenberg-Marquardt schedule. The same damping policy drives
// feature refinement, point projection, pose localization, model fitting
// and bundle adjustment.
struct LMSettings {
  double initial_damping = 1e-4;
  double damping_increase = 10.0;
  double damping_decrease = 0.1;
  int max_iterations = 100;
  // Stop when the max-norm of an accepted update falls below this.
  double parameter_tolerance = 1e-8;
  // Stop when the relative cost decrease of an accepted step falls below this.
  double cost_tolerance = 1e-10;
  // Give up after this many consecutive rejected steps.
  int max_consecutive_rejects = 20;
};

struct LMReport {
  bool converged = false;
  int iterations = 0;
  int accepted_steps = 0;
  int rejected_steps = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;

  bool Diverged() const { return !converged && accepted_steps == 0; }
};

// Dense Levenberg-Marquardt driver for small problems.
//
// Problem interface:
//   using State = <copyable snapshot of the optimized quantities>;
//   State SaveState() const;
//   void RestoreState(const State&);
//   int NumParameters() const;
//   // Normal equations at the current state. Returns false if the state is
//   // not evaluable (e.g. samples left the image).
//   bool EvaluateNormalEquations(MatXd* jtj, VecXd* jtr, double* cost);
//   // Cost only, at the current state.
//   bool EvaluateCost(double* cost);
//   // Moves the state by delta. Returns false if infeasible.
//   bool ApplyStep(const VecXd& delta);
template <typename Problem>
LMReport SolveLevenbergMarquardt(Problem& problem, const LMSettings& settings) {
  LMReport report;
  const int n = problem.NumParameters();

  MatXd jtj(n, n);
  VecXd jtr(n);
  double cost = 0.0;
  if (!problem.EvaluateNormalEquations(&jtj, &jtr, &cost)) {
    return report;
  }
  report.initial_cost = cost;
  report.final_cost = cost;

  double damping = settings.initial_damping;
  int consecutive_rejects = 0;

  for (int iteration = 0; iteration < settings.max_iterations; ++iteration) {
    report.iterations = iteration + 1;

    MatXd damped = jtj;
    for (int i = 0; i < n; ++i) {
      damped(i, i) += damping * (jtj(i, i) + 1e-12);
    }
    const VecXd delta = damped.ldlt().solve(-jtr);
    if (!delta.allFinite()) {
      damping *= settings.damping_increase;
      if (++consecutive_rejects > settings.max_consecutive_rejects) break;
      continue;
    }

    const auto backup = problem.SaveState();
    double trial_cost = 0.0;
    const bool feasible =
        problem.ApplyStep(delta) && problem.EvaluateCost(&trial_cost) &&
        std::isfinite(trial_cost);

    if (feasible && trial_cost < cost) {
      ++report.accepted_steps;
      consecutive_rejects = 0;
      const double relative_decrease = (cost - trial_cost) / std::max(cost, 1e-300);
      cost = trial_cost;
      report.final_cost = cost;
      damping *= settings.damping_decrease;

      if (delta.template lpNorm<Eigen::Infinity>() < settings.parameter_tolerance ||
          relative_decrease < settings.cost_tolerance) {
        report.converged = true;
        return report;
      }
      if (!problem.EvaluateNormalEquations(&jtj, &jtr, &cost)) {
        report.converged = true;  // not re-evaluable; keep the accepted state
        return report;
      }
      report.final_cost = cost;
    } else {
      problem.RestoreState(backup);
      ++report.rejected_steps;
      // A rejected step already below the parameter tolerance means the
      // state cannot improve measurably: treat as converged (this covers
      // starting at the optimum).
      if (delta.template lpNorm<Eigen::Infinity>() <
          settings.parameter_tolerance) {
        report.converged = true;
        return report;
      }
      damping *= settings.damping_increase;
      if (++consecutive_rejects > settings.max_consecutive_rejects) {
        break;
      }
    }
  }
  return report;
}

}  // namespace calib
