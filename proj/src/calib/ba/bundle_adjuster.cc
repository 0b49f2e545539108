#include "calib/ba/bundle_adjuster.h"

#include <omp.h>

#include <Eigen/SparseCholesky>
#include <chrono>

#include "calib/ba/robust_loss.h"
#include "calib/models/central_generic.h"
#include "calib/models/noncentral_generic.h"
#include "calib/models/parametric.h"

namespace calib {

namespace {

bool IsGenericModel(CameraModelKind kind) {
  return kind == CameraModelKind::kCentralGeneric ||
         kind == CameraModelKind::kNoncentralGeneric;
}

// Flat indices of the control points supporting a pixel, for either generic
// model kind.
bool GridSupport(const CameraModel& model, const Vec2d& px, int indices[16]) {
  if (model.kind() == CameraModelKind::kCentralGeneric) {
    return static_cast<const CentralGenericModel&>(model).SupportPoints(
        px, indices);
  }
  if (model.kind() == CameraModelKind::kNoncentralGeneric) {
    return static_cast<const NoncentralGenericModel&>(model).SupportPoints(
        px, indices);
  }
  return false;
}

int GridPointCount(const CameraModel& model) {
  if (model.kind() == CameraModelKind::kCentralGeneric) {
    const auto& m = static_cast<const CentralGenericModel&>(model);
    return m.grid_w() * m.grid_h();
  }
  if (model.kind() == CameraModelKind::kNoncentralGeneric) {
    const auto& m = static_cast<const NoncentralGenericModel&>(model);
    return m.grid_w() * m.grid_h();
  }
  return 0;
}

std::vector<Vec3d>* MutableGridDirections(CameraModel* model) {
  if (model->kind() == CameraModelKind::kCentralGeneric) {
    return &static_cast<CentralGenericModel*>(model)->mutable_directions();
  }
  if (model->kind() == CameraModelKind::kNoncentralGeneric) {
    return &static_cast<NoncentralGenericModel*>(model)->mutable_directions();
  }
  return nullptr;
}

std::vector<Vec3d>* MutableGridLinePoints(CameraModel* model) {
  if (model->kind() == CameraModelKind::kNoncentralGeneric) {
    return &static_cast<NoncentralGenericModel*>(model)->mutable_line_points();
  }
  return nullptr;
}

}  // namespace

BALayout ComputeLayout(const CalibrationProblem& problem,
                       const ResidualEvaluation& base_eval) {
  BALayout layout;
  layout.image_offset.assign(problem.images.size(), -1);
  layout.rig_offset.assign(problem.cameras.size(), -1);
  layout.point_offset.assign(problem.points.size(), -1);
  layout.models.resize(problem.cameras.size());

  std::vector<uint8_t> image_active(problem.images.size(), 0);
  std::vector<uint8_t> point_active(problem.points.size(), 0);
  std::vector<std::vector<uint8_t>> grid_active(problem.cameras.size());
  for (size_t c = 0; c < problem.cameras.size(); ++c) {
    grid_active[c].assign(GridPointCount(*problem.cameras[c].model), 0);
  }

  for (size_t k = 0; k < problem.observations.size(); ++k) {
    if (!base_eval.valid[k]) continue;
    const Observation& obs = problem.observations[k];
    image_active[obs.image] = 1;
    point_active[obs.point] = 1;
    int support[16];
    if (!grid_active[obs.camera].empty() &&
        GridSupport(*problem.cameras[obs.camera].model,
                    base_eval.projections[k], support)) {
      for (int s = 0; s < 16; ++s) grid_active[obs.camera][support[s]] = 1;
    }
  }

  int offset = 0;
  for (size_t i = 0; i < problem.images.size(); ++i) {
    if (image_active[i]) {
      layout.image_offset[i] = offset;
      offset += 6;
    }
  }
  // The first rig transform stays fixed (single-camera problems keep
  // M = identity; multi-camera problems anchor the rig frame to camera 0).
  for (size_t c = 1; c < problem.cameras.size(); ++c) {
    layout.rig_offset[c] = offset;
    offset += 6;
  }
  for (size_t p = 0; p < problem.points.size(); ++p) {
    if (point_active[p]) {
      layout.point_offset[p] = offset;
      offset += 3;
    }
  }
  for (size_t c = 0; c < problem.cameras.size(); ++c) {
    BALayout::ModelLayout& ml = layout.models[c];
    const CameraModelKind kind = problem.cameras[c].model->kind();
    ml.offset = offset;
    if (IsGenericModel(kind)) {
      ml.params_per_point =
          kind == CameraModelKind::kNoncentralGeneric ? 5 : 2;
      ml.grid_slot.assign(grid_active[c].size(), -1);
      int slot = 0;
      for (size_t g = 0; g < grid_active[c].size(); ++g) {
        if (grid_active[c][g]) ml.grid_slot[g] = slot++;
      }
      ml.param_count = slot * ml.params_per_point;
    } else {
      const auto& parametric =
          static_cast<const ParametricCameraModel&>(*problem.cameras[c].model);
      ml.param_count = parametric.NumParams();
    }
    offset += ml.param_count;
  }
  layout.total = offset;
  return layout;
}

std::vector<std::vector<TangentBasis>> ComputeGridTangents(
    const CalibrationProblem& problem) {
  std::vector<std::vector<TangentBasis>> tangents(problem.cameras.size());
  for (size_t c = 0; c < problem.cameras.size(); ++c) {
    const CameraModel& model = *problem.cameras[c].model;
    if (!IsGenericModel(model.kind())) continue;
    const std::vector<Vec3d>* dirs =
        MutableGridDirections(const_cast<CameraModel*>(&model));
    tangents[c].resize(dirs->size());
    for (size_t g = 0; g < dirs->size(); ++g) {
      tangents[c][g] = AnyTangents((*dirs)[g]);
    }
  }
  return tangents;
}

std::vector<ObservationBlock> LinearizeObservations(
    const CalibrationProblem& problem, const BALayout& layout,
    const std::vector<std::vector<TangentBasis>>& tangents,
    const ResidualEvaluation& eval, const BAOptions& options, bool parallel) {
  const size_t n = problem.observations.size();
  std::vector<ObservationBlock> blocks(n);

  const int num_threads = parallel ? omp_get_max_threads() : 1;
  // Per-thread model clones for finite-difference perturbations.
  std::vector<std::vector<std::unique_ptr<CameraModel>>> clones(num_threads);
  for (int t = 0; t < num_threads; ++t) {
    for (const ProblemCamera& camera : problem.cameras) {
      clones[t].push_back(camera.model->Clone());
    }
  }

  const auto linearize_one = [&](int64_t k, int thread) {
    if (!eval.valid[k]) return;
    const Observation& obs = problem.observations[k];
    const ProblemImage& image = problem.images[obs.image];
    const ProblemCamera& camera = problem.cameras[obs.camera];
    CameraModel* model = clones[thread][obs.camera].get();
    const BALayout::ModelLayout& ml = layout.models[obs.camera];

    const Vec3d rotated = image.pose.rotation * problem.points[obs.point];
    const Vec3d x_rig = rotated + image.pose.translation;
    const Vec3d rig_rotated = camera.rig_transform.rotation * x_rig;
    const Vec3d x = rig_rotated + camera.rig_transform.translation;
    const Vec2d base_px = eval.projections[k];

    // Projection Jacobian dpi/dX by warm-started central differences.
    const double h = options.point_fd_step * std::max(0.01, x.norm());
    Eigen::Matrix<double, 2, 3> dpi_dx;
    for (int axis = 0; axis < 3; ++axis) {
      Vec3d dx = Vec3d::Zero();
      dx[axis] = h;
      const auto plus = model->Project(x + dx, &base_px);
      const auto minus = model->Project(x - dx, &base_px);
      if (!plus || !minus) return;  // leave the block invalid
      dpi_dx.col(axis) = (*plus - *minus) / (2.0 * h);
    }

    ObservationBlock& block = blocks[k];
    block.residual = eval.values[k];

    int columns = 0;
    const int pose_base = layout.image_offset[obs.image];
    if (pose_base >= 0) columns += 6;
    const int rig_base = layout.rig_offset[obs.camera];
    if (rig_base >= 0) columns += 6;
    const int point_base = layout.point_offset[obs.point];
    if (point_base >= 0) columns += 3;

    int support[16];
    int grid_columns = 0;
    const bool has_grid =
        ml.params_per_point > 0 && GridSupport(*model, base_px, support);
    if (has_grid) {
      for (int s = 0; s < 16; ++s) {
        if (ml.grid_slot[support[s]] >= 0) grid_columns += ml.params_per_point;
      }
    }
    const bool parametric = !IsGenericModel(model->kind());
    if (parametric) grid_columns = ml.param_count;
    columns += grid_columns;

    block.columns.resize(columns);
    block.jac.resize(2, columns);
    int col = 0;

    const Mat3d rig_rotation = camera.rig_transform.RotationMatrix();
    if (pose_base >= 0) {
      // X(delta) = M(exp(dw) (R p) + t + dt), differentiated at delta = 0.
      const Eigen::Matrix<double, 2, 3> dpi_rig = dpi_dx * rig_rotation;
      const Eigen::Matrix<double, 2, 3> rot_block =
          dpi_rig * -SkewMatrix(rotated);
      for (int a = 0; a < 3; ++a) {
        block.columns[col] = pose_base + a;
        block.jac.col(col++) = rot_block.col(a);
      }
      for (int a = 0; a < 3; ++a) {
        block.columns[col] = pose_base + 3 + a;
        block.jac.col(col++) = dpi_rig.col(a);
      }
    }
    if (rig_base >= 0) {
      const Eigen::Matrix<double, 2, 3> rot_block =
          dpi_dx * -SkewMatrix(rig_rotated);
      for (int a = 0; a < 3; ++a) {
        block.columns[col] = rig_base + a;
        block.jac.col(col++) = rot_block.col(a);
      }
      for (int a = 0; a < 3; ++a) {
        block.columns[col] = rig_base + 3 + a;
        block.jac.col(col++) = dpi_dx.col(a);
      }
    }
    if (point_base >= 0) {
      const Eigen::Matrix<double, 2, 3> point_block =
          dpi_dx * (rig_rotation * image.pose.RotationMatrix());
      for (int a = 0; a < 3; ++a) {
        block.columns[col] = point_base + a;
        block.jac.col(col++) = point_block.col(a);
      }
    }

    if (has_grid && !parametric) {
      std::vector<Vec3d>* dirs = MutableGridDirections(model);
      std::vector<Vec3d>* line_points = MutableGridLinePoints(model);
      const double hg = options.grid_fd_step;
      for (int s = 0; s < 16; ++s) {
        const int g = support[s];
        const int slot = ml.grid_slot[g];
        if (slot < 0) continue;
        const int base = ml.offset + slot * ml.params_per_point;
        const TangentBasis& basis = tangents[obs.camera][g];
        const Vec3d saved = (*dirs)[g];
        for (int t = 0; t < 2; ++t) {
          Vec3d plus_dir, minus_dir;
          ApplyDirectionUpdate(saved, basis, t == 0 ? hg : 0.0,
                               t == 1 ? hg : 0.0, &plus_dir);
          ApplyDirectionUpdate(saved, basis, t == 0 ? -hg : 0.0,
                               t == 1 ? -hg : 0.0, &minus_dir);
          (*dirs)[g] = plus_dir;
          const auto plus = model->Project(x, &base_px);
          (*dirs)[g] = minus_dir;
          const auto minus = model->Project(x, &base_px);
          (*dirs)[g] = saved;
          if (!plus || !minus) {
            block.valid = false;
            return;
          }
          block.columns[col] = base + t;
          block.jac.col(col++) = (*plus - *minus) / (2.0 * hg);
        }
        if (line_points) {
          const double hp = options.line_point_fd_step;
          const Vec3d saved_point = (*line_points)[g];
          for (int axis = 0; axis < 3; ++axis) {
            Vec3d dp = Vec3d::Zero();
            dp[axis] = hp;
            (*line_points)[g] = saved_point + dp;
            const auto plus = model->Project(x, &base_px);
            (*line_points)[g] = saved_point - dp;
            const auto minus = model->Project(x, &base_px);
            (*line_points)[g] = saved_point;
            if (!plus || !minus) {
              block.valid = false;
              return;
            }
            block.columns[col] = base + 2 + axis;
            block.jac.col(col++) = (*plus - *minus) / (2.0 * hp);
          }
        }
      }
    } else if (parametric) {
      auto* pm = static_cast<ParametricCameraModel*>(model);
      std::vector<double>& params = pm->mutable_params();
      for (int a = 0; a < ml.param_count; ++a) {
        const double saved = params[a];
        const double hp =
            options.parametric_fd_step * std::max(1.0, std::abs(saved));
        params[a] = saved + hp;
        const auto plus = model->Project(x, &base_px);
        params[a] = saved - hp;
        const auto minus = model->Project(x, &base_px);
        params[a] = saved;
        if (!plus || !minus) {
          block.valid = false;
          return;
        }
        block.columns[col] = ml.offset + a;
        block.jac.col(col++) = (*plus - *minus) / (2.0 * hp);
      }
    }

    block.columns.resize(col);
    block.jac.conservativeResize(2, col);
    block.valid = true;
  };

  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int64_t k = 0; k < static_cast<int64_t>(n); ++k) {
      linearize_one(k, omp_get_thread_num());
    }
  } else {
    for (int64_t k = 0; k < static_cast<int64_t>(n); ++k) {
      linearize_one(k, 0);
    }
  }
  return blocks;
}

CalibrationProblem ApplyBAStep(const CalibrationProblem& problem,
                               const BALayout& layout,
                               const std::vector<std::vector<TangentBasis>>&
                                   tangents,
                               const VecXd& delta) {
  CalibrationProblem trial(problem);
  for (size_t i = 0; i < trial.images.size(); ++i) {
    const int base = layout.image_offset[i];
    if (base < 0) continue;
    trial.images[i].pose = ApplyPoseUpdate(
        trial.images[i].pose, Vec3d(delta[base], delta[base + 1],
                                    delta[base + 2]),
        Vec3d(delta[base + 3], delta[base + 4], delta[base + 5]));
  }
  for (size_t c = 0; c < trial.cameras.size(); ++c) {
    const int rig_base = layout.rig_offset[c];
    if (rig_base >= 0) {
      trial.cameras[c].rig_transform = ApplyPoseUpdate(
          trial.cameras[c].rig_transform,
          Vec3d(delta[rig_base], delta[rig_base + 1], delta[rig_base + 2]),
          Vec3d(delta[rig_base + 3], delta[rig_base + 4],
                delta[rig_base + 5]));
    }
    const BALayout::ModelLayout& ml = layout.models[c];
    CameraModel* model = trial.cameras[c].model.get();
    if (ml.params_per_point > 0) {
      std::vector<Vec3d>* dirs = MutableGridDirections(model);
      std::vector<Vec3d>* line_points = MutableGridLinePoints(model);
      for (size_t g = 0; g < ml.grid_slot.size(); ++g) {
        const int slot = ml.grid_slot[g];
        if (slot < 0) continue;
        const int base = ml.offset + slot * ml.params_per_point;
        Vec3d updated;
        if (!ApplyDirectionUpdate((*dirs)[g], tangents[c][g], delta[base],
                                  delta[base + 1], &updated)) {
          continue;  // degenerate update: keep the previous direction
        }
        (*dirs)[g] = updated;
        if (line_points) {
          (*line_points)[g] += Vec3d(delta[base + 2], delta[base + 3],
                                     delta[base + 4]);
        }
      }
    } else if (ml.param_count > 0) {
      auto* pm = static_cast<ParametricCameraModel*>(model);
      for (int a = 0; a < ml.param_count; ++a) {
        pm->mutable_params()[a] += delta[ml.offset + a];
      }
    }
  }
  for (size_t p = 0; p < trial.points.size(); ++p) {
    const int base = layout.point_offset[p];
    if (base < 0) continue;
    trial.points[p] += Vec3d(delta[base], delta[base + 1], delta[base + 2]);
  }
  return trial;
}

BAReport BundleAdjust(CalibrationProblem& problem, const BAOptions& options) {
  const auto start_time = std::chrono::steady_clock::now();
  BAReport report;

  ResidualEvaluation eval = EvaluateResiduals(problem);
  report.initial_cost = eval.TotalRobustCost();
  report.initial_valid_count = eval.valid_count;
  report.final_cost = report.initial_cost;
  report.final_valid_count = eval.valid_count;
  if (eval.valid_count == 0) {
    report.diverged = true;
    return report;
  }

  const BALayout layout = ComputeLayout(problem, eval);
  report.parameter_count = layout.total;
  auto tangents = ComputeGridTangents(problem);

  double damping = options.lm.initial_damping;
  int consecutive_rejects = 0;
  int churn_rejects = 0;

  Eigen::SparseMatrix<double> hessian(layout.total, layout.total);
  std::vector<Eigen::Triplet<double>> triplets;
  VecXd rhs(layout.total);

  for (int iteration = 0; iteration < options.lm.max_iterations; ++iteration) {
    report.iterations = iteration + 1;

    const auto blocks =
        LinearizeObservations(problem, layout, tangents, eval, options);

    triplets.clear();
    rhs.setZero();
    for (int i = 0; i < layout.total; ++i) triplets.emplace_back(i, i, 0.0);
    for (size_t k = 0; k < blocks.size(); ++k) {
      const ObservationBlock& block = blocks[k];
      if (!block.valid) continue;
      const double weight = HuberWeight(block.residual.squaredNorm());
      const int nc = static_cast<int>(block.columns.size());
      for (int a = 0; a < nc; ++a) {
        const Vec2d ja = weight * block.jac.col(a);
        rhs[block.columns[a]] += ja.dot(block.residual);
        for (int b = a; b < nc; ++b) {
          const double value = ja.dot(block.jac.col(b));
          const int ca = block.columns[a];
          const int cb = block.columns[b];
          // Upper-triangular storage.
          triplets.emplace_back(std::min(ca, cb), std::max(ca, cb), value);
        }
      }
    }
    hessian.setFromTriplets(triplets.begin(), triplets.end());

    bool accepted = false;
    while (consecutive_rejects <= options.lm.max_consecutive_rejects) {
      Eigen::SparseMatrix<double> damped = hessian;
      for (int i = 0; i < layout.total; ++i) {
        damped.coeffRef(i, i) += damping * (hessian.coeff(i, i) + 1e-12);
      }
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Upper>
          solver(damped);
      VecXd delta;
      if (solver.info() == Eigen::Success) {
        delta = solver.solve(-rhs);
      }
      if (solver.info() != Eigen::Success || !delta.allFinite()) {
        damping *= options.lm.damping_increase;
        ++consecutive_rejects;
        continue;
      }

      CalibrationProblem trial =
          ApplyBAStep(problem, layout, tangents, delta);
      const ResidualEvaluation trial_eval =
          EvaluateResiduals(trial, &eval.projections);
      const StateComparison cmp = CompareStates(eval, trial_eval);

      BAStepInfo info;
      info.common_cost_before = cmp.cost_a;
      info.common_cost_after = cmp.cost_b;
      info.common_count = cmp.common_count;
      info.valid_count = trial_eval.valid_count;
      info.accepted = cmp.b_better;
      report.steps.push_back(info);

      if (cmp.b_better) {
        problem = std::move(trial);
        eval = trial_eval;
        report.final_cost = eval.TotalRobustCost();
        report.final_valid_count = eval.valid_count;
        damping *= options.lm.damping_decrease;
        consecutive_rejects = 0;
        churn_rejects = 0;
        tangents = ComputeGridTangents(problem);
        accepted = true;

        const double relative_decrease =
            (cmp.cost_a - cmp.cost_b) / std::max(cmp.cost_a, 1e-300);
        if (delta.lpNorm<Eigen::Infinity>() <
                options.lm.parameter_tolerance ||
            relative_decrease < options.lm.cost_tolerance) {
          report.converged = true;
        }
        break;
      }

      // Rejected: track whether validity churn alone blocked the step.
      ++consecutive_rejects;
      const bool churn = trial_eval.valid_count != cmp.common_count ||
                         eval.valid_count != cmp.common_count;
      if (churn) {
        if (++churn_rejects >= options.max_validity_churn_rejects) {
          report.converged = true;  // oscillation near the optimum
          break;
        }
      } else {
        churn_rejects = 0;
      }
      if (delta.lpNorm<Eigen::Infinity>() < options.lm.parameter_tolerance) {
        report.converged = true;  // cannot improve measurably
        break;
      }
      damping *= options.lm.damping_increase;
    }

    if (report.converged) break;
    if (!accepted) break;  // rejection limit exhausted
  }

  report.diverged = report.steps.empty() ||
                    (!report.converged &&
                     std::none_of(report.steps.begin(), report.steps.end(),
                                  [](const BAStepInfo& s) { return s.accepted; }));
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start_time)
                       .count();
  return report;
}

}  // namespace calib
