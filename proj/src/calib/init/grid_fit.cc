#include "calib/init/grid_fit.h"

#include <Eigen/SparseCholesky>

#include <map>
#include <deque>

#include "calib/core/tangents.h"

namespace calib {

namespace {

int GridSizeForArea(double extent, double cell_px) {
  const int cells = std::max(1, static_cast<int>(std::lround(extent / cell_px)));
  return cells + 3;
}

struct PixelResidual {
  double weights[16];
  int support[16];  // flat control point indices
  Vec3d target;
  int cell;  // flat cell id for grouped accumulation
};

double TotalCost(const std::vector<PixelResidual>& residuals,
                 const std::vector<Vec3d>& grid) {
  double sum = 0.0;
  for (const PixelResidual& r : residuals) {
    Vec3d p = Vec3d::Zero();
    for (int k = 0; k < 16; ++k) p += r.weights[k] * grid[r.support[k]];
    const double norm = p.norm();
    if (norm < 1e-12) return std::numeric_limits<double>::infinity();
    sum += (p / norm - r.target).squaredNorm();
  }
  return sum;
}

}  // namespace

std::optional<GridFitResult> FitGridToDirections(
    const PerPixelDirections& field, int image_width, int image_height,
    const CalibratedArea& area, const GridFitOptions& options) {
  if (!area.Valid()) return std::nullopt;
  const int grid_w = GridSizeForArea(area.width(), options.cell_px);
  const int grid_h = GridSizeForArea(area.height(), options.cell_px);

  CentralGenericModel model(image_width, image_height, area, grid_w, grid_h);

  // Coverage check over the calibrated area.
  int64_t area_pixels = 0, defined_pixels = 0;
  for (int y = std::max(0, static_cast<int>(area.min_y));
       y <= std::min(image_height - 1, static_cast<int>(area.max_y)); ++y) {
    for (int x = std::max(0, static_cast<int>(area.min_x));
         x <= std::min(image_width - 1, static_cast<int>(area.max_x)); ++x) {
      ++area_pixels;
      if (field.At(x, y)) ++defined_pixels;
    }
  }
  if (area_pixels == 0 ||
      static_cast<double>(defined_pixels) / area_pixels < options.min_coverage) {
    return std::nullopt;
  }

  // Initialize control points from the nearest defined pixels; guess the
  // rest from their neighbors afterwards.
  std::vector<Vec3d>& grid = model.mutable_directions();
  std::vector<uint8_t> initialized(grid.size(), 0);
  const int search_radius = static_cast<int>(2 * options.cell_px) + 2;
  for (int gy = 0; gy < grid_h; ++gy) {
    for (int gx = 0; gx < grid_w; ++gx) {
      Vec2d px = model.PixelFromGrid(Vec2d(gx, gy));
      px = area.Clamp(px);
      const int x = std::clamp(static_cast<int>(std::lround(px.x())), 0,
                               image_width - 1);
      const int y = std::clamp(static_cast<int>(std::lround(px.y())), 0,
                               image_height - 1);
      const auto dir = field.AtNearby(x, y, search_radius);
      if (dir) {
        grid[gy * grid_w + gx] = *dir;
        initialized[gy * grid_w + gx] = 1;
      }
    }
  }
  // Neighbor propagation for unseeded control points.
  std::deque<int> queue;
  for (size_t i = 0; i < grid.size(); ++i) {
    if (initialized[i]) queue.push_back(static_cast<int>(i));
  }
  if (queue.empty()) return std::nullopt;
  while (!queue.empty()) {
    const int idx = queue.front();
    queue.pop_front();
    const int gx = idx % grid_w;
    const int gy = idx / grid_w;
    const int neighbors[4][2] = {{gx - 1, gy}, {gx + 1, gy}, {gx, gy - 1},
                                 {gx, gy + 1}};
    for (const auto& n : neighbors) {
      if (n[0] < 0 || n[1] < 0 || n[0] >= grid_w || n[1] >= grid_h) continue;
      const int nidx = n[1] * grid_w + n[0];
      if (initialized[nidx]) continue;
      Vec3d sum = Vec3d::Zero();
      int count = 0;
      const int around[4][2] = {{n[0] - 1, n[1]}, {n[0] + 1, n[1]},
                                {n[0], n[1] - 1}, {n[0], n[1] + 1}};
      for (const auto& a : around) {
        if (a[0] < 0 || a[1] < 0 || a[0] >= grid_w || a[1] >= grid_h) continue;
        const int aidx = a[1] * grid_w + a[0];
        if (initialized[aidx]) {
          sum += grid[aidx];
          ++count;
        }
      }
      if (count > 0 && sum.norm() > 1e-12) {
        grid[nidx] = sum.normalized();
        initialized[nidx] = 1;
        queue.push_back(nidx);
      }
    }
  }

  // Residuals over strided defined pixels.
  std::vector<PixelResidual> residuals;
  for (int y = std::max(0, static_cast<int>(std::ceil(area.min_y)));
       y <= std::min(image_height - 1, static_cast<int>(area.max_y));
       y += options.pixel_stride) {
    for (int x = std::max(0, static_cast<int>(std::ceil(area.min_x)));
         x <= std::min(image_width - 1, static_cast<int>(area.max_x));
         x += options.pixel_stride) {
      const auto dir = field.At(x, y);
      if (!dir) continue;
      const Vec2d g = model.GridFromPixel(Vec2d(x, y));
      const auto su = LocateBSplineSegment(g.x(), grid_w);
      const auto sv = LocateBSplineSegment(g.y(), grid_h);
      if (!su || !sv) continue;
      double wu[4], wv[4];
      CubicBSplineWeights(su->t, wu);
      CubicBSplineWeights(sv->t, wv);
      PixelResidual r;
      int n = 0;
      for (int b = 0; b < 4; ++b) {
        for (int a = 0; a < 4; ++a) {
          r.weights[n] = wu[a] * wv[b];
          r.support[n] = (sv->index + b) * grid_w + (su->index + a);
          ++n;
        }
      }
      r.target = *dir;
      r.cell = sv->index * grid_w + su->index;
      residuals.push_back(r);
    }
  }
  if (residuals.empty()) return std::nullopt;

  // Active parameters: control points supporting at least one residual.
  std::vector<int> param_index(grid.size(), -1);
  int num_active = 0;
  for (const PixelResidual& r : residuals) {
    for (int k = 0; k < 16; ++k) {
      if (param_index[r.support[k]] < 0) param_index[r.support[k]] = 0;
    }
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (param_index[i] == 0) param_index[i] = num_active++;
    else param_index[i] = -1;
  }
  const int num_params = 2 * num_active;

  // Group residuals by spline cell: all pixels of a cell share support.
  std::map<int, std::vector<int>> by_cell;
  for (size_t i = 0; i < residuals.size(); ++i) {
    by_cell[residuals[i].cell].push_back(static_cast<int>(i));
  }

  GridFitResult result{std::move(model), 0.0, 0};
  std::vector<Vec3d>& directions = result.model.mutable_directions();

  double cost = TotalCost(residuals, directions);
  double damping = options.lm.initial_damping;
  int consecutive_rejects = 0;
  std::vector<TangentBasis> tangents(directions.size());
  bool tangents_valid = false;

  Eigen::SparseMatrix<double> h(num_params, num_params);
  std::vector<Eigen::Triplet<double>> triplets;
  VecXd rhs(num_params);

  for (int iteration = 0; iteration < options.lm.max_iterations; ++iteration) {
    result.iterations = iteration + 1;
    if (!tangents_valid) {
      for (size_t i = 0; i < directions.size(); ++i) {
        if (param_index[i] >= 0) tangents[i] = AnyTangents(directions[i]);
      }
      tangents_valid = true;
    }

    triplets.clear();
    rhs.setZero();
    for (const auto& [cell, members] : by_cell) {
      const PixelResidual& first = residuals[members.front()];
      Eigen::Matrix<double, 32, 32> h_cell;
      Eigen::Matrix<double, 32, 1> b_cell;
      h_cell.setZero();
      b_cell.setZero();
      Eigen::Matrix<double, 3, 32> jac;
      for (int idx : members) {
        const PixelResidual& r = residuals[idx];
        Vec3d p = Vec3d::Zero();
        for (int k = 0; k < 16; ++k) p += r.weights[k] * directions[r.support[k]];
        const double norm = p.norm();
        if (norm < 1e-12) continue;
        const Vec3d u = p / norm;
        const Vec3d res = u - r.target;
        const Mat3d dnorm = (Mat3d::Identity() - u * u.transpose()) / norm;
        for (int k = 0; k < 16; ++k) {
          const TangentBasis& t = tangents[r.support[k]];
          jac.col(2 * k) = dnorm * (r.weights[k] * t.t1);
          jac.col(2 * k + 1) = dnorm * (r.weights[k] * t.t2);
        }
        h_cell.noalias() += jac.transpose() * jac;
        b_cell.noalias() += jac.transpose() * res;
      }
      // Scatter into the global system.
      int cols[32];
      for (int k = 0; k < 16; ++k) {
        cols[2 * k] = 2 * param_index[first.support[k]];
        cols[2 * k + 1] = cols[2 * k] + 1;
      }
      for (int a = 0; a < 32; ++a) {
        rhs[cols[a]] += b_cell[a];
        for (int b = 0; b < 32; ++b) {
          triplets.emplace_back(cols[a], cols[b], h_cell(a, b));
        }
      }
    }
    h.setFromTriplets(triplets.begin(), triplets.end());

    bool improved = false;
    while (consecutive_rejects <= options.lm.max_consecutive_rejects) {
      Eigen::SparseMatrix<double> damped = h;
      for (int i = 0; i < num_params; ++i) {
        damped.coeffRef(i, i) += damping * (h.coeff(i, i) + 1e-12);
      }
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(damped);
      if (solver.info() != Eigen::Success) {
        damping *= options.lm.damping_increase;
        ++consecutive_rejects;
        continue;
      }
      const VecXd delta = solver.solve(-rhs);

      std::vector<Vec3d> trial = directions;
      bool feasible = delta.allFinite();
      if (feasible) {
        for (size_t i = 0; i < directions.size(); ++i) {
          const int pi = param_index[i];
          if (pi < 0) continue;
          if (!ApplyDirectionUpdate(directions[i], tangents[i],
                                    delta[2 * pi], delta[2 * pi + 1],
                                    &trial[i])) {
            feasible = false;
            break;
          }
        }
      }
      const double trial_cost =
          feasible ? TotalCost(residuals, trial)
                   : std::numeric_limits<double>::infinity();
      if (trial_cost < cost) {
        const double relative_decrease = (cost - trial_cost) / std::max(cost, 1e-300);
        directions = std::move(trial);
        cost = trial_cost;
        damping *= options.lm.damping_decrease;
        consecutive_rejects = 0;
        tangents_valid = false;
        improved = true;
        if (delta.lpNorm<Eigen::Infinity>() < options.lm.parameter_tolerance ||
            relative_decrease < options.lm.cost_tolerance) {
          iteration = options.lm.max_iterations;  // converged
        }
        break;
      }
      if (delta.lpNorm<Eigen::Infinity>() < options.lm.parameter_tolerance) {
        iteration = options.lm.max_iterations;
        improved = true;  // at the optimum already
        break;
      }
      damping *= options.lm.damping_increase;
      ++consecutive_rejects;
    }
    if (!improved) break;
  }

  result.angular_rms =
      std::sqrt(cost / static_cast<double>(residuals.size()));
  return result;
}

NoncentralGenericModel NoncentralFromCentral(const CentralGenericModel& model) {
  NoncentralGenericModel result(model.width(), model.height(), model.area(),
                                model.grid_w(), model.grid_h());
  result.mutable_directions() = model.directions();
  return result;
}

}  // namespace calib
