#include "calib/eval/error_field.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace calib {

namespace {

std::optional<double> Median(std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::optional<ReprojectionMedians> ComputeReprojectionMedians(
    const ErrorVectorField& field) {
  if (field.entries.empty()) return std::nullopt;
  std::vector<double> train, test;
  for (const ErrorVector& e : field.entries) {
    (e.test_set ? test : train).push_back(e.error.norm());
  }
  ReprojectionMedians result;
  result.train = Median(train);
  result.test = Median(test);
  return result;
}

std::optional<double> Biasedness(const ErrorVectorField& field,
                                 const CalibratedArea& area,
                                 const BiasednessOptions& options) {
  if (!area.Valid() || options.grid < 1) return std::nullopt;
  const int grid = options.grid;
  std::vector<std::vector<Vec2d>> cells(static_cast<size_t>(grid) * grid);
  for (const ErrorVector& e : field.entries) {
    if (!area.Contains(e.position)) continue;
    int cx = static_cast<int>((e.position.x() - area.min_x) / area.width() *
                              grid);
    int cy = static_cast<int>((e.position.y() - area.min_y) / area.height() *
                              grid);
    cx = std::clamp(cx, 0, grid - 1);
    cy = std::clamp(cy, 0, grid - 1);
    cells[static_cast<size_t>(cy) * grid + cx].push_back(e.error);
  }

  // Mean norm of the standard 2D normal.
  const double reference_norm = std::sqrt(M_PI / 2.0);
  std::vector<double> divergences;
  for (const auto& cell : cells) {
    if (static_cast<int>(cell.size()) < options.min_samples) continue;
    double mean_norm = 0.0;
    for (const Vec2d& v : cell) mean_norm += v.norm();
    mean_norm /= static_cast<double>(cell.size());
    const double scale = mean_norm > 1e-30 ? reference_norm / mean_norm : 1.0;

    Vec2d mu = Vec2d::Zero();
    for (const Vec2d& v : cell) mu += scale * v;
    mu /= static_cast<double>(cell.size());
    Mat2d sigma = Mat2d::Zero();
    for (const Vec2d& v : cell) {
      const Vec2d centered = scale * v - mu;
      sigma += centered * centered.transpose();
    }
    sigma /= static_cast<double>(cell.size());

    Eigen::SelfAdjointEigenSolver<Mat2d> eigen(sigma);
    const double l1 = std::max(eigen.eigenvalues()[0], options.eigenvalue_floor);
    const double l2 = std::max(eigen.eigenvalues()[1], options.eigenvalue_floor);
    // KL(N(mu, Sigma) || N(0, I)) in closed form.
    const double kl =
        0.5 * (l1 + l2 + mu.squaredNorm() - 2.0 - std::log(l1) - std::log(l2));
    divergences.push_back(kl);
  }
  return Median(divergences);
}

}  // namespace calib
