#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace calib::oracles {

namespace {

// De Boor's algorithm for a cubic B-spline on integer knots. Control point
// c[m] carries basis B_{m-2,4} with support [m-2, m+2), so evaluation at u
// in [i, i+1) uses c[i-1..i+2].
template <typename T>
T DeBoorCurve(const std::vector<T>& control, double u) {
  const int n = static_cast<int>(control.size());
  // u in [tau_ell, tau_ell+1) with knots tau_j = j.
  int ell = static_cast<int>(std::floor(u));
  if (ell > n - 3) ell = n - 3;
  if (ell < 1) ell = 1;

  // d_j^[0] = p_j for j = ell-3..ell, where p_j = c[j+2].
  T d[4];
  for (int k = 0; k < 4; ++k) {
    d[k] = control[ell - 3 + k + 2];
  }
  for (int r = 1; r <= 3; ++r) {
    for (int k = 3; k >= r; --k) {
      const double knot_j = ell - 3 + k;  // tau_j for j = ell-3+k
      const double alpha = (u - knot_j) / (4 - r);
      d[k] = (1.0 - alpha) * d[k - 1] + alpha * d[k];
    }
  }
  return d[3];
}

}  // namespace

Vec3d DeBoorSurface(const std::vector<Vec3d>& grid, int grid_w, int grid_h,
                    double u, double v) {
  int iv = static_cast<int>(std::floor(v));
  if (iv > grid_h - 3) iv = grid_h - 3;
  if (iv < 1) iv = 1;
  std::vector<Vec3d> rows(4);
  for (int b = 0; b < 4; ++b) {
    std::vector<Vec3d> row(grid.begin() + static_cast<size_t>(iv - 1 + b) * grid_w,
                           grid.begin() +
                               static_cast<size_t>(iv - 1 + b + 1) * grid_w);
    rows[b] = DeBoorCurve(row, u);
  }
  // Collapse along v with a 4-point de Boor; embed the rows at the support
  // indices iv-1..iv+2 of a minimal control vector.
  std::vector<Vec3d> column(grid_h, Vec3d::Zero());
  for (int b = 0; b < 4; ++b) column[iv - 1 + b] = rows[b];
  return DeBoorCurve(column, v);
}

std::pair<double, double> AffineFitNormalEquations(
    const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size() || p.size() < 2) {
    throw std::invalid_argument("mismatched sample vectors");
  }
  const double n = static_cast<double>(p.size());
  double spp = 0, sp = 0, spq = 0, sq = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    spp += p[i] * p[i];
    sp += p[i];
    spq += p[i] * q[i];
    sq += q[i];
  }
  // [spp sp; sp n] [f; b] = [spq; sq]
  const double det = spp * n - sp * sp;
  if (std::abs(det) < 1e-15) {
    throw std::invalid_argument("degenerate sample variance");
  }
  const double f = (spq * n - sp * sq) / det;
  const double b = (spp * sq - sp * spq) / det;
  return {f, b};
}

int BruteForceNearest(const std::vector<Vec2d>& points, const Vec2d& query) {
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - query).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

double SortMedian(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empty");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

// Best rotation aligning unit vectors a_i to b_i (Kabsch).
Mat3d ProcrustesRotation(const std::vector<Vec3d>& a,
                         const std::vector<Vec3d>& b) {
  Mat3d cov = Mat3d::Zero();
  for (size_t k = 0; k < a.size(); ++k) cov += b[k] * a[k].transpose();
  const Eigen::JacobiSVD<Mat3d> svd(cov, Eigen::ComputeFullU |
                                             Eigen::ComputeFullV);
  Mat3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3d flip = Mat3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

double CenterCost(const std::vector<Vec3d>& directions,
                  const std::vector<Vec3d>& points, const Vec3d& center) {
  std::vector<Vec3d> from_center(points.size());
  for (size_t k = 0; k < points.size(); ++k) {
    from_center[k] = (points[k] - center).normalized();
  }
  const Mat3d r = ProcrustesRotation(from_center, directions);
  double cost = 0.0;
  for (size_t k = 0; k < points.size(); ++k) {
    cost += (directions[k] - r * from_center[k]).squaredNorm();
  }
  return cost;
}

}  // namespace

Vec3d PoseSearchCenter(const std::vector<Vec3d>& directions,
                       const std::vector<Vec3d>& points,
                       double initial_half_range, int levels) {
  Vec3d best = Vec3d::Zero();
  double half = initial_half_range;
  constexpr int kSteps = 13;
  for (int level = 0; level < levels; ++level) {
    Vec3d level_best = best;
    double level_cost = std::numeric_limits<double>::infinity();
    for (int zi = 0; zi < kSteps; ++zi) {
      for (int yi = 0; yi < kSteps; ++yi) {
        for (int xi = 0; xi < kSteps; ++xi) {
          const Vec3d candidate =
              best + half * Vec3d(-1.0 + 2.0 * xi / (kSteps - 1),
                                  -1.0 + 2.0 * yi / (kSteps - 1),
                                  -1.0 + 2.0 * zi / (kSteps - 1));
          const double cost = CenterCost(directions, points, candidate);
          if (cost < level_cost) {
            level_cost = cost;
            level_best = candidate;
          }
        }
      }
    }
    best = level_best;
    half *= 2.2 / (kSteps - 1);  // keep neighbors of the best cell covered
  }
  return best;
}

}  // namespace calib::oracles
