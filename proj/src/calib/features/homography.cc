#include "calib/features/homography.h"

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace calib {

std::optional<Vec2d> LocalHomography::ApplyInverse(
    const Vec2d& image_point) const {
  if (!Invertible()) return std::nullopt;
  const Vec3d p = H.inverse() * Vec3d(image_point.x(), image_point.y(), 1.0);
  if (std::abs(p.z()) < 1e-14) return std::nullopt;
  return Vec2d(p.x() / p.z(), p.y() / p.z());
}

LocalHomography LocalHomography::CenteredAt(const Vec2d& center) const {
  Mat3d t = Mat3d::Identity();
  t(0, 2) = center.x();
  t(1, 2) = center.y();
  LocalHomography result;
  result.H = H * t;
  if (std::abs(result.H(2, 2)) > 1e-14) result.H /= result.H(2, 2);
  return result;
}

LocalHomography LocalHomography::TranslatedBy(const Vec2d& offset) const {
  Mat3d t = Mat3d::Identity();
  t(0, 2) = offset.x();
  t(1, 2) = offset.y();
  LocalHomography result;
  result.H = t * H;
  if (std::abs(result.H(2, 2)) > 1e-14) result.H /= result.H(2, 2);
  return result;
}

std::optional<LocalHomography> FitHomography(
    const std::vector<Vec2d>& pattern_points,
    const std::vector<Vec2d>& image_points) {
  const size_t n = pattern_points.size();
  if (n < 4 || image_points.size() != n) return std::nullopt;

  // Hartley normalization of both point sets.
  const auto normalize = [](const std::vector<Vec2d>& pts, Mat3d* transform) {
    Vec2d mean = Vec2d::Zero();
    for (const Vec2d& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    double scale = 0.0;
    for (const Vec2d& p : pts) scale += (p - mean).norm();
    scale /= static_cast<double>(pts.size());
    if (scale < 1e-12) scale = 1.0;
    const double s = std::sqrt(2.0) / scale;
    *transform = Mat3d::Identity();
    (*transform)(0, 0) = s;
    (*transform)(1, 1) = s;
    (*transform)(0, 2) = -s * mean.x();
    (*transform)(1, 2) = -s * mean.y();
  };
  Mat3d t_pattern, t_image;
  normalize(pattern_points, &t_pattern);
  normalize(image_points, &t_image);

  MatXd a(2 * n, 9);
  for (size_t k = 0; k < n; ++k) {
    const Vec3d p = t_pattern * Vec3d(pattern_points[k].x(),
                                      pattern_points[k].y(), 1.0);
    const Vec3d q = t_image * Vec3d(image_points[k].x(), image_points[k].y(),
                                    1.0);
    a.row(2 * k) << p.x(), p.y(), 1, 0, 0, 0, -q.x() * p.x(), -q.x() * p.y(),
        -q.x();
    a.row(2 * k + 1) << 0, 0, 0, p.x(), p.y(), 1, -q.y() * p.x(),
        -q.y() * p.y(), -q.y();
  }

  const Eigen::JacobiSVD<MatXd> svd(a, Eigen::ComputeFullV);
  // A unique solution needs rank 8: rank deficiency (e.g. 3 collinear points
  // of 4) leaves a second null direction.
  const auto& sv = svd.singularValues();
  if (sv[7] < 1e-9 * sv[0]) return std::nullopt;

  const VecXd h = svd.matrixV().col(8);
  Mat3d hn;
  hn << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];

  LocalHomography result;
  result.H = t_image.inverse() * hn * t_pattern;
  if (std::abs(result.H(2, 2)) < 1e-12) return std::nullopt;
  result.H /= result.H(2, 2);
  if (!result.Invertible()) return std::nullopt;
  return result;
}

void HomographyPointJacobian(const LocalHomography& h, const Vec2d& s,
                             Eigen::Matrix<double, 2, 8>* jacobian) {
  const Mat3d& m = h.H;
  const double w = m(2, 0) * s.x() + m(2, 1) * s.y() + m(2, 2);
  const double u = (m(0, 0) * s.x() + m(0, 1) * s.y() + m(0, 2)) / w;
  const double v = (m(1, 0) * s.x() + m(1, 1) * s.y() + m(1, 2)) / w;
  jacobian->setZero();
  (*jacobian)(0, 0) = s.x() / w;
  (*jacobian)(0, 1) = s.y() / w;
  (*jacobian)(0, 2) = 1.0 / w;
  (*jacobian)(1, 3) = s.x() / w;
  (*jacobian)(1, 4) = s.y() / w;
  (*jacobian)(1, 5) = 1.0 / w;
  (*jacobian)(0, 6) = -u * s.x() / w;
  (*jacobian)(0, 7) = -u * s.y() / w;
  (*jacobian)(1, 6) = -v * s.x() / w;
  (*jacobian)(1, 7) = -v * s.y() / w;
}

}  // namespace calib
