#include "calib/models/parametric.h"

#include <cmath>

#include "calib/models/bspline.h"

namespace calib {

namespace {
constexpr int kCentralRadialDefaultSplineSize = 250;
constexpr double kMaxFisheyeTheta = 1.55;  // rad; keeps tan(theta) well-behaved
}  // namespace

ParametricCameraModel::ParametricCameraModel(CameraModelKind kind, int width,
                                             int height,
                                             const CalibratedArea& area)
    : CameraModel(kind, width, height, area) {
  switch (kind) {
    case CameraModelKind::kPolynomial12:
    case CameraModelKind::kThinPrismFisheye:
      params_.assign(12, 0.0);
      break;
    case CameraModelKind::kCentralRadial:
      radial_spline_size_ = kCentralRadialDefaultSplineSize;
      params_.assign(8 + radial_spline_size_, 0.0);
      for (int i = 0; i < radial_spline_size_; ++i) params_[8 + i] = 1.0;
      break;
    default:
      throw std::invalid_argument("not a parametric camera model kind");
  }
  params_[0] = params_[1] = 1.0;  // fx, fy
}

ParametricCameraModel ParametricCameraModel::Pinhole(CameraModelKind kind,
                                                     int width, int height,
                                                     double fx, double fy,
                                                     double cx, double cy) {
  CalibratedArea area{0.0, 0.0, static_cast<double>(width - 1),
                      static_cast<double>(height - 1)};
  ParametricCameraModel model(kind, width, height, area);
  model.params_[0] = fx;
  model.params_[1] = fy;
  model.params_[2] = cx;
  model.params_[3] = cy;
  if (kind == CameraModelKind::kCentralRadial) {
    // Cover the corner radius in normalized coordinates.
    const double rx = std::max(cx, width - 1 - cx) / fx;
    const double ry = std::max(cy, height - 1 - cy) / fy;
    model.max_radius_ = 1.05 * std::sqrt(rx * rx + ry * ry);
  }
  return model;
}

bool ParametricCameraModel::Distort(const Vec2d& m, Vec2d* distorted) const {
  const double* p = params_.data();
  const double mx = m.x();
  const double my = m.y();
  const double r2 = m.squaredNorm();

  switch (kind_) {
    case CameraModelKind::kPolynomial12: {
      const double k1 = p[4], k2 = p[5], k3 = p[6];
      const double k4 = p[7], k5 = p[8], k6 = p[9];
      const double p1 = p[10], p2 = p[11];
      const double num = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
      const double den = 1.0 + r2 * (k4 + r2 * (k5 + r2 * k6));
      if (std::abs(den) < 1e-12) return false;
      const double radial = num / den;
      distorted->x() = mx * radial + 2.0 * p1 * mx * my + p2 * (r2 + 2.0 * mx * mx);
      distorted->y() = my * radial + p1 * (r2 + 2.0 * my * my) + 2.0 * p2 * mx * my;
      return true;
    }
    case CameraModelKind::kThinPrismFisheye: {
      const double k1 = p[4], k2 = p[5], k3 = p[6], k4 = p[7];
      const double p1 = p[8], p2 = p[9];
      const double sx1 = p[10], sy1 = p[11];
      // Radial factor as a polynomial in the incidence angle (bounded
      // argument, fisheye-friendly) applied to pinhole-normalized
      // coordinates, so zero coefficients give an exact pinhole.
      const double r = std::sqrt(r2);
      const double theta = std::atan(r);
      const double t2 = theta * theta;
      const double scale = 1.0 + t2 * (k1 + t2 * (k2 + t2 * (k3 + t2 * k4)));
      const double xr = scale * mx;
      const double yr = scale * my;
      const double rho2 = xr * xr + yr * yr;
      distorted->x() = xr + 2.0 * p1 * xr * yr + p2 * (rho2 + 2.0 * xr * xr) +
                       sx1 * rho2;
      distorted->y() = yr + p1 * (rho2 + 2.0 * yr * yr) + 2.0 * p2 * xr * yr +
                       sy1 * rho2;
      return true;
    }
    case CameraModelKind::kCentralRadial: {
      const double p1 = p[4], p2 = p[5];
      const double sx1 = p[6], sy1 = p[7];
      const double r = std::sqrt(r2);
      if (r > max_radius_) return false;
      const double u = 1.0 + (r / max_radius_) * (radial_spline_size_ - 3);
      const auto radial =
          EvalBSplineCurve(params_.data() + 8, radial_spline_size_, u);
      if (!radial) return false;
      distorted->x() = mx * *radial + 2.0 * p1 * mx * my +
                       p2 * (r2 + 2.0 * mx * mx) + sx1 * r2;
      distorted->y() = my * *radial + p1 * (r2 + 2.0 * my * my) +
                       2.0 * p2 * mx * my + sy1 * r2;
      return true;
    }
    default:
      return false;
  }
}

std::optional<Vec2d> ParametricCameraModel::Project(const Vec3d& point,
                                                    const Vec2d*) const {
  Vec2d m;
  if (kind_ == CameraModelKind::kThinPrismFisheye) {
    const double rho = std::hypot(point.x(), point.y());
    const double theta = std::atan2(rho, point.z());
    if (theta >= kMaxFisheyeTheta) return std::nullopt;
    if (rho < 1e-12) {
      m.setZero();
    } else {
      m = std::tan(theta) / rho * Vec2d(point.x(), point.y());
    }
  } else {
    if (point.z() <= 1e-12) return std::nullopt;
    m = Vec2d(point.x() / point.z(), point.y() / point.z());
  }

  Vec2d d;
  if (!Distort(m, &d)) return std::nullopt;
  const Vec2d px(fx() * d.x() + cx(), fy() * d.y() + cy());
  if (!area_.Contains(px)) return std::nullopt;
  return px;
}

std::optional<Vec3d> ParametricCameraModel::UnprojectDirection(
    const Vec2d& px) const {
  const Vec2d target((px.x() - cx()) / fx(), (px.y() - cy()) / fy());

  // Newton inversion of the distortion map with a numeric Jacobian.
  Vec2d m = target;
  for (int iteration = 0; iteration < 50; ++iteration) {
    Vec2d d;
    if (!Distort(m, &d)) return std::nullopt;
    const Vec2d residual = d - target;
    if (residual.squaredNorm() < 1e-26) break;

    const double h = 1e-7;
    Vec2d dxp, dxm, dyp, dym;
    if (!Distort(m + Vec2d(h, 0), &dxp) || !Distort(m - Vec2d(h, 0), &dxm) ||
        !Distort(m + Vec2d(0, h), &dyp) || !Distort(m - Vec2d(0, h), &dym)) {
      return std::nullopt;
    }
    Mat2d jac;
    jac.col(0) = (dxp - dxm) / (2.0 * h);
    jac.col(1) = (dyp - dym) / (2.0 * h);
    if (std::abs(jac.determinant()) < 1e-15) return std::nullopt;
    m -= jac.inverse() * residual;
    if (!m.allFinite() || m.norm() > 1e6) return std::nullopt;
  }

  Vec2d d;
  if (!Distort(m, &d) || (d - target).norm() > 1e-9) return std::nullopt;
  return Vec3d(m.x(), m.y(), 1.0).normalized();
}

}  // namespace calib
