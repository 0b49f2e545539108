#include "calib/core/rigid_transform.h"

#include <cmath>

namespace calib {

Mat3d SkewMatrix(const Vec3d& v) {
  Mat3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3d RotationExp(const Vec3d& axis_angle) {
  const double angle = axis_angle.norm();
  const Mat3d k = SkewMatrix(axis_angle);
  if (angle < 1e-10) {
    return Mat3d::Identity() + k + 0.5 * k * k;
  }
  const double s = std::sin(angle) / angle;
  const double c = (1.0 - std::cos(angle)) / (angle * angle);
  return Mat3d::Identity() + s * k + c * k * k;
}

Vec3d RotationLog(const Mat3d& rotation) {
  const double cos_angle =
      std::clamp(0.5 * (rotation.trace() - 1.0), -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  const Vec3d axis_times_2sin(rotation(2, 1) - rotation(1, 2),
                              rotation(0, 2) - rotation(2, 0),
                              rotation(1, 0) - rotation(0, 1));
  if (angle < 1e-9) {
    return 0.5 * axis_times_2sin;
  }
  if (angle > M_PI - 1e-6) {
    // Near 180 degrees: extract axis from the symmetric part.
    Vec3d axis;
    const Mat3d a = 0.5 * (rotation + Mat3d::Identity());
    axis.x() = std::sqrt(std::max(0.0, a(0, 0)));
    axis.y() = std::sqrt(std::max(0.0, a(1, 1)));
    axis.z() = std::sqrt(std::max(0.0, a(2, 2)));
    int max_i = 0;
    axis.cwiseAbs().maxCoeff(&max_i);
    if (axis[max_i] > 0) {
      // Fix signs against the off-diagonal entries.
      if (max_i == 0) {
        axis.y() = std::copysign(axis.y(), a(0, 1));
        axis.z() = std::copysign(axis.z(), a(0, 2));
      } else if (max_i == 1) {
        axis.x() = std::copysign(axis.x(), a(0, 1));
        axis.z() = std::copysign(axis.z(), a(1, 2));
      } else {
        axis.x() = std::copysign(axis.x(), a(0, 2));
        axis.y() = std::copysign(axis.y(), a(1, 2));
      }
    }
    axis.normalize();
    return angle * axis;
  }
  return (0.5 * angle / std::sin(angle)) * axis_times_2sin;
}

RigidTransform ApplyPoseUpdate(const RigidTransform& pose,
                               const Vec3d& delta_rotation,
                               const Vec3d& delta_translation) {
  RigidTransform result;
  result.rotation =
      (Quatd(RotationExp(delta_rotation)) * pose.rotation).normalized();
  result.translation = pose.translation + delta_translation;
  return result;
}

double RotationDistance(const Quatd& a, const Quatd& b) {
  const double dot = std::min(1.0, std::abs(a.dot(b)));
  return 2.0 * std::acos(dot);
}

}  // namespace calib
