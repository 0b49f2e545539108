#pragma once

#include "calib/core/types.h"

namespace calib {

// Rigid transform q, t acting on points as p' = q * p + t.
struct RigidTransform {
  Quatd rotation = Quatd::Identity();
  Vec3d translation = Vec3d::Zero();

  Vec3d operator*(const Vec3d& point) const {
    return rotation * point + translation;
  }

  RigidTransform operator*(const RigidTransform& other) const {
    RigidTransform result;
    result.rotation = (rotation * other.rotation).normalized();
    result.translation = rotation * other.translation + translation;
    return result;
  }

  RigidTransform Inverse() const {
    RigidTransform result;
    result.rotation = rotation.conjugate();
    result.translation = -(result.rotation * translation);
    return result;
  }

  Mat3d RotationMatrix() const { return rotation.toRotationMatrix(); }

  static RigidTransform FromMatrix(const Mat3d& rotation_matrix,
                                   const Vec3d& translation) {
    RigidTransform result;
    result.rotation = Quatd(rotation_matrix).normalized();
    result.translation = translation;
    return result;
  }
};

Mat3d SkewMatrix(const Vec3d& v);

// Rodrigues' formula. Stable for small angles.
Mat3d RotationExp(const Vec3d& axis_angle);
Vec3d RotationLog(const Mat3d& rotation);

// Left-multiplicative local update: T' = (exp(delta_rot), delta_trans) * T.
RigidTransform ApplyPoseUpdate(const RigidTransform& pose,
                               const Vec3d& delta_rotation,
                               const Vec3d& delta_translation);

// Angle of the relative rotation between a and b, in radians.
double RotationDistance(const Quatd& a, const Quatd& b);

}  // namespace calib
