#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace calib {

using Vec2d = Eigen::Vector2d;
using Vec3d = Eigen::Vector3d;
using Vec4d = Eigen::Vector4d;
using Vec2i = Eigen::Vector2i;
using Mat2d = Eigen::Matrix2d;
using Mat3d = Eigen::Matrix3d;
using Mat4d = Eigen::Matrix4d;
using VecXd = Eigen::VectorXd;
using MatXd = Eigen::MatrixXd;
using Quatd = Eigen::Quaterniond;

}  // namespace calib
