#pragma once

#include <vector>

#include "calib/models/bspline.h"
#include "calib/models/camera_model.h"

namespace calib {

// Central generic camera model: a regular grid of unit observation
// directions over the calibrated area, interpolated with a cubic B-spline
// surface. The grid is aligned to the calibrated area and extends beyond it
// by one cell on every side, so every pixel inside the area has a full 4x4
// support.
//
// Pixel-to-grid mapping: a pixel p maps affinely to spline parameter
//   u = 1 + (p.x - min_x) / (max_x - min_x) * (grid_w - 3)
// so that the area's corners land on the inner knot range [1, grid_w - 2].
class CentralGenericModel : public CameraModel {
 public:
  CentralGenericModel(int width, int height, const CalibratedArea& area,
                      int grid_w, int grid_h)
      : CameraModel(CameraModelKind::kCentralGeneric, width, height, area),
        grid_w_(grid_w), grid_h_(grid_h),
        directions_(static_cast<size_t>(grid_w) * grid_h, Vec3d::UnitZ()) {}

  int grid_w() const { return grid_w_; }
  int grid_h() const { return grid_h_; }

  const Vec3d& direction(int gx, int gy) const {
    return directions_[static_cast<size_t>(gy) * grid_w_ + gx];
  }
  void set_direction(int gx, int gy, const Vec3d& dir) {
    directions_[static_cast<size_t>(gy) * grid_w_ + gx] = dir.normalized();
  }
  const std::vector<Vec3d>& directions() const { return directions_; }
  std::vector<Vec3d>& mutable_directions() { return directions_; }

  Vec2d GridFromPixel(const Vec2d& px) const {
    return Vec2d(1.0 + (px.x() - area_.min_x) / area_.width() * (grid_w_ - 3),
                 1.0 + (px.y() - area_.min_y) / area_.height() * (grid_h_ - 3));
  }
  Vec2d PixelFromGrid(const Vec2d& grid) const {
    return Vec2d(area_.min_x + (grid.x() - 1.0) / (grid_w_ - 3) * area_.width(),
                 area_.min_y +
                     (grid.y() - 1.0) / (grid_h_ - 3) * area_.height());
  }

  // Control points involved in un-projecting px (4x4 support), as flat
  // grid indices. Empty if px is outside the calibrated area.
  bool SupportPoints(const Vec2d& px, int indices[16]) const;

  std::optional<Vec3d> UnprojectDirection(const Vec2d& px) const override;

  // Direction plus its derivative with respect to the pixel (3x2).
  bool UnprojectWithJacobian(const Vec2d& px, Vec3d* direction,
                             Eigen::Matrix<double, 3, 2>* jacobian) const;

  std::optional<Vec2d> Project(const Vec3d& point,
                               const Vec2d* hint = nullptr) const override;

  std::unique_ptr<CameraModel> Clone() const override {
    return std::make_unique<CentralGenericModel>(*this);
  }

  // Squared-cost acceptance threshold for iterative projection.
  static constexpr double kProjectionAcceptThreshold = 1e-10;

 private:
  int grid_w_;
  int grid_h_;
  std::vector<Vec3d> directions_;
};

}  // namespace calib
