#pragma once

#include <vector>

#include "calib/models/bspline.h"
#include "calib/models/camera_model.h"

namespace calib {

// Non-central generic camera model: each grid point stores a unit direction
// and a 3D point on the observation line. Un-projection interpolates both
// with a cubic B-spline surface and re-normalizes the direction; the result
// is the line through the interpolated point with the interpolated direction.
// Grid alignment and pixel mapping match CentralGenericModel.
class NoncentralGenericModel : public CameraModel {
 public:
  NoncentralGenericModel(int width, int height, const CalibratedArea& area,
                         int grid_w, int grid_h)
      : CameraModel(CameraModelKind::kNoncentralGeneric, width, height, area),
        grid_w_(grid_w), grid_h_(grid_h),
        directions_(static_cast<size_t>(grid_w) * grid_h, Vec3d::UnitZ()),
        points_(static_cast<size_t>(grid_w) * grid_h, Vec3d::Zero()) {}

  bool IsCentral() const override { return false; }

  int grid_w() const { return grid_w_; }
  int grid_h() const { return grid_h_; }

  const Vec3d& direction(int gx, int gy) const {
    return directions_[Flat(gx, gy)];
  }
  const Vec3d& line_point(int gx, int gy) const { return points_[Flat(gx, gy)]; }
  void set_direction(int gx, int gy, const Vec3d& dir) {
    directions_[Flat(gx, gy)] = dir.normalized();
  }
  void set_line_point(int gx, int gy, const Vec3d& p) {
    points_[Flat(gx, gy)] = p;
  }
  const std::vector<Vec3d>& directions() const { return directions_; }
  std::vector<Vec3d>& mutable_directions() { return directions_; }
  const std::vector<Vec3d>& line_points() const { return points_; }
  std::vector<Vec3d>& mutable_line_points() { return points_; }

  Vec2d GridFromPixel(const Vec2d& px) const {
    return Vec2d(1.0 + (px.x() - area_.min_x) / area_.width() * (grid_w_ - 3),
                 1.0 + (px.y() - area_.min_y) / area_.height() * (grid_h_ - 3));
  }
  Vec2d PixelFromGrid(const Vec2d& grid) const {
    return Vec2d(area_.min_x + (grid.x() - 1.0) / (grid_w_ - 3) * area_.width(),
                 area_.min_y +
                     (grid.y() - 1.0) / (grid_h_ - 3) * area_.height());
  }

  bool SupportPoints(const Vec2d& px, int indices[16]) const;

  // Direction of the observation line (not a ray through the origin).
  std::optional<Vec3d> UnprojectDirection(const Vec2d& px) const override;
  std::optional<ObservationLine> UnprojectLine(const Vec2d& px) const override;

  // Line plus derivatives of origin and direction with respect to the pixel.
  bool UnprojectLineWithJacobian(const Vec2d& px, ObservationLine* line,
                                 Eigen::Matrix<double, 3, 2>* dorigin,
                                 Eigen::Matrix<double, 3, 2>* ddirection) const;

  std::optional<Vec2d> Project(const Vec3d& point,
                               const Vec2d* hint = nullptr) const override;

  std::unique_ptr<CameraModel> Clone() const override {
    return std::make_unique<NoncentralGenericModel>(*this);
  }

  // Threshold on the squared range-normalized perpendicular offset, making
  // the acceptance scale-consistent with the central model's threshold.
  static constexpr double kProjectionAcceptThreshold = 1e-10;

 private:
  size_t Flat(int gx, int gy) const {
    return static_cast<size_t>(gy) * grid_w_ + gx;
  }

  int grid_w_;
  int grid_h_;
  std::vector<Vec3d> directions_;
  std::vector<Vec3d> points_;
};

}  // namespace calib
