#pragma once

#include <vector>

#include "calib/models/camera_model.h"

namespace calib {

// Parametric baseline models with closed-form projection. Un-projection is
// computed by numerically inverting the projection.
//
// Parameter layouts (params()):
//   Polynomial12:     fx fy cx cy k1..k6 p1 p2            (rational radial)
//   ThinPrismFisheye: fx fy cx cy k1..k4 p1 p2 sx1 sy1    (equidistant base)
//   CentralRadial:    fx fy cx cy p1 p2 sx1 sy1 r0..r{N-1}
// CentralRadial replaces the radial factor with a 1D uniform cubic B-spline
// over the normalized radius [0, max_radius], N control points (default 250).
class ParametricCameraModel : public CameraModel {
 public:
  ParametricCameraModel(CameraModelKind kind, int width, int height,
                        const CalibratedArea& area);

  static ParametricCameraModel Pinhole(CameraModelKind kind, int width,
                                       int height, double fx, double fy,
                                       double cx, double cy);

  int NumParams() const { return static_cast<int>(params_.size()); }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  double fx() const { return params_[0]; }
  double fy() const { return params_[1]; }
  double cx() const { return params_[2]; }
  double cy() const { return params_[3]; }

  double max_radius() const { return max_radius_; }
  void set_max_radius(double r) { max_radius_ = r; }

  int radial_spline_size() const { return radial_spline_size_; }

  // Distortion in normalized image coordinates; px = f * Distort(m) + c.
  // m parameterizes the view direction as (x/|xy|, y/|xy|) * tan(theta),
  // which equals (x/z, y/z) for z > 0. Returns false outside the model's
  // domain.
  bool Distort(const Vec2d& m, Vec2d* distorted) const;

  std::optional<Vec2d> Project(const Vec3d& point,
                               const Vec2d* hint = nullptr) const override;

  std::optional<Vec3d> UnprojectDirection(const Vec2d& px) const override;

  std::unique_ptr<CameraModel> Clone() const override {
    return std::make_unique<ParametricCameraModel>(*this);
  }

 private:
  std::vector<double> params_;
  // CentralRadial spline metadata.
  int radial_spline_size_ = 0;
  double max_radius_ = 1.0;
};

}  // namespace calib
