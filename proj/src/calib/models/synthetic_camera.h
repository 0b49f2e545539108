#pragma once

#include <vector>

#include "calib/models/camera_model.h"

namespace calib {

// Ground-truth camera for synthetic experiments. Un-projection is closed
// form: a pinhole back-projection followed by a smooth warp of the
// normalized coordinates (one radial term plus sinusoidal components that
// lie outside all parametric model classes). The non-central variant adds a
// smooth line-origin offset field. Projection inverts the warp numerically.
struct DirectionWarpTerm {
  double amplitude = 0.0;   // in normalized coordinates
  Vec2d frequency = Vec2d::Zero();
  double phase = 0.0;
  int axis = 0;  // 0: offsets m.x, 1: offsets m.y
};

struct OriginOffsetTerm {
  Vec3d amplitude = Vec3d::Zero();  // meters
  Vec2d frequency = Vec2d::Zero();
  double phase = 0.0;
};

class SyntheticCamera : public CameraModel {
 public:
  SyntheticCamera(int width, int height, double fx, double fy, double cx,
                  double cy, bool central = true);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }

  double radial_k1 = 0.0;
  std::vector<DirectionWarpTerm> warp_terms;
  std::vector<OriginOffsetTerm> origin_terms;

  bool IsCentral() const override { return central_; }

  // Warped normalized coordinates for a pixel (closed form).
  Vec2d WarpedNormalized(const Vec2d& px) const;

  std::optional<Vec3d> UnprojectDirection(const Vec2d& px) const override;
  std::optional<ObservationLine> UnprojectLine(const Vec2d& px) const override;

  std::optional<Vec2d> Project(const Vec3d& point,
                               const Vec2d* hint = nullptr) const override;

  std::unique_ptr<CameraModel> Clone() const override {
    return std::make_unique<SyntheticCamera>(*this);
  }

 private:
  double fx_, fy_, cx_, cy_;
  bool central_;
};

}  // namespace calib
