#pragma once

#include <memory>
#include <optional>
#include <string>

#include "calib/core/types.h"

namespace calib {

// Axis-aligned pixel rectangle over which a camera model is defined.
struct CalibratedArea {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool Valid() const { return min_x < max_x && min_y < max_y; }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  Vec2d Center() const {
    return Vec2d(0.5 * (min_x + max_x), 0.5 * (min_y + max_y));
  }
  bool Contains(const Vec2d& px) const {
    return px.x() >= min_x && px.x() <= max_x && px.y() >= min_y &&
           px.y() <= max_y;
  }
  Vec2d Clamp(const Vec2d& px) const {
    return Vec2d(std::clamp(px.x(), min_x, max_x),
                 std::clamp(px.y(), min_y, max_y));
  }
};

// 3D observation line. For central cameras the origin is the projection
// center (the camera-frame origin).
struct ObservationLine {
  Vec3d origin = Vec3d::Zero();
  Vec3d direction = Vec3d::UnitZ();
};

enum class CameraModelKind {
  kCentralGeneric,
  kNoncentralGeneric,
  kPolynomial12,
  kThinPrismFisheye,
  kCentralRadial,
  kSyntheticCentral,
  kSyntheticNoncentral,
};

std::string CameraModelKindName(CameraModelKind kind);
std::optional<CameraModelKind> CameraModelKindFromName(const std::string& s);

// Common camera interface: un-projection from pixels to observation
// directions/lines and projection of camera-frame points to pixels.
class CameraModel {
 public:
  CameraModel(CameraModelKind kind, int width, int height,
              const CalibratedArea& area)
      : kind_(kind), width_(width), height_(height), area_(area) {}
  virtual ~CameraModel() = default;

  CameraModelKind kind() const { return kind_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const CalibratedArea& area() const { return area_; }
  void set_area(const CalibratedArea& area) { area_ = area; }

  virtual bool IsCentral() const { return true; }

  // Unit observation direction for a pixel inside the calibrated area.
  virtual std::optional<Vec3d> UnprojectDirection(const Vec2d& px) const = 0;

  // Full observation line; central models return a ray through the origin.
  virtual std::optional<ObservationLine> UnprojectLine(const Vec2d& px) const {
    const auto dir = UnprojectDirection(px);
    if (!dir) return std::nullopt;
    return ObservationLine{Vec3d::Zero(), *dir};
  }

  // Projects a camera-frame 3D point to a pixel. Returns empty if the point
  // does not project into the calibrated area (or model domain). hint warm
  // starts iterative projection.
  virtual std::optional<Vec2d> Project(const Vec3d& point,
                                       const Vec2d* hint = nullptr) const = 0;

  virtual std::unique_ptr<CameraModel> Clone() const = 0;

 protected:
  CameraModelKind kind_;
  int width_ = 0;
  int height_ = 0;
  CalibratedArea area_;
};

}  // namespace calib
