#pragma once

#include "calib/core/types.h"

namespace calib {

// Two perpendicular unit tangents to a unit direction, chosen
// deterministically from the axis least aligned with it.
struct TangentBasis {
  Vec3d t1;
  Vec3d t2;
};

inline TangentBasis AnyTangents(const Vec3d& unit_direction) {
  const Vec3d abs = unit_direction.cwiseAbs();
  Vec3d axis = Vec3d::UnitX();
  if (abs.y() <= abs.x() && abs.y() <= abs.z()) {
    axis = Vec3d::UnitY();
  } else if (abs.z() <= abs.x() && abs.z() <= abs.y()) {
    axis = Vec3d::UnitZ();
  }
  TangentBasis basis;
  basis.t1 = unit_direction.cross(axis).normalized();
  basis.t2 = unit_direction.cross(basis.t1);
  return basis;
}

// (g + x1 t1 + x2 t2) / ||g + x1 t1 + x2 t2||. Empty direction (norm ~ 0)
// is the caller's signal to reject the step.
inline bool ApplyDirectionUpdate(const Vec3d& direction,
                                 const TangentBasis& basis, double x1,
                                 double x2, Vec3d* updated) {
  const Vec3d raw = direction + x1 * basis.t1 + x2 * basis.t2;
  const double norm = raw.norm();
  if (norm < 1e-12) return false;
  *updated = raw / norm;
  return true;
}

}  // namespace calib
