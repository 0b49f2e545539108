#pragma once

#include <optional>
#include <vector>

#include "calib/core/lm.h"
#include "calib/core/rigid_transform.h"
#include "calib/core/types.h"

namespace calib {

struct LocalizeOptions {
  LMSettings lm;
  int min_correspondences = 6;
};

// Pose estimation from observation directions (camera frame) and 3D points
// (global frame): minimizes the squared chordal mismatch between each
// observation direction and the direction to its transformed point.
// Initialized by a direction-based linear solve for planar point sets
// (homography decomposition on normalized coordinates), by the supplied
// pose otherwise. Empty on too few correspondences or non-convergence.
std::optional<RigidTransform> LocalizePose(
    const std::vector<Vec3d>& directions, const std::vector<Vec3d>& points,
    const std::optional<RigidTransform>& init = std::nullopt,
    const LocalizeOptions& options = LocalizeOptions());

// Linear pose initialization for planar targets: maps pattern plane
// coordinates to normalized image coordinates with a homography and
// decomposes it. Requires all direction z components positive.
std::optional<RigidTransform> PlanarPoseFromDirections(
    const std::vector<Vec3d>& directions, const std::vector<Vec3d>& points);

}  // namespace calib
