#pragma once

#include <array>
#include <optional>
#include <vector>

#include "calib/core/rigid_transform.h"
#include "calib/features/detector.h"
#include "calib/pattern/star_pattern.h"

namespace calib {

// Coarse pinhole stand-in used only during initialization.
struct ProvisionalPinhole {
  double focal = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  Vec2d Project(const Vec3d& p) const {
    return Vec2d(focal * p.x() / p.z() + cx, focal * p.y() / p.z() + cy);
  }
  Vec3d Unproject(const Vec2d& px) const {
    return Vec3d((px.x() - cx) / focal, (px.y() - cy) / focal, 1.0)
        .normalized();
  }
};

struct TripleInit {
  ProvisionalPinhole pinhole;
  std::array<RigidTransform, 3> poses;  // pattern -> camera
  double reprojection_rms = 0.0;
};

// Initial poses for an image triple from planar pattern/image
// correspondences: a coarse 1D search over the provisional focal length
// (principal point at the image center), with each candidate scored by the
// reprojection error of homography-decomposed poses. Empty for degenerate
// feature configurations.
std::optional<TripleInit> InitTriplePoses(
    const std::array<const std::vector<FeatureDetection>*, 3>& detections,
    const StarPattern& pattern, int image_width, int image_height);

// Homography-decomposed pose of one view under a given pinhole.
std::optional<RigidTransform> PoseFromHomography(
    const std::vector<FeatureDetection>& detections, const StarPattern& pattern,
    const ProvisionalPinhole& pinhole);

}  // namespace calib
