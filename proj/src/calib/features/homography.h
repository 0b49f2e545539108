#pragma once

#include <optional>
#include <vector>

#include "calib/core/types.h"

namespace calib {

// Local homography mapping pattern-space points into image space by
// homogeneous multiplication, with H(2,2) fixed to 1.
struct LocalHomography {
  Mat3d H = Mat3d::Identity();

  Vec2d Apply(const Vec2d& p) const {
    const double w = H(2, 0) * p.x() + H(2, 1) * p.y() + H(2, 2);
    return Vec2d((H(0, 0) * p.x() + H(0, 1) * p.y() + H(0, 2)) / w,
                 (H(1, 0) * p.x() + H(1, 1) * p.y() + H(1, 2)) / w);
  }

  std::optional<Vec2d> ApplyInverse(const Vec2d& image_point) const;

  // The estimated feature location for feature-centered homographies.
  Vec2d FeaturePosition() const { return Vec2d(H(0, 2), H(1, 2)); }

  bool Invertible() const { return std::abs(H.determinant()) > 1e-12; }

  // Re-centers the pattern-space origin: result(s) = this(center + s).
  LocalHomography CenteredAt(const Vec2d& center) const;

  // Shifts the image-space output: result(s) = this(s) + offset.
  LocalHomography TranslatedBy(const Vec2d& offset) const;
};

// Least-squares DLT homography from >= 4 pattern/image correspondences,
// with Hartley normalization. Empty for degenerate configurations
// (collinear points, rank deficiency, vanishing H(2,2)).
std::optional<LocalHomography> FitHomography(
    const std::vector<Vec2d>& pattern_points,
    const std::vector<Vec2d>& image_points);

// Jacobian of Apply(s) with respect to the 8 free entries
// (H00 H01 H02 H10 H11 H12 H20 H21), evaluated at pattern point s.
void HomographyPointJacobian(const LocalHomography& h, const Vec2d& s,
                             Eigen::Matrix<double, 2, 8>* jacobian);

}  // namespace calib
