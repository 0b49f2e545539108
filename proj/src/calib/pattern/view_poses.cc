#include "calib/pattern/view_poses.h"

#include <cmath>

namespace calib {

std::vector<RigidTransform> GenerateViewPoses(const StarPattern& pattern,
                                              const CameraModel& camera,
                                              int count, uint64_t seed,
                                              const ViewPoseOptions& options) {
  Rng rng(HashCombine(seed, 0x76696577ULL));
  std::vector<RigidTransform> poses;
  poses.reserve(count);

  const int w = camera.width();
  const int h = camera.height();
  const Vec3d pattern_center(0.5 * pattern.extent_x(), 0.5 * pattern.extent_y(),
                             0.0);

  // Distance at which the pattern roughly fills the image, assuming the
  // center pixel's angular resolution is representative.
  const auto c0 = camera.UnprojectDirection(Vec2d(0.5 * (w - 1), 0.5 * (h - 1)));
  const auto c1 =
      camera.UnprojectDirection(Vec2d(0.5 * (w - 1) + 1.0, 0.5 * (h - 1)));
  double focal = 600.0;
  if (c0 && c1) {
    const double angle_per_px = std::acos(std::clamp(c0->dot(*c1), -1.0, 1.0));
    if (angle_per_px > 1e-9) focal = 1.0 / angle_per_px;
  }
  const double fill_distance =
      std::max(pattern.extent_x() * focal / w, pattern.extent_y() * focal / h);

  const double deg = M_PI / 180.0;
  for (int v = 0; v < count; ++v) {
    // 3x3 grid of image targets with jitter; pushes detections into the
    // corners so the whole area gets constrained.
    const int cell = v % 9;
    const double tx = 0.18 + 0.32 * (cell % 3) + rng.Uniform(-0.06, 0.06);
    const double ty = 0.18 + 0.32 * (cell / 3) + rng.Uniform(-0.06, 0.06);
    const Vec2d target(tx * (w - 1), ty * (h - 1));
    const auto ray = camera.UnprojectDirection(target);
    const Vec3d view_ray = ray ? *ray : Vec3d::UnitZ();

    const double distance =
        fill_distance * rng.Uniform(options.distance_min_factor,
                                    options.distance_max_factor);
    const double yaw = rng.Uniform(-options.max_tilt_deg, options.max_tilt_deg) * deg;
    const double pitch =
        rng.Uniform(-options.max_tilt_deg, options.max_tilt_deg) * deg;
    const double roll =
        rng.Uniform(-options.max_roll_deg, options.max_roll_deg) * deg;

    const Mat3d rotation = RotationExp(Vec3d(0, 0, roll)) *
                           RotationExp(Vec3d(0, yaw, 0)) *
                           RotationExp(Vec3d(pitch, 0, 0));
    RigidTransform pose;
    pose.rotation = Quatd(rotation);
    pose.translation = distance * view_ray - rotation * pattern_center;
    poses.push_back(pose);
  }
  return poses;
}

}  // namespace calib
