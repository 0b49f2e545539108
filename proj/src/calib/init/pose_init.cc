#include "calib/init/pose_init.h"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "calib/features/homography.h"

namespace calib {

std::optional<RigidTransform> PoseFromHomography(
    const std::vector<FeatureDetection>& detections, const StarPattern& pattern,
    const ProvisionalPinhole& pinhole) {
  if (detections.size() < 4) return std::nullopt;
  std::vector<Vec2d> plane_points, image_points;
  plane_points.reserve(detections.size());
  image_points.reserve(detections.size());
  for (const FeatureDetection& d : detections) {
    plane_points.push_back(pattern.FeaturePosition(d.i, d.j));
    image_points.push_back(d.position);
  }
  const auto h = FitHomography(plane_points, image_points);
  if (!h) return std::nullopt;

  // A = K^-1 H ~ [r1 r2 t].
  Mat3d k_inv = Mat3d::Identity();
  k_inv(0, 0) = 1.0 / pinhole.focal;
  k_inv(1, 1) = 1.0 / pinhole.focal;
  k_inv(0, 2) = -pinhole.cx / pinhole.focal;
  k_inv(1, 2) = -pinhole.cy / pinhole.focal;
  const Mat3d a = k_inv * h->H;

  Vec3d a1 = a.col(0);
  Vec3d a2 = a.col(1);
  Vec3d a3 = a.col(2);
  const double lambda = 2.0 / (a1.norm() + a2.norm());
  Vec3d r1 = lambda * a1;
  Vec3d r2 = lambda * a2;
  Vec3d t = lambda * a3;
  if (t.z() < 0.0) {
    r1 = -r1;
    r2 = -r2;
    t = -t;
  }
  Mat3d r;
  r.col(0) = r1;
  r.col(1) = r2;
  r.col(2) = r1.cross(r2);
  const Eigen::JacobiSVD<Mat3d> svd(r, Eigen::ComputeFullU |
                                           Eigen::ComputeFullV);
  Mat3d rotation = svd.matrixU() * svd.matrixV().transpose();
  if (rotation.determinant() < 0.0) {
    Mat3d flip = Mat3d::Identity();
    flip(2, 2) = -1.0;
    rotation = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return RigidTransform::FromMatrix(rotation, t);
}

std::optional<TripleInit> InitTriplePoses(
    const std::array<const std::vector<FeatureDetection>*, 3>& detections,
    const StarPattern& pattern, int image_width, int image_height) {
  for (const auto* list : detections) {
    if (!list || list->size() < 20) return std::nullopt;
  }

  const double base = std::max(image_width, image_height);
  ProvisionalPinhole pinhole;
  pinhole.cx = 0.5 * (image_width - 1);
  pinhole.cy = 0.5 * (image_height - 1);

  std::optional<TripleInit> best;
  // Coarse geometric sweep over the focal length, then two refinement
  // sweeps around the best candidate.
  std::vector<double> factors;
  for (int step = 0; step < 48; ++step) {
    factors.push_back(0.3 * std::pow(3.0 / 0.3, step / 47.0));
  }
  double best_factor = 1.0;
  for (int level = 0; level < 3; ++level) {
    if (level > 0) {
      const double half_range = std::pow(3.0 / 0.3, 1.0 / 47.0) *
                                std::pow(0.12, level - 1);
      factors.clear();
      for (int step = 0; step < 16; ++step) {
        factors.push_back(best_factor *
                          std::pow(half_range, -1.0 + 2.0 * step / 15.0));
      }
    }
    for (const double factor : factors) {
      ProvisionalPinhole candidate = pinhole;
      candidate.focal = factor * base;

      std::array<RigidTransform, 3> poses;
      double error_sum = 0.0;
      int error_count = 0;
      bool valid = true;
      for (int v = 0; v < 3 && valid; ++v) {
        const auto pose =
            PoseFromHomography(*detections[v], pattern, candidate);
        if (!pose) {
          valid = false;
          break;
        }
        poses[v] = *pose;
        for (const FeatureDetection& d : *detections[v]) {
          const Vec2d fp = pattern.FeaturePosition(d.i, d.j);
          const Vec3d in_camera = *pose * Vec3d(fp.x(), fp.y(), 0.0);
          if (in_camera.z() < 1e-9) {
            valid = false;
            break;
          }
          error_sum +=
              (candidate.Project(in_camera) - d.position).squaredNorm();
          ++error_count;
        }
      }
      if (!valid || error_count == 0) continue;

      const double rms = std::sqrt(error_sum / error_count);
      if (!best || rms < best->reprojection_rms) {
        best = TripleInit{candidate, poses, rms};
        best_factor = factor;
      }
    }
  }
  return best;
}

}  // namespace calib
