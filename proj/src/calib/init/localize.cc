#include "calib/init/localize.h"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "calib/features/homography.h"

namespace calib {

std::optional<RigidTransform> PlanarPoseFromDirections(
    const std::vector<Vec3d>& directions, const std::vector<Vec3d>& points) {
  const size_t n = directions.size();
  if (n < 4 || points.size() != n) return std::nullopt;

  std::vector<Vec2d> plane_points, normalized;
  plane_points.reserve(n);
  normalized.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    if (std::abs(points[k].z()) > 1e-9) return std::nullopt;  // not planar
    if (directions[k].z() < 1e-6) return std::nullopt;        // behind/parallel
    plane_points.emplace_back(points[k].x(), points[k].y());
    normalized.emplace_back(directions[k].x() / directions[k].z(),
                            directions[k].y() / directions[k].z());
  }
  const auto h = FitHomography(plane_points, normalized);
  if (!h) return std::nullopt;

  // H ~ [r1 r2 t] for K = I.
  Vec3d a1 = h->H.col(0);
  Vec3d a2 = h->H.col(1);
  Vec3d a3 = h->H.col(2);
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

  // Project onto SO(3).
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

namespace {

struct PoseProblem {
  const std::vector<Vec3d>* directions;
  const std::vector<Vec3d>* points;
  RigidTransform pose;

  using State = RigidTransform;
  State SaveState() const { return pose; }
  void RestoreState(const State& s) { pose = s; }
  int NumParameters() const { return 6; }

  bool EvaluateCost(double* cost) const {
    double sum = 0.0;
    for (size_t k = 0; k < points->size(); ++k) {
      const Vec3d x = pose * (*points)[k];
      const double norm = x.norm();
      if (norm < 1e-12) return false;
      sum += (x / norm - (*directions)[k]).squaredNorm();
    }
    *cost = sum;
    return true;
  }

  bool EvaluateNormalEquations(MatXd* jtj, VecXd* jtr, double* cost) const {
    jtj->setZero(6, 6);
    jtr->setZero(6);
    double sum = 0.0;
    for (size_t k = 0; k < points->size(); ++k) {
      const Vec3d rotated = pose.rotation * (*points)[k];
      const Vec3d x = rotated + pose.translation;
      const double norm = x.norm();
      if (norm < 1e-12) return false;
      const Vec3d u = x / norm;
      const Vec3d r = u - (*directions)[k];
      sum += r.squaredNorm();
      const Mat3d dnorm = (Mat3d::Identity() - u * u.transpose()) / norm;
      // Update convention: X(delta) = exp(dw) (R p) + t + dt, so the
      // rotation block differentiates the rotated point only.
      Eigen::Matrix<double, 3, 6> jac;
      jac.leftCols<3>() = dnorm * -SkewMatrix(rotated);
      jac.rightCols<3>() = dnorm;
      *jtj += jac.transpose() * jac;
      *jtr += jac.transpose() * r;
    }
    *cost = sum;
    return true;
  }

  bool ApplyStep(const VecXd& delta) {
    pose = ApplyPoseUpdate(pose, Vec3d(delta[0], delta[1], delta[2]),
                           Vec3d(delta[3], delta[4], delta[5]));
    return true;
  }
};

}  // namespace

std::optional<RigidTransform> LocalizePose(
    const std::vector<Vec3d>& directions, const std::vector<Vec3d>& points,
    const std::optional<RigidTransform>& init, const LocalizeOptions& options) {
  if (static_cast<int>(directions.size()) < options.min_correspondences ||
      directions.size() != points.size()) {
    return std::nullopt;
  }

  PoseProblem problem;
  problem.directions = &directions;
  problem.points = &points;
  if (init) {
    problem.pose = *init;
  } else if (const auto planar = PlanarPoseFromDirections(directions, points)) {
    problem.pose = *planar;
  }

  const LMReport report = SolveLevenbergMarquardt(problem, options.lm);
  if (!report.converged) return std::nullopt;
  return problem.pose;
}

}  // namespace calib
