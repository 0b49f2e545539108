#include "calib/models/parametric_fit.h"

#include <Eigen/SVD>
#include <algorithm>

#include "calib/core/parallel.h"
#include "calib/core/rigid_transform.h"

namespace calib {

double DeviationMap::MaxMagnitude() const {
  double max = 0.0;
  for (size_t k = 0; k < delta_px.size(); ++k) {
    if (valid[k]) max = std::max(max, static_cast<double>(delta_px[k].norm()));
  }
  return max;
}

double DeviationMap::MedianMagnitude() const {
  std::vector<double> norms;
  for (size_t k = 0; k < delta_px.size(); ++k) {
    if (valid[k]) norms.push_back(delta_px[k].norm());
  }
  if (norms.empty()) return 0.0;
  std::sort(norms.begin(), norms.end());
  return norms[norms.size() / 2];
}

namespace {

// Pinhole least squares over sampled directions: u = fx dx/dz + cx.
bool InitPinholeFromDirections(const CentralGenericModel& target,
                               ParametricCameraModel* model) {
  double sxx = 0, sx1 = 0, s11 = 0, sxu = 0, s1u = 0;
  double syy = 0, sy1 = 0, syv = 0, s1v = 0;
  int count = 0;
  for (int gy = 0; gy < 20; ++gy) {
    for (int gx = 0; gx < 20; ++gx) {
      const Vec2d px(
          target.area().min_x + (gx + 0.5) / 20.0 * target.area().width(),
          target.area().min_y + (gy + 0.5) / 20.0 * target.area().height());
      const auto dir = target.UnprojectDirection(px);
      if (!dir || dir->z() < 1e-6) continue;
      const double mx = dir->x() / dir->z();
      const double my = dir->y() / dir->z();
      sxx += mx * mx;
      sx1 += mx;
      s11 += 1.0;
      sxu += mx * px.x();
      s1u += px.x();
      syy += my * my;
      sy1 += my;
      syv += my * px.y();
      s1v += px.y();
      ++count;
    }
  }
  if (count < 16) return false;
  const double det_x = sxx * s11 - sx1 * sx1;
  const double det_y = syy * s11 - sy1 * sy1;
  if (std::abs(det_x) < 1e-12 || std::abs(det_y) < 1e-12) return false;
  auto& p = model->mutable_params();
  p[0] = (sxu * s11 - sx1 * s1u) / det_x;   // fx
  p[2] = (sxx * s1u - sx1 * sxu) / det_x;   // cx
  p[1] = (syv * s11 - sy1 * s1v) / det_y;   // fy
  p[3] = (syy * s1v - sy1 * syv) / det_y;   // cy
  return p[0] > 0 && p[1] > 0;
}

struct FitProblem {
  std::vector<Vec2d> pixels;
  std::vector<Vec3d> generic_dirs;
  ParametricCameraModel* model;
  Quatd rotation = Quatd::Identity();

  struct State {
    std::vector<double> params;
    Quatd rotation;
  };
  State SaveState() const { return {model->params(), rotation}; }
  void RestoreState(const State& s) {
    model->mutable_params() = s.params;
    rotation = s.rotation;
  }
  int NumParameters() const { return model->NumParams() + 3; }

  bool ResidualAt(size_t k, Vec3d* r) const {
    const auto dir = model->UnprojectDirection(pixels[k]);
    if (!dir) return false;
    *r = *dir - rotation * generic_dirs[k];
    return true;
  }

  bool EvaluateCost(double* cost) const {
    double sum = 0.0;
    Vec3d r;
    for (size_t k = 0; k < pixels.size(); ++k) {
      if (!ResidualAt(k, &r)) return false;
      sum += r.squaredNorm();
    }
    *cost = sum;
    return true;
  }

  bool EvaluateNormalEquations(MatXd* jtj, VecXd* jtr, double* cost) const {
    const int np = model->NumParams();
    const int n = np + 3;
    jtj->setZero(n, n);
    jtr->setZero(n);
    double sum = 0.0;

    std::vector<double>& params = model->mutable_params();
    MatXd jac(3, n);
    Vec3d r;
    for (size_t k = 0; k < pixels.size(); ++k) {
      if (!ResidualAt(k, &r)) return false;
      sum += r.squaredNorm();

      // Parametric columns by central finite differences through the
      // un-projection. For the radial spline only the four control values
      // supporting this pixel's radius have nonzero columns.
      int spline_lo = 0, spline_hi = -1;
      if (model->kind() == CameraModelKind::kCentralRadial) {
        const Vec3d dir = r + rotation * generic_dirs[k];  // unprojected
        if (dir.z() > 1e-9) {
          const double radius = std::hypot(dir.x() / dir.z(),
                                           dir.y() / dir.z());
          const int size = model->radial_spline_size();
          const double u =
              1.0 + (radius / model->max_radius()) * (size - 3);
          int i = std::clamp(static_cast<int>(u), 1, size - 3);
          spline_lo = 8 + (i - 1);
          spline_hi = 8 + (i + 2);
        }
      }
      for (int a = 0; a < np; ++a) {
        if (model->kind() == CameraModelKind::kCentralRadial && a >= 8 &&
            (a < spline_lo || a > spline_hi)) {
          jac.col(a).setZero();
          continue;
        }
        const double saved = params[a];
        const double h = 1e-7 * std::max(1.0, std::abs(saved));
        params[a] = saved + h;
        const auto plus = model->UnprojectDirection(pixels[k]);
        params[a] = saved - h;
        const auto minus = model->UnprojectDirection(pixels[k]);
        params[a] = saved;
        if (!plus || !minus) return false;
        jac.col(a) = (*plus - *minus) / (2.0 * h);
      }
      // Rotation columns: r = dir - exp(w) R g, so dr/dw = skew(R g).
      const Vec3d rotated = rotation * generic_dirs[k];
      jac.block<3, 3>(0, np) = SkewMatrix(rotated);

      *jtj += jac.transpose() * jac;
      *jtr += jac.transpose() * r;
    }
    *cost = sum;
    return true;
  }

  bool ApplyStep(const VecXd& delta) {
    auto& params = model->mutable_params();
    for (int a = 0; a < model->NumParams(); ++a) params[a] += delta[a];
    if (params[0] <= 0.0 || params[1] <= 0.0) return false;  // fx, fy > 0
    const int np = model->NumParams();
    const Vec3d w(delta[np], delta[np + 1], delta[np + 2]);
    rotation = (Quatd(RotationExp(w)) * rotation).normalized();
    return true;
  }
};

}  // namespace

std::optional<ParametricFitResult> FitParametricToGeneric(
    const CentralGenericModel& target, CameraModelKind variant,
    const ParametricFitOptions& options) {
  if (!target.area().Valid()) return std::nullopt;

  ParametricCameraModel model(variant, target.width(), target.height(),
                              target.area());
  if (!InitPinholeFromDirections(target, &model)) return std::nullopt;
  if (variant == CameraModelKind::kCentralRadial) {
    const double rx = std::max(model.cx() - target.area().min_x,
                               target.area().max_x - model.cx()) /
                      model.fx();
    const double ry = std::max(model.cy() - target.area().min_y,
                               target.area().max_y - model.cy()) /
                      model.fy();
    model.set_max_radius(1.1 * std::sqrt(rx * rx + ry * ry));
  }

  FitProblem problem;
  problem.model = &model;
  for (int gy = 0; gy < options.sample_grid_y; ++gy) {
    for (int gx = 0; gx < options.sample_grid_x; ++gx) {
      const Vec2d px(target.area().min_x + (gx + 0.5) /
                         options.sample_grid_x * target.area().width(),
                     target.area().min_y + (gy + 0.5) /
                         options.sample_grid_y * target.area().height());
      const auto dir = target.UnprojectDirection(px);
      if (!dir) continue;
      problem.pixels.push_back(px);
      problem.generic_dirs.push_back(*dir);
    }
  }
  if (problem.pixels.size() < 32) return std::nullopt;

  const LMReport report = SolveLevenbergMarquardt(problem, options.lm);
  if (report.Diverged()) return std::nullopt;

  ParametricFitResult result{std::move(model),
                             problem.rotation.toRotationMatrix(), 0.0, report};
  result.rms_angle_rad =
      std::sqrt(report.final_cost /
                static_cast<double>(problem.pixels.size()));
  return result;
}

DeviationMap ComputeDeviationMap(const CentralGenericModel& reference,
                                 const CameraModel& other,
                                 const Mat3d& rotation) {
  DeviationMap map;
  map.width = reference.width();
  map.height = reference.height();
  map.delta_px.assign(static_cast<size_t>(map.width) * map.height,
                      Eigen::Vector2f::Zero());
  map.valid.assign(map.delta_px.size(), 0);

  ParallelFor(0, map.height, [&](int64_t y) {
    Vec2d hint(std::numeric_limits<double>::quiet_NaN(), 0.0);
    for (int x = 0; x < map.width; ++x) {
      const Vec2d px(x, y);
      const auto dir = reference.UnprojectDirection(px);
      if (!dir) continue;
      const Vec3d rotated = rotation * *dir;
      const Vec2d* hint_ptr = hint.allFinite() ? &hint : nullptr;
      const auto projected = other.Project(rotated, hint_ptr);
      if (!projected) continue;
      hint = *projected;
      const size_t idx = static_cast<size_t>(y) * map.width + x;
      map.delta_px[idx] = (*projected - px).cast<float>();
      map.valid[idx] = 1;
    }
  });
  return map;
}

std::optional<Mat3d> AlignDirectionFields(const CentralGenericModel& reference,
                                          const CameraModel& other,
                                          int samples_x, int samples_y) {
  Mat3d covariance = Mat3d::Zero();
  int count = 0;
  for (int gy = 0; gy < samples_y; ++gy) {
    for (int gx = 0; gx < samples_x; ++gx) {
      const Vec2d px(
          reference.area().min_x + (gx + 0.5) / samples_x *
              reference.area().width(),
          reference.area().min_y + (gy + 0.5) / samples_y *
              reference.area().height());
      const auto a = reference.UnprojectDirection(px);
      const auto b = other.UnprojectDirection(px);
      if (!a || !b) continue;
      covariance += *b * a->transpose();
      ++count;
    }
  }
  if (count < 9) return std::nullopt;
  const Eigen::JacobiSVD<Mat3d> svd(covariance, Eigen::ComputeFullU |
                                                    Eigen::ComputeFullV);
  Mat3d rotation = svd.matrixU() * svd.matrixV().transpose();
  if (rotation.determinant() < 0.0) {
    Mat3d flip = Mat3d::Identity();
    flip(2, 2) = -1.0;
    rotation = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return rotation;
}

}  // namespace calib
