#include "calib/features/refinement.h"

#include <cmath>

#include "calib/core/random.h"

namespace calib {

std::optional<RefinementVariant> RefinementVariantFromName(
    const std::string& name) {
  if (name == "intensity") return RefinementVariant::kIntensity;
  if (name == "gradient-magnitude") return RefinementVariant::kGradientMagnitude;
  if (name == "gradient-xy") return RefinementVariant::kGradientXY;
  return std::nullopt;
}

std::string RefinementVariantName(RefinementVariant variant) {
  switch (variant) {
    case RefinementVariant::kIntensity: return "intensity";
    case RefinementVariant::kGradientMagnitude: return "gradient-magnitude";
    case RefinementVariant::kGradientXY: return "gradient-xy";
  }
  return "unknown";
}

std::vector<Vec2d> DrawPatternSpaceSamples(const LocalHomography& h_feature,
                                           int window_half_extent, int count,
                                           uint64_t seed) {
  Rng rng(seed);
  const Vec2d feature = h_feature.FeaturePosition();
  const double extent = window_half_extent + 0.5;
  std::vector<Vec2d> samples;
  samples.reserve(count);
  for (int n = 0; n < count; ++n) {
    const Vec2d offset(rng.Uniform(-extent, extent),
                       rng.Uniform(-extent, extent));
    const auto s = h_feature.ApplyInverse(feature + offset);
    if (s) samples.push_back(*s);
  }
  return samples;
}

std::optional<std::pair<double, double>> AffineBrightnessInit(
    const std::vector<double>& p, const std::vector<double>& q) {
  const size_t count = p.size();
  if (count < 2 || q.size() != count) return std::nullopt;
  const double n = static_cast<double>(count);
  double sum_p = 0, sum_q = 0, sum_pp = 0, sum_qp = 0;
  for (size_t i = 0; i < count; ++i) {
    sum_p += p[i];
    sum_q += q[i];
    sum_pp += p[i] * p[i];
    sum_qp += q[i] * p[i];
  }
  const double denom = sum_pp - sum_p * sum_p / n;
  if (denom < 1e-12) return std::nullopt;  // untextured window
  const double f = (sum_qp - sum_p * sum_q / n) / denom;
  const double b = (sum_q - f * sum_p) / n;
  return std::make_pair(f, b);
}

namespace {

// ---------------------------------------------------------------------------
// Matching-based refinement

struct MatchingProblem {
  const Image* image = nullptr;
  std::vector<Vec2d> positions;  // H(s_i), absolute image coordinates
  std::vector<double> rendered;  // q_i

  Vec2d shift = Vec2d::Zero();
  double factor = 1.0;
  double bias = 0.0;

  struct State {
    Vec2d shift;
    double factor;
    double bias;
  };
  State SaveState() const { return {shift, factor, bias}; }
  void RestoreState(const State& s) {
    shift = s.shift;
    factor = s.factor;
    bias = s.bias;
  }
  int NumParameters() const { return 4; }

  bool EvaluateCost(double* cost) const {
    double sum = 0.0;
    for (size_t i = 0; i < positions.size(); ++i) {
      const auto p = image->BilinearSample(positions[i].x() + shift.x(),
                                           positions[i].y() + shift.y());
      if (!p) return false;
      const double r = factor * *p + bias - rendered[i];
      sum += r * r;
    }
    *cost = sum;
    return true;
  }

  bool EvaluateNormalEquations(MatXd* jtj, VecXd* jtr, double* cost) const {
    jtj->setZero(4, 4);
    jtr->setZero(4);
    double sum = 0.0;
    for (size_t i = 0; i < positions.size(); ++i) {
      const double x = positions[i].x() + shift.x();
      const double y = positions[i].y() + shift.y();
      const auto p = image->BilinearSample(x, y);
      if (!p) return false;
      const auto grad = image->BilinearGradient(x, y);
      const double r = factor * *p + bias - rendered[i];
      sum += r * r;
      Vec4d jac(factor * grad->x(), factor * grad->y(), *p, 1.0);
      *jtj += jac * jac.transpose();
      *jtr += jac * r;
    }
    *cost = sum;
    return true;
  }

  bool ApplyStep(const VecXd& delta) {
    shift += Vec2d(delta[0], delta[1]);
    factor += delta[2];
    bias += delta[3];
    return true;
  }
};

}  // namespace

std::optional<MatchingRefinementResult> RefineByMatching(
    const Image& image, const StarPattern& pattern, const Vec2d& pattern_center,
    const LocalHomography& h_feature, const RefinementConfig& config) {
  const int sample_count = config.window_pixel_count();
  const std::vector<Vec2d> samples = DrawPatternSpaceSamples(
      h_feature, config.window_half_extent, sample_count,
      HashCombine(config.seed, 0x6d617463ULL));
  if (static_cast<int>(samples.size()) < sample_count / 2) return std::nullopt;

  // Render the expected pattern appearance: a supersampled pixel patch
  // around the window, sampled bilinearly at the sample positions, so the
  // prediction goes through the same pixel-integration + interpolation
  // chain as the observed image.
  const int ss = std::max(1, static_cast<int>(std::lround(
                                 std::sqrt(config.matching_supersamples))));
  const Vec2d feature = h_feature.FeaturePosition();
  const int patch_x = static_cast<int>(std::floor(feature.x())) -
                      config.window_half_extent - 2;
  const int patch_y = static_cast<int>(std::floor(feature.y())) -
                      config.window_half_extent - 2;
  const int patch_size = config.window_extent() + 5;
  Image patch(patch_size, patch_size);
  for (int py = 0; py < patch_size; ++py) {
    for (int px = 0; px < patch_size; ++px) {
      double value = 0.0;
      for (int b = 0; b < ss; ++b) {
        for (int a = 0; a < ss; ++a) {
          const Vec2d pos(patch_x + px + (a + 0.5) / ss - 0.5,
                          patch_y + py + (b + 0.5) / ss - 0.5);
          const auto rel = h_feature.ApplyInverse(pos);
          if (!rel) return std::nullopt;
          const auto intensity = pattern.Intensity(pattern_center + *rel);
          value += intensity ? *intensity : config.background;
        }
      }
      patch.set(px, py, static_cast<float>(value / (ss * ss)));
    }
  }

  MatchingProblem problem;
  problem.image = &image;
  problem.positions.reserve(samples.size());
  problem.rendered.reserve(samples.size());
  for (const Vec2d& s : samples) {
    const Vec2d u = h_feature.Apply(s);
    const auto q =
        patch.BilinearSample(u.x() - patch_x, u.y() - patch_y);
    if (!q) return std::nullopt;
    problem.positions.push_back(u);
    problem.rendered.push_back(*q);
  }

  // Closed-form affine brightness initialization at zero shift.
  std::vector<double> observed(problem.positions.size());
  for (size_t i = 0; i < problem.positions.size(); ++i) {
    const auto p = image.BilinearSample(problem.positions[i].x(),
                                        problem.positions[i].y());
    if (!p) return std::nullopt;
    observed[i] = *p;
  }
  const auto init = AffineBrightnessInit(observed, problem.rendered);
  if (!init) return std::nullopt;
  problem.factor = init->first;
  problem.bias = init->second;

  const LMReport report = SolveLevenbergMarquardt(problem, config.lm);
  if (!report.converged || problem.factor <= 0.0) return std::nullopt;
  const double rms =
      std::sqrt(report.final_cost / static_cast<double>(samples.size()));
  if (rms >= config.matching_max_rms) return std::nullopt;

  MatchingRefinementResult result;
  result.factor = problem.factor;
  result.bias = problem.bias;
  result.homography = h_feature.TranslatedBy(problem.shift);
  result.position = result.homography.FeaturePosition();
  return result;
}

namespace {

// ---------------------------------------------------------------------------
// Symmetry-based refinement

// Per-point value of the refinement variant plus its spatial derivative.
// Gradients use central differences with a 1 px step on bilinear samples.
struct VariantValue {
  int dim = 1;
  double value[2];
  Vec2d derivative[2];
};

bool EvalVariant(const Image& image, const Vec2d& u, RefinementVariant variant,
                 VariantValue* out) {
  if (variant == RefinementVariant::kIntensity) {
    const auto v = image.BilinearSample(u.x(), u.y());
    if (!v) return false;
    out->dim = 1;
    out->value[0] = *v;
    out->derivative[0] = *image.BilinearGradient(u.x(), u.y());
    return true;
  }

  const auto xp = image.BilinearSample(u.x() + 1, u.y());
  const auto xm = image.BilinearSample(u.x() - 1, u.y());
  const auto yp = image.BilinearSample(u.x(), u.y() + 1);
  const auto ym = image.BilinearSample(u.x(), u.y() - 1);
  if (!xp || !xm || !yp || !ym) return false;
  const double gx = 0.5 * (*xp - *xm);
  const double gy = 0.5 * (*yp - *ym);
  const Vec2d dgx = 0.5 * (*image.BilinearGradient(u.x() + 1, u.y()) -
                           *image.BilinearGradient(u.x() - 1, u.y()));
  const Vec2d dgy = 0.5 * (*image.BilinearGradient(u.x(), u.y() + 1) -
                           *image.BilinearGradient(u.x(), u.y() - 1));

  if (variant == RefinementVariant::kGradientMagnitude) {
    const double mag = std::hypot(gx, gy);
    out->dim = 1;
    out->value[0] = mag;
    out->derivative[0] =
        mag > 1e-12 ? Vec2d((gx * dgx + gy * dgy) / mag) : Vec2d::Zero();
    return true;
  }

  out->dim = 2;
  out->value[0] = gx;
  out->value[1] = gy;
  out->derivative[0] = dgx;
  out->derivative[1] = dgy;
  return true;
}

struct SymmetryProblem {
  const Image* image = nullptr;
  const std::vector<Vec2d>* samples = nullptr;
  RefinementVariant variant = RefinementVariant::kIntensity;
  LocalHomography h;

  // Intensities and gradient magnitudes are even under point mirroring;
  // the gradient 2-vector is odd, so its symmetry residual is the sum.
  double MirrorSign() const {
    return variant == RefinementVariant::kGradientXY ? 1.0 : -1.0;
  }

  using State = LocalHomography;
  State SaveState() const { return h; }
  void RestoreState(const State& s) { h = s; }
  int NumParameters() const { return 8; }

  bool EvaluateCost(double* cost) const {
    double sum = 0.0;
    const double sign = MirrorSign();
    VariantValue plus, minus;
    for (const Vec2d& s : *samples) {
      if (!EvalVariant(*image, h.Apply(s), variant, &plus) ||
          !EvalVariant(*image, h.Apply(-s), variant, &minus)) {
        return false;
      }
      for (int d = 0; d < plus.dim; ++d) {
        const double r = plus.value[d] + sign * minus.value[d];
        sum += r * r;
      }
    }
    *cost = sum;
    return true;
  }

  bool EvaluateNormalEquations(MatXd* jtj, VecXd* jtr, double* cost) const {
    jtj->setZero(8, 8);
    jtr->setZero(8);
    double sum = 0.0;
    const double sign = MirrorSign();
    VariantValue plus, minus;
    Eigen::Matrix<double, 2, 8> jac_plus, jac_minus;
    for (const Vec2d& s : *samples) {
      const Vec2d up = h.Apply(s);
      const Vec2d um = h.Apply(-s);
      if (!EvalVariant(*image, up, variant, &plus) ||
          !EvalVariant(*image, um, variant, &minus)) {
        return false;
      }
      HomographyPointJacobian(h, s, &jac_plus);
      HomographyPointJacobian(h, -s, &jac_minus);
      for (int d = 0; d < plus.dim; ++d) {
        const double r = plus.value[d] + sign * minus.value[d];
        const Eigen::Matrix<double, 1, 8> row =
            plus.derivative[d].transpose() * jac_plus +
            sign * minus.derivative[d].transpose() * jac_minus;
        sum += r * r;
        *jtj += row.transpose() * row;
        *jtr += row.transpose() * r;
      }
    }
    *cost = sum;
    return true;
  }

  bool ApplyStep(const VecXd& delta) {
    h.H(0, 0) += delta[0];
    h.H(0, 1) += delta[1];
    h.H(0, 2) += delta[2];
    h.H(1, 0) += delta[3];
    h.H(1, 1) += delta[4];
    h.H(1, 2) += delta[5];
    h.H(2, 0) += delta[6];
    h.H(2, 1) += delta[7];
    return h.Invertible();
  }
};

}  // namespace

std::optional<SymmetryRefinementResult> RefineBySymmetry(
    const Image& image, const LocalHomography& h_init,
    const RefinementConfig& config) {
  const int sample_count =
      config.symmetry_samples_per_pixel * config.window_pixel_count();
  const std::vector<Vec2d> samples = DrawPatternSpaceSamples(
      h_init, config.window_half_extent, sample_count,
      HashCombine(config.seed, 0x73796dULL));
  if (static_cast<int>(samples.size()) < sample_count / 2) return std::nullopt;

  SymmetryProblem problem;
  problem.image = &image;
  problem.samples = &samples;
  problem.variant = config.variant;
  problem.h = h_init;

  double initial_cost = 0.0;
  if (!problem.EvaluateCost(&initial_cost)) return std::nullopt;

  const LMReport report = SolveLevenbergMarquardt(problem, config.lm);
  if (report.Diverged() && report.iterations >= config.lm.max_iterations) {
    return std::nullopt;
  }

  SymmetryRefinementResult result;
  result.homography = problem.h;
  result.position = problem.h.FeaturePosition();
  result.report = report;
  return result;
}

std::optional<double> EvaluateSymmetryCost(const Image& image,
                                           const LocalHomography& h,
                                           const std::vector<Vec2d>& samples,
                                           RefinementVariant variant) {
  SymmetryProblem problem;
  problem.image = &image;
  problem.samples = &samples;
  problem.variant = variant;
  problem.h = h;
  double cost = 0.0;
  if (!problem.EvaluateCost(&cost)) return std::nullopt;
  return cost;
}

}  // namespace calib
