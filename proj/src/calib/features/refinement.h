#pragma once

#include <optional>
#include <vector>

#include "calib/core/lm.h"
#include "calib/core/types.h"
#include "calib/features/homography.h"
#include "calib/imaging/image.h"
#include "calib/pattern/star_pattern.h"

namespace calib {

enum class RefinementVariant {
  kIntensity,
  kGradientMagnitude,
  kGradientXY,
};

std::optional<RefinementVariant> RefinementVariantFromName(
    const std::string& name);
std::string RefinementVariantName(RefinementVariant variant);

struct RefinementConfig {
  int window_half_extent = 10;  // 21x21 window
  // Symmetry refinement draws symmetry_samples_per_pixel times as many
  // random points as window pixels; matching refinement draws one per pixel.
  int symmetry_samples_per_pixel = 8;
  int matching_supersamples = 16;  // rendered subsamples per matching sample
  double matching_max_rms = 0.5;   // accept threshold on affine-corrected RMS
  double background = 1.0;         // pattern value outside the target extent
  RefinementVariant variant = RefinementVariant::kIntensity;
  uint64_t seed = 0;
  LMSettings lm;

  int window_extent() const { return 2 * window_half_extent + 1; }
  int window_pixel_count() const { return window_extent() * window_extent(); }
};

// Deterministic uniform samples over the window footprint, expressed in
// feature-relative pattern space (so mirroring a sample is exact negation).
// h_feature maps feature-relative pattern coordinates to image space.
std::vector<Vec2d> DrawPatternSpaceSamples(const LocalHomography& h_feature,
                                           int window_half_extent, int count,
                                           uint64_t seed);

// Closed-form least-squares init of the affine brightness transform
// q ~ f*p + b. Empty when the sample variance of p is degenerate
// (untextured window).
std::optional<std::pair<double, double>> AffineBrightnessInit(
    const std::vector<double>& p, const std::vector<double>& q);

struct MatchingRefinementResult {
  Vec2d position = Vec2d::Zero();
  double factor = 0.0;  // f; candidates with f <= 0 are rejected
  double bias = 0.0;    // b
  LocalHomography homography;  // input homography shifted by the found offset
};

// Matching-based refinement and validation: renders the ideal pattern
// through the homography with supersampling, then aligns the rendering to
// the image under a 2D shift and an affine brightness transform. Rejects
// candidates whose contrast factor is not positive or which match poorly.
std::optional<MatchingRefinementResult> RefineByMatching(
    const Image& image, const StarPattern& pattern, const Vec2d& pattern_center,
    const LocalHomography& h_feature, const RefinementConfig& config);

struct SymmetryRefinementResult {
  LocalHomography homography;
  Vec2d position = Vec2d::Zero();
  LMReport report;
};

// Symmetry-based refinement: optimizes the 8 free homography entries so
// that pattern-space point pairs mirrored about the feature sample to equal
// values. The per-point value is the raw intensity, the gradient magnitude,
// or the gradient 2-vector, per config.variant.
std::optional<SymmetryRefinementResult> RefineBySymmetry(
    const Image& image, const LocalHomography& h_init,
    const RefinementConfig& config);

// Cost of the symmetry objective at a given homography state, over the
// deterministic sample set of config. Used by tests probing the cost
// surface. Empty if samples leave the image.
std::optional<double> EvaluateSymmetryCost(const Image& image,
                                           const LocalHomography& h,
                                           const std::vector<Vec2d>& samples,
                                           RefinementVariant variant);

}  // namespace calib
