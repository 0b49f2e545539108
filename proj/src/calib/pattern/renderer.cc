#include "calib/pattern/renderer.h"

#include <cmath>
#include <stdexcept>

#include "calib/core/parallel.h"
#include "calib/core/random.h"

namespace calib {

namespace {

// Counter-based Gaussian noise: deterministic for any thread count.
double HashGaussian(uint64_t seed, uint64_t index) {
  const uint64_t a = HashCombine(seed, 2 * index);
  const uint64_t b = HashCombine(seed, 2 * index + 1);
  double u1 = static_cast<double>(a >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct RenderContext {
  const StarPattern* pattern;
  const CameraModel* camera;
  RigidTransform camera_from_pattern;
  RigidTransform pattern_from_camera;
  const RenderOptions* options;

  double PixelValue(int x, int y) const {
    const int ss = options->supersampling;
    double sum = 0.0;
    for (int b = 0; b < ss; ++b) {
      for (int a = 0; a < ss; ++a) {
        const Vec2d sample(x + (a + 0.5) / ss - 0.5, y + (b + 0.5) / ss - 0.5);
        sum += SampleValue(sample);
      }
    }
    return sum / (ss * ss);
  }

  double SampleValue(const Vec2d& px) const {
    const auto line = camera->UnprojectLine(px);
    if (!line) return options->background;
    const Vec3d origin = pattern_from_camera * line->origin;
    const Vec3d dir = pattern_from_camera.rotation * line->direction;
    if (std::abs(dir.z()) < 1e-12) return options->background;
    const double t = -origin.z() / dir.z();
    if (t <= 0.0) return options->background;
    const Vec3d p = origin + t * dir;
    const auto value = pattern->Intensity(Vec2d(p.x(), p.y()));
    return value ? *value : options->background;
  }
};

GroundTruthView RenderViewImpl(const StarPattern& pattern,
                               const CameraModel& camera,
                               const RigidTransform& pose,
                               const RenderOptions& options, bool parallel) {
  if (options.supersampling < 1) {
    throw std::invalid_argument("supersampling must be >= 1");
  }
  RenderContext ctx;
  ctx.pattern = &pattern;
  ctx.camera = &camera;
  ctx.camera_from_pattern = pose;
  ctx.pattern_from_camera = pose.Inverse();
  ctx.options = &options;

  // Degenerate if the pattern plane passes through the projection center.
  if (std::abs(ctx.pattern_from_camera.translation.z()) < 1e-9) {
    throw std::invalid_argument("pattern plane through projection center");
  }

  GroundTruthView view;
  view.pose = pose;
  const int w = camera.width();
  const int h = camera.height();
  view.image = Image(w, h);
  Image& img = view.image;

  const auto render_row = [&](int64_t y) {
    for (int x = 0; x < w; ++x) {
      img.set(x, static_cast<int>(y),
              static_cast<float>(ctx.PixelValue(x, static_cast<int>(y))));
    }
  };
  if (parallel) {
    ParallelFor(0, h, render_row);
  } else {
    for (int64_t y = 0; y < h; ++y) render_row(y);
  }

  if (options.blur_sigma > 0.0) {
    img = GaussianBlur(img, options.blur_sigma);
  }
  if (options.noise_sigma > 0.0) {
    const auto noise_row = [&](int64_t y) {
      for (int x = 0; x < w; ++x) {
        const uint64_t index = static_cast<uint64_t>(y) * w + x;
        const double value = img.at(x, static_cast<int>(y)) +
                             options.noise_sigma *
                                 HashGaussian(options.noise_seed, index);
        img.set(x, static_cast<int>(y),
                static_cast<float>(std::clamp(value, 0.0, 1.0)));
      }
    };
    if (parallel) {
      ParallelFor(0, h, noise_row);
    } else {
      for (int64_t y = 0; y < h; ++y) noise_row(y);
    }
  }

  // Exact feature locations via the ground-truth camera's projection.
  const double margin = options.feature_margin;
  for (const auto& [i, j] : pattern.FeatureSquares()) {
    const Vec2d fp = pattern.FeaturePosition(i, j);
    const Vec3d in_camera = pose * Vec3d(fp.x(), fp.y(), 0.0);
    const auto projected = camera.Project(in_camera);
    if (!projected) continue;
    if (projected->x() < margin || projected->y() < margin ||
        projected->x() > w - 1 - margin || projected->y() > h - 1 - margin) {
      continue;
    }
    view.true_features.push_back(TrueFeature{i, j, *projected});
  }
  return view;
}

}  // namespace

GroundTruthView RenderView(const StarPattern& pattern,
                           const CameraModel& camera,
                           const RigidTransform& pose,
                           const RenderOptions& options) {
  return RenderViewImpl(pattern, camera, pose, options, /*parallel=*/true);
}

GroundTruthView RenderViewSerial(const StarPattern& pattern,
                                 const CameraModel& camera,
                                 const RigidTransform& pose,
                                 const RenderOptions& options) {
  return RenderViewImpl(pattern, camera, pose, options, /*parallel=*/false);
}

}  // namespace calib
