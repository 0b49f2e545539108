// Shared synthetic setups: datasets of exact (or noise-perturbed) feature
// detections projected through a ground-truth camera, without rendering.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "calib/core/random.h"
#include "calib/features/detections_io.h"
#include "calib/models/synthetic_camera.h"
#include "calib/pattern/star_pattern.h"
#include "calib/pattern/view_poses.h"

namespace calib::testing {

struct SyntheticDataset {
  StarPattern pattern{16, 10, 8, 0.04};
  std::unique_ptr<SyntheticCamera> camera;
  std::vector<RigidTransform> poses;
  std::vector<std::string> ids;
  DetectionSet detections;
};

struct DatasetOptions {
  int views = 12;
  int width = 320;
  int height = 240;
  double noise_px = 0.0;
  uint64_t seed = 1;
  bool warped = false;      // adds a non-parametric direction warp
  bool noncentral = false;  // adds line-origin offsets (meters)
  double margin = 13.0;     // detection distance from the border
};

inline SyntheticDataset MakeDataset(const DatasetOptions& options) {
  SyntheticDataset data;
  data.camera = std::make_unique<SyntheticCamera>(
      options.width, options.height, 0.93 * options.width,
      0.925 * options.width, 0.497 * options.width, 0.493 * options.height,
      !options.noncentral);
  if (options.warped) {
    data.camera->radial_k1 = -0.04;
    data.camera->warp_terms.push_back({0.0022, Vec2d(2.3, 1.1), 0.7, 0});
    data.camera->warp_terms.push_back({0.0017, Vec2d(1.2, 2.7), 2.1, 1});
  }
  if (options.noncentral) {
    data.camera->origin_terms.push_back(
        {Vec3d(0.0015, 0.0008, 0.001), Vec2d(1.8, 0.9), 0.4});
    data.camera->origin_terms.push_back(
        {Vec3d(-0.0006, 0.0013, 0.0), Vec2d(0.7, 2.1), 1.9});
  }
  data.poses = GenerateViewPoses(data.pattern, *data.camera, options.views,
                                 options.seed);
  Rng rng(HashCombine(options.seed, 0xda7aULL));
  for (int v = 0; v < options.views; ++v) {
    char id[32];
    std::snprintf(id, sizeof(id), "view_%03d", v);
    data.ids.push_back(id);
    std::vector<FeatureDetection>& list = data.detections[id];
    for (const auto& [i, j] : data.pattern.FeatureSquares()) {
      const Vec2d fp = data.pattern.FeaturePosition(i, j);
      const Vec3d in_camera = data.poses[v] * Vec3d(fp.x(), fp.y(), 0.0);
      const auto px = data.camera->Project(in_camera);
      if (!px) continue;
      if (px->x() < options.margin || px->y() < options.margin ||
          px->x() > options.width - 1 - options.margin ||
          px->y() > options.height - 1 - options.margin) {
        continue;
      }
      FeatureDetection d;
      d.i = i;
      d.j = j;
      d.position = *px;
      if (options.noise_px > 0.0) {
        d.position += options.noise_px * Vec2d(rng.Gaussian(), rng.Gaussian());
      }
      d.validated = true;
      list.push_back(d);
    }
  }
  return data;
}

}  // namespace calib::testing
