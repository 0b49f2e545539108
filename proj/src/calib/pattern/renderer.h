#pragma once

#include <cstdint>
#include <vector>

#include "calib/core/rigid_transform.h"
#include "calib/imaging/image.h"
#include "calib/models/camera_model.h"
#include "calib/pattern/star_pattern.h"

namespace calib {

struct TrueFeature {
  int i = 0;
  int j = 0;
  Vec2d position = Vec2d::Zero();  // exact subpixel image coordinate
};

// A rendered view of the pattern with exact ground-truth feature locations.
struct GroundTruthView {
  Image image;
  RigidTransform pose;  // pattern -> camera
  std::vector<TrueFeature> true_features;
};

struct RenderOptions {
  int supersampling = 4;     // NxN ray samples per pixel
  double blur_sigma = 0.0;   // px
  double noise_sigma = 0.0;  // intensity units
  uint64_t noise_seed = 0;
  // Features are listed only if at least this far from the image border
  // (half a refinement window).
  double feature_margin = 12.0;
  double background = 1.0;   // intensity outside the pattern extent
};

// Renders the pattern through the camera. Each pixel is the mean of
// supersampling^2 un-projected ray samples intersected with the pattern
// plane, followed by optional Gaussian blur and additive Gaussian noise.
// Throws std::invalid_argument for poses with the pattern plane through the
// projection center.
GroundTruthView RenderView(const StarPattern& pattern,
                           const CameraModel& camera,
                           const RigidTransform& pose,
                           const RenderOptions& options);

// Serial reference implementation; bit-identical to RenderView.
GroundTruthView RenderViewSerial(const StarPattern& pattern,
                                 const CameraModel& camera,
                                 const RigidTransform& pose,
                                 const RenderOptions& options);

}  // namespace calib
