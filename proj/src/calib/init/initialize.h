#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calib/features/detections_io.h"
#include "calib/init/grid_fit.h"
#include "calib/init/localize.h"
#include "calib/init/pose_init.h"

namespace calib {

struct InitializeOptions {
  GridFitOptions grid_fit;
  LocalizeOptions localize;
  uint64_t seed = 0;
  int max_rounds = 10;  // localize/extend passes
};

struct InitializationResult {
  CentralGenericModel model;
  std::map<std::string, RigidTransform> poses;  // pattern -> camera
  ProvisionalPinhole pinhole;
  CalibratedArea area;  // bounding rectangle of the feature observations
  double grid_fit_rms = 0.0;
  int64_t per_pixel_count = 0;
};

// Full initialization: dense interpolated matches per image, triple
// selection, provisional poses, per-pixel direction accumulation over all
// localizable images, and the grid-model fit. Images that never localize
// are left out of the result. Empty when no valid triple or fit exists.
std::optional<InitializationResult> InitializeCalibration(
    const DetectionSet& detections, const StarPattern& pattern,
    int image_width, int image_height, const InitializeOptions& options);

// Bounding rectangle of the detections of the given images.
std::optional<CalibratedArea> ObservationBounds(
    const DetectionSet& detections,
    const std::vector<std::string>& image_ids);

}  // namespace calib
