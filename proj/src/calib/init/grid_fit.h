#pragma once

#include <optional>

#include "calib/core/lm.h"
#include "calib/init/per_pixel_directions.h"
#include "calib/models/central_generic.h"
#include "calib/models/noncentral_generic.h"

namespace calib {

struct GridFitOptions {
  double cell_px = 10.0;      // grid resolution in pixels per cell
  int pixel_stride = 2;       // residual subsampling
  double min_coverage = 0.5;  // required defined fraction of the area
  LMSettings lm = {.max_iterations = 25};
};

struct GridFitResult {
  CentralGenericModel model;
  double angular_rms = 0.0;  // radians, over the fitted pixels
  int iterations = 0;
};

// Fits the generic grid model to a per-pixel direction field: control
// points start from their nearest defined pixel direction (undefined ones
// are guessed from neighbors), then Levenberg-Marquardt with tangent-space
// updates minimizes the per-pixel direction mismatch. Control points
// without any supporting pixel stay frozen at their initial values.
// Empty when the field covers less than min_coverage of the area.
std::optional<GridFitResult> FitGridToDirections(
    const PerPixelDirections& field, int image_width, int image_height,
    const CalibratedArea& area, const GridFitOptions& options);

// Non-central model seeded from a central fit: line points start at the
// origin (a central camera is assumed during initialization).
NoncentralGenericModel NoncentralFromCentral(const CentralGenericModel& model);

}  // namespace calib
