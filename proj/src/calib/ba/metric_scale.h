#pragma once

#include <optional>

#include "calib/ba/problem.h"

namespace calib {

// Scales the calibration into meters as a post-processing step: one uniform
// factor applied to all pose translations, pattern points, rig translations
// and non-central line points, chosen so the median adjacent-feature
// spacing equals the known physical square size. Empty when the pattern
// points span too few squares to measure a spacing.
std::optional<double> ApplyMetricScale(CalibrationProblem* problem,
                                       double physical_square_size);

}  // namespace calib
