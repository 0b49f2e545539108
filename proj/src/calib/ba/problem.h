#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "calib/core/rigid_transform.h"
#include "calib/features/detections_io.h"
#include "calib/models/camera_model.h"
#include "calib/pattern/star_pattern.h"

namespace calib {

// One feature observation: camera/image/point indices plus the detection.
struct Observation {
  int camera = 0;
  int image = 0;
  int point = 0;
  Vec2d detection = Vec2d::Zero();
};

struct ProblemCamera {
  std::unique_ptr<CameraModel> model;
  RigidTransform rig_transform;  // M_c: rig frame -> camera frame
};

struct ProblemImage {
  std::string id;
  int camera = 0;
  RigidTransform pose;  // T_i: global frame -> rig frame
};

// Joint calibration state: cameras with models and rig transforms, images
// with poses, pattern points (one per star feature, initialized planar),
// and the observations connecting them. Single-camera problems keep
// M_0 = identity fixed.
class CalibrationProblem {
 public:
  std::vector<ProblemCamera> cameras;
  std::vector<ProblemImage> images;
  std::vector<Vec3d> points;
  std::vector<std::pair<int, int>> point_squares;  // (i, j) per point
  std::vector<Observation> observations;
  double pattern_square_size = 1.0;  // pattern units, for validation bounds

  CalibrationProblem() = default;
  CalibrationProblem(const CalibrationProblem& other);
  CalibrationProblem& operator=(const CalibrationProblem& other);
  CalibrationProblem(CalibrationProblem&&) = default;
  CalibrationProblem& operator=(CalibrationProblem&&) = default;

  // Assembles a single-camera problem from detections, initial poses, and a
  // camera model. Images without an initial pose are skipped. Pattern
  // points start on the plane z = 0 at their nominal star centers.
  static CalibrationProblem Assemble(
      const DetectionSet& detections, const StarPattern& pattern,
      const std::map<std::string, RigidTransform>& poses,
      std::unique_ptr<CameraModel> model);

  // Pattern points staying within a sanity box around their planar
  // initialization (10x the square size).
  bool PointsWithinBounds() const;
};

// Residuals of all observations at one state, with per-observation validity
// (projection failures yield invalid residuals that contribute nothing).
struct ResidualEvaluation {
  std::vector<Vec2d> values;
  std::vector<uint8_t> valid;
  std::vector<Vec2d> projections;  // warm-start pixels for valid entries
  int valid_count = 0;

  // Total robust cost over the valid residuals.
  double TotalRobustCost() const;
};

// Evaluates all residuals r = project(M_c T_i p_o) - d. hints, when given,
// warm starts the iterative projections (same length as observations).
ResidualEvaluation EvaluateResiduals(const CalibrationProblem& problem,
                                     const std::vector<Vec2d>* hints = nullptr);
// Serial reference implementation; bit-identical to EvaluateResiduals.
ResidualEvaluation EvaluateResidualsSerial(
    const CalibrationProblem& problem,
    const std::vector<Vec2d>* hints = nullptr);

// Validity-aware state comparison: robust costs summed only over residuals
// valid in both states. An empty common set compares as "not better".
struct StateComparison {
  double cost_a = 0.0;
  double cost_b = 0.0;
  int common_count = 0;
  bool b_better = false;
};
StateComparison CompareStates(const ResidualEvaluation& a,
                              const ResidualEvaluation& b);

}  // namespace calib
