#pragma once

#include <vector>

#include "calib/features/refinement.h"

namespace calib {

// A validated star-center detection. position is (H(0,2), H(1,2)) of the
// symmetry-refined homography.
struct FeatureDetection {
  int i = 0;
  int j = 0;
  Vec2d position = Vec2d::Zero();
  LocalHomography homography;
  bool validated = false;
};

// Pattern/image correspondence used to bootstrap detection (from synthetic
// ground truth or an external seed file standing in for fiducial corners).
struct SeedCorrespondence {
  Vec2d pattern_point = Vec2d::Zero();  // absolute pattern coordinates
  Vec2d image_point = Vec2d::Zero();
};

struct DetectorConfig {
  RefinementConfig refinement;
  // Number of nearest correspondences used for each local homography.
  int local_homography_neighbors = 12;
};

// Detects star features by homography growing: estimate a local homography
// from the nearest known correspondences, predict adjacent star centers,
// refine each prediction (matching validation, then symmetry refinement),
// and repeat with the accepted features as new correspondences. Candidates
// within one growth front are refined in parallel; results are merged in a
// fixed order, so the output is independent of the thread count.
std::vector<FeatureDetection> DetectFeatures(
    const Image& image, const StarPattern& pattern,
    const std::vector<SeedCorrespondence>& seeds, const DetectorConfig& config);

}  // namespace calib
