#include "calib/features/detector.h"

#include <algorithm>
#include <map>
#include <set>

#include "calib/core/parallel.h"
#include "calib/core/random.h"

namespace calib {

namespace {

struct Correspondence {
  Vec2d pattern;
  Vec2d image;
};

// Homography from the correspondences closest to the query in pattern space.
std::optional<LocalHomography> LocalHomographyNear(
    const std::vector<Correspondence>& correspondences, const Vec2d& query,
    int neighbor_count) {
  std::vector<int> order(correspondences.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  const int use = std::min<int>(neighbor_count, order.size());
  std::partial_sort(order.begin(), order.begin() + use, order.end(),
                    [&](int a, int b) {
                      const double da =
                          (correspondences[a].pattern - query).squaredNorm();
                      const double db =
                          (correspondences[b].pattern - query).squaredNorm();
                      if (da != db) return da < db;
                      return a < b;
                    });
  std::vector<Vec2d> pattern_points, image_points;
  pattern_points.reserve(use);
  image_points.reserve(use);
  for (int k = 0; k < use; ++k) {
    pattern_points.push_back(correspondences[order[k]].pattern);
    image_points.push_back(correspondences[order[k]].image);
  }
  return FitHomography(pattern_points, image_points);
}

}  // namespace

std::vector<FeatureDetection> DetectFeatures(
    const Image& image, const StarPattern& pattern,
    const std::vector<SeedCorrespondence>& seeds,
    const DetectorConfig& config) {
  std::vector<FeatureDetection> detections;
  if (seeds.size() < 4) return detections;

  std::vector<Correspondence> correspondences;
  correspondences.reserve(seeds.size());
  std::vector<Vec2d> seed_pattern, seed_image;
  for (const SeedCorrespondence& s : seeds) {
    correspondences.push_back({s.pattern_point, s.image_point});
    seed_pattern.push_back(s.pattern_point);
    seed_image.push_back(s.image_point);
  }
  if (!FitHomography(seed_pattern, seed_image)) {
    return detections;  // degenerate seed configuration
  }

  // Margin keeping the refinement window and its gradient probes inside the
  // image.
  const double margin = config.refinement.window_half_extent + 2.5;
  const double max_x = image.width() - 1 - margin;
  const double max_y = image.height() - 1 - margin;

  enum class SquareState { kUntried, kQueued, kFailed, kDetected };
  std::map<std::pair<int, int>, SquareState> states;

  std::vector<std::pair<int, int>> frontier;
  const auto enqueue = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= pattern.squares_x() || j >= pattern.squares_y())
      return;
    if (pattern.IsFiducialSquare(i, j)) return;
    auto [it, inserted] = states.emplace(std::make_pair(i, j),
                                         SquareState::kQueued);
    if (inserted) frontier.emplace_back(i, j);
  };

  // Start from the squares around the seed correspondences.
  for (const SeedCorrespondence& s : seeds) {
    const int i = static_cast<int>(s.pattern_point.x() / pattern.square_size());
    const int j = static_cast<int>(s.pattern_point.y() / pattern.square_size());
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) enqueue(i + di, j + dj);
    }
  }

  struct CandidateResult {
    bool success = false;
    FeatureDetection detection;
  };

  while (!frontier.empty()) {
    std::sort(frontier.begin(), frontier.end(),
              [](const auto& a, const auto& b) {
                return std::tie(a.second, a.first) < std::tie(b.second, b.first);
              });
    std::vector<std::pair<int, int>> round = std::move(frontier);
    frontier.clear();
    std::vector<CandidateResult> results(round.size());

    ParallelFor(0, static_cast<int64_t>(round.size()), [&](int64_t k) {
      const auto [i, j] = round[k];
      const Vec2d center = pattern.FeaturePosition(i, j);
      const auto h_local = LocalHomographyNear(
          correspondences, center, config.local_homography_neighbors);
      if (!h_local) return;

      const LocalHomography h_feature = h_local->CenteredAt(center);
      const Vec2d predicted = h_feature.FeaturePosition();
      if (predicted.x() < margin || predicted.y() < margin ||
          predicted.x() > max_x || predicted.y() > max_y) {
        return;
      }

      RefinementConfig refinement = config.refinement;
      refinement.seed = HashCombine(
          config.refinement.seed,
          HashCombine(static_cast<uint64_t>(i) * 0x9e3779b9ULL,
                      static_cast<uint64_t>(j)));

      const auto matched =
          RefineByMatching(image, pattern, center, h_feature, refinement);
      if (!matched) return;

      const auto refined =
          RefineBySymmetry(image, matched->homography, refinement);
      if (!refined) return;

      const Vec2d position = refined->position;
      if (position.x() < margin || position.y() < margin ||
          position.x() > max_x || position.y() > max_y) {
        return;
      }
      // Guard against refinement drifting to a neighboring feature.
      if ((position - matched->position).norm() >
          0.75 * config.refinement.window_half_extent) {
        return;
      }

      results[k].success = true;
      results[k].detection =
          FeatureDetection{i, j, position, refined->homography, true};
    });

    // Deterministic merge in candidate order.
    for (size_t k = 0; k < round.size(); ++k) {
      const auto [i, j] = round[k];
      if (!results[k].success) {
        states[{i, j}] = SquareState::kFailed;
        continue;
      }
      states[{i, j}] = SquareState::kDetected;
      detections.push_back(results[k].detection);
      correspondences.push_back(
          {pattern.FeaturePosition(i, j), results[k].detection.position});
      enqueue(i - 1, j);
      enqueue(i + 1, j);
      enqueue(i, j - 1);
      enqueue(i, j + 1);
    }
  }
  return detections;
}

}  // namespace calib
