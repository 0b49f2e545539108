#include "calib/init/dense_matches.h"

#include <algorithm>
#include <map>

#include "calib/features/homography.h"

namespace calib {

int64_t DenseMatchMap::defined_count() const {
  int64_t count = 0;
  for (uint8_t d : defined_) count += d;
  return count;
}

namespace {

bool InsideConvexQuad(const Vec2d corners[4], const Vec2d& p) {
  // Corner order: (i,j), (i+1,j), (i+1,j+1), (i,j+1) — a consistent winding
  // in pattern space; the image quad preserves or flips it uniformly.
  double reference = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Vec2d a = corners[k];
    const Vec2d b = corners[(k + 1) % 4];
    const double cross =
        (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (k == 0) {
      reference = cross;
    } else if (cross * reference < 0.0) {
      return false;
    }
  }
  return true;
}

}  // namespace

DenseMatchMap InterpolateDenseMatches(
    const std::vector<FeatureDetection>& detections, const StarPattern& pattern,
    int width, int height) {
  DenseMatchMap map(width, height);
  std::map<std::pair<int, int>, Vec2d> by_square;
  for (const FeatureDetection& d : detections) {
    by_square[{d.i, d.j}] = d.position;
  }

  for (const auto& [square, position] : by_square) {
    const auto [i, j] = square;
    const auto c10 = by_square.find({i + 1, j});
    const auto c01 = by_square.find({i, j + 1});
    const auto c11 = by_square.find({i + 1, j + 1});
    if (c10 == by_square.end() || c01 == by_square.end() ||
        c11 == by_square.end()) {
      continue;
    }

    const std::vector<Vec2d> pattern_corners = {
        pattern.FeaturePosition(i, j), pattern.FeaturePosition(i + 1, j),
        pattern.FeaturePosition(i + 1, j + 1), pattern.FeaturePosition(i, j + 1)};
    const std::vector<Vec2d> image_corners = {position, c10->second,
                                              c11->second, c01->second};
    const auto h = FitHomography(pattern_corners, image_corners);
    if (!h) continue;

    Vec2d quad[4] = {image_corners[0], image_corners[1], image_corners[2],
                     image_corners[3]};
    double min_x = quad[0].x(), max_x = quad[0].x();
    double min_y = quad[0].y(), max_y = quad[0].y();
    for (int k = 1; k < 4; ++k) {
      min_x = std::min(min_x, quad[k].x());
      max_x = std::max(max_x, quad[k].x());
      min_y = std::min(min_y, quad[k].y());
      max_y = std::max(max_y, quad[k].y());
    }
    const int x0 = std::max(0, static_cast<int>(std::ceil(min_x)));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(max_x)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(min_y)));
    const int y1 = std::min(height - 1, static_cast<int>(std::floor(max_y)));

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Vec2d px(x, y);
        if (!InsideConvexQuad(quad, px)) continue;
        const auto pattern_point = h->ApplyInverse(px);
        if (pattern_point) map.Set(x, y, *pattern_point);
      }
    }
  }
  return map;
}

}  // namespace calib
