#include "calib/init/per_pixel_directions.h"

namespace calib {

std::optional<Vec3d> PerPixelDirections::AtNearby(int x, int y,
                                                  int radius) const {
  for (int r = 0; r <= radius; ++r) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        const int px = x + dx;
        const int py = y + dy;
        if (px < 0 || py < 0 || px >= width_ || py >= height_) continue;
        const auto dir = At(px, py);
        if (dir) return dir;
      }
    }
  }
  return std::nullopt;
}

int64_t PerPixelDirections::defined_count() const {
  int64_t count = 0;
  for (int c : counts_) count += c > 0 ? 1 : 0;
  return count;
}

void PerPixelDirections::AccumulateView(const DenseMatchMap& matches,
                                        const RigidTransform& pose) {
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const auto pattern_point = matches.At(x, y);
      if (!pattern_point) continue;
      const Vec3d in_camera =
          pose * Vec3d(pattern_point->x(), pattern_point->y(), 0.0);
      const double norm = in_camera.norm();
      if (norm < 1e-9 || in_camera.z() < 1e-9) continue;
      Accumulate(x, y, in_camera / norm);
    }
  }
}

}  // namespace calib
