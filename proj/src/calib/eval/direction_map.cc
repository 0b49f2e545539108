#include "calib/eval/direction_map.h"

#include <cmath>

#include "calib/core/parallel.h"

namespace calib {

Rgb HueColor(double angle) {
  double h = angle / (2.0 * M_PI);
  h -= std::floor(h);
  const double sector = h * 6.0;
  const int i = std::min(5, static_cast<int>(sector));
  const double f = sector - i;
  const auto to_byte = [](double v) {
    return static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  };
  const unsigned char q = to_byte(1.0 - f);
  const unsigned char t = to_byte(f);
  switch (i) {
    case 0: return {255, t, 0};
    case 1: return {q, 255, 0};
    case 2: return {0, 255, t};
    case 3: return {0, q, 255};
    case 4: return {t, 0, 255};
    default: return {255, 0, q};
  }
}

namespace {

int BruteForceNearest(const std::vector<ErrorVector>& entries,
                      const Vec2d& query) {
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < entries.size(); ++k) {
    const double d = (entries[k].position - query).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

// Uniform bucket grid with expanding-ring search; exact, with lowest-index
// tie breaking to match the brute-force reference.
class BucketGrid {
 public:
  BucketGrid(const std::vector<ErrorVector>& entries, int width, int height)
      : entries_(entries) {
    cell_size_ = std::max(
        4.0, std::sqrt(static_cast<double>(width) * height /
                       std::max<size_t>(1, entries.size())));
    cols_ = std::max(1, static_cast<int>(std::ceil(width / cell_size_)));
    rows_ = std::max(1, static_cast<int>(std::ceil(height / cell_size_)));
    buckets_.resize(static_cast<size_t>(cols_) * rows_);
    for (size_t k = 0; k < entries.size(); ++k) {
      buckets_[BucketIndex(entries[k].position)].push_back(
          static_cast<int>(k));
    }
  }

  int Nearest(const Vec2d& query) const {
    const int qc = std::clamp(static_cast<int>(query.x() / cell_size_), 0,
                              cols_ - 1);
    const int qr = std::clamp(static_cast<int>(query.y() / cell_size_), 0,
                              rows_ - 1);
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    const int max_ring = std::max(cols_, rows_);
    for (int ring = 0; ring <= max_ring; ++ring) {
      // Cells on this ring can only contain closer points if the ring's
      // minimum possible distance does not exceed the best found.
      if (best >= 0) {
        const double ring_min = (ring - 1) * cell_size_;
        if (ring_min > 0.0 && ring_min * ring_min > best_dist) break;
      }
      for (int dr = -ring; dr <= ring; ++dr) {
        for (int dc = -ring; dc <= ring; ++dc) {
          if (std::max(std::abs(dr), std::abs(dc)) != ring) continue;
          const int c = qc + dc;
          const int r = qr + dr;
          if (c < 0 || r < 0 || c >= cols_ || r >= rows_) continue;
          for (int idx : buckets_[static_cast<size_t>(r) * cols_ + c]) {
            const double d = (entries_[idx].position - query).squaredNorm();
            if (d < best_dist || (d == best_dist && idx < best)) {
              best_dist = d;
              best = idx;
            }
          }
        }
      }
    }
    return best;
  }

 private:
  size_t BucketIndex(const Vec2d& p) const {
    const int c = std::clamp(static_cast<int>(p.x() / cell_size_), 0,
                             cols_ - 1);
    const int r = std::clamp(static_cast<int>(p.y() / cell_size_), 0,
                             rows_ - 1);
    return static_cast<size_t>(r) * cols_ + c;
  }

  const std::vector<ErrorVector>& entries_;
  double cell_size_ = 1.0;
  int cols_ = 1;
  int rows_ = 1;
  std::vector<std::vector<int>> buckets_;
};

Rgb ColorFor(const ErrorVector& e) {
  return HueColor(std::atan2(e.error.y(), e.error.x()));
}

}  // namespace

DirectionMapImage ErrorDirectionMap(const ErrorVectorField& field, int width,
                                    int height) {
  DirectionMapImage image{width, height,
                          std::vector<Rgb>(static_cast<size_t>(width) * height,
                                           Rgb{0, 0, 0})};
  if (field.entries.empty()) return image;
  const BucketGrid grid(field.entries, width, height);
  ParallelFor(0, height, [&](int64_t y) {
    for (int x = 0; x < width; ++x) {
      const int nearest = grid.Nearest(Vec2d(x, y));
      image.pixels[static_cast<size_t>(y) * width + x] =
          ColorFor(field.entries[nearest]);
    }
  });
  return image;
}

DirectionMapImage ErrorDirectionMapSerial(const ErrorVectorField& field,
                                          int width, int height) {
  DirectionMapImage image{width, height,
                          std::vector<Rgb>(static_cast<size_t>(width) * height,
                                           Rgb{0, 0, 0})};
  if (field.entries.empty()) return image;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int nearest = BruteForceNearest(field.entries, Vec2d(x, y));
      image.pixels[static_cast<size_t>(y) * width + x] =
          ColorFor(field.entries[nearest]);
    }
  }
  return image;
}

DirectionMapImage DirectionLegend(int size) {
  DirectionMapImage image{size, size,
                          std::vector<Rgb>(static_cast<size_t>(size) * size,
                                           Rgb{255, 255, 255})};
  const double center = 0.5 * (size - 1);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x - center;
      const double dy = y - center;
      const double radius = std::hypot(dx, dy);
      if (radius > 0.5 * size || radius < 0.15 * size) continue;
      image.pixels[static_cast<size_t>(y) * size + x] =
          HueColor(std::atan2(dy, dx));
    }
  }
  return image;
}

}  // namespace calib
