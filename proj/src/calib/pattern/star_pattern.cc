#include "calib/pattern/star_pattern.h"

#include <cmath>
#include <stdexcept>

namespace calib {

StarPattern::StarPattern(int segment_count, int squares_x, int squares_y,
                         double square_size, double physical_square_size)
    : segment_count_(segment_count), squares_x_(squares_x),
      squares_y_(squares_y), square_size_(square_size),
      physical_square_size_(physical_square_size) {
  if (segment_count < 4 || segment_count % 2 != 0) {
    throw std::invalid_argument("segment count must be even and >= 4");
  }
  if (squares_x < 1 || squares_y < 1 || square_size <= 0.0) {
    throw std::invalid_argument("invalid pattern dimensions");
  }
}

std::vector<std::pair<int, int>> StarPattern::FeatureSquares() const {
  std::vector<std::pair<int, int>> result;
  result.reserve(static_cast<size_t>(squares_x_) * squares_y_);
  for (int j = 0; j < squares_y_; ++j) {
    for (int i = 0; i < squares_x_; ++i) {
      if (!IsFiducialSquare(i, j)) result.emplace_back(i, j);
    }
  }
  return result;
}

std::optional<double> StarPattern::Intensity(const Vec2d& p) const {
  if (!InPattern(p)) return std::nullopt;
  int i = static_cast<int>(p.x() / square_size_);
  int j = static_cast<int>(p.y() / square_size_);
  if (i >= squares_x_) i = squares_x_ - 1;
  if (j >= squares_y_) j = squares_y_ - 1;
  if (IsFiducialSquare(i, j)) return 0.5;

  const Vec2d center = FeaturePosition(i, j);
  double theta = std::atan2(p.y() - center.y(), p.x() - center.x());
  if (theta < 0.0) theta += 2.0 * M_PI;
  int segment = static_cast<int>(segment_count_ * theta / (2.0 * M_PI));
  if (segment >= segment_count_) segment = segment_count_ - 1;
  return static_cast<double>((segment + i + j) & 1);
}

}  // namespace calib
