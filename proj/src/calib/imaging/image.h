#pragma once

#include <cassert>
#include <optional>
#include <vector>

#include "calib/core/types.h"

namespace calib {

// Grayscale raster with intensities in [0, 1]. Integer coordinates refer to
// pixel centers, so the bilinear interpolation domain is
// [0, width-1] x [0, height-1]. Immutable use after construction is
// thread-safe; sampling never mutates.
class Image {
 public:
  Image() = default;
  Image(int width, int height, float fill = 0.0f)
      : width_(width), height_(height),
        data_(static_cast<size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  float at(int x, int y) const { return data_[Index(x, y)]; }
  void set(int x, int y, float value) { data_[Index(x, y)] = value; }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& mutable_data() { return data_; }

  bool InInterpolationDomain(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x <= width_ - 1 && y <= height_ - 1;
  }

  // Bilinear interpolation of the four surrounding pixels. Empty outside the
  // interpolation domain, which tells the caller to invalidate the sample.
  std::optional<double> BilinearSample(double x, double y) const {
    if (!InInterpolationDomain(x, y)) return std::nullopt;
    return BilinearSampleUnchecked(x, y);
  }

  double BilinearSampleUnchecked(double x, double y) const {
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    if (x0 > width_ - 2) x0 = width_ - 2;
    if (y0 > height_ - 2) y0 = height_ - 2;
    const double fx = x - x0;
    const double fy = y - y0;
    const double v00 = data_[Index(x0, y0)];
    const double v10 = data_[Index(x0 + 1, y0)];
    const double v01 = data_[Index(x0, y0 + 1)];
    const double v11 = data_[Index(x0 + 1, y0 + 1)];
    return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
           fy * ((1.0 - fx) * v01 + fx * v11);
  }

  // Analytic spatial derivative of the bilinear interpolant within its cell.
  // Used as the exact Jacobian of sampled intensities.
  std::optional<Vec2d> BilinearGradient(double x, double y) const {
    if (!InInterpolationDomain(x, y)) return std::nullopt;
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    if (x0 > width_ - 2) x0 = width_ - 2;
    if (y0 > height_ - 2) y0 = height_ - 2;
    const double fx = x - x0;
    const double fy = y - y0;
    const double v00 = data_[Index(x0, y0)];
    const double v10 = data_[Index(x0 + 1, y0)];
    const double v01 = data_[Index(x0, y0 + 1)];
    const double v11 = data_[Index(x0 + 1, y0 + 1)];
    return Vec2d((1.0 - fy) * (v10 - v00) + fy * (v11 - v01),
                 (1.0 - fx) * (v01 - v00) + fx * (v11 - v10));
  }

 private:
  size_t Index(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return static_cast<size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

// Separable Gaussian blur with kernel radius ceil(3 sigma); border handling
// clamps to the edge. sigma <= 0 returns the input unchanged.
Image GaussianBlur(const Image& image, double sigma);

}  // namespace calib
