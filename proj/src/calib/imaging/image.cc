#include "calib/imaging/image.h"

#include <cmath>

namespace calib {

Image GaussianBlur(const Image& image, double sigma) {
  if (sigma <= 0.0 || image.empty()) return image;

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int w = image.width();
  const int h = image.height();
  Image horizontal(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xi = std::clamp(x + i, 0, w - 1);
        acc += kernel[i + radius] * image.at(xi, y);
      }
      horizontal.set(x, y, static_cast<float>(acc));
    }
  }
  Image result(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yi = std::clamp(y + i, 0, h - 1);
        acc += kernel[i + radius] * horizontal.at(x, yi);
      }
      result.set(x, y, static_cast<float>(acc));
    }
  }
  return result;
}

}  // namespace calib
