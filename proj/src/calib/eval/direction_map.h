#pragma once

#include <array>
#include <vector>

#include "calib/eval/error_field.h"

namespace calib {

using Rgb = std::array<unsigned char, 3>;

struct DirectionMapImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;
};

// Full-saturation hue wheel over the direction angle in [0, 2pi).
Rgb HueColor(double angle);

// Voronoi error-direction map: each pixel takes the color of the nearest
// observation's error direction. Exact nearest neighbors (lowest index wins
// ties), computed with a bucket grid and parallel rows.
DirectionMapImage ErrorDirectionMap(const ErrorVectorField& field, int width,
                                    int height);
// Serial brute-force reference; identical output.
DirectionMapImage ErrorDirectionMapSerial(const ErrorVectorField& field,
                                          int width, int height);

// Color-wheel legend for the direction maps.
DirectionMapImage DirectionLegend(int size);

}  // namespace calib
