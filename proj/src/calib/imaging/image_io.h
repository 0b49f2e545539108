#pragma once

#include <array>
#include <string>
#include <vector>

#include "calib/imaging/image.h"

namespace calib {

// Grayscale image file I/O. Supported formats: binary PGM (P5, 8/16-bit)
// and PNG (8/16-bit gray; color PNGs are converted to gray on load with
// Rec.601 luminance weights). Intensities are normalized to [0, 1].
// Throws std::runtime_error on I/O or format problems.

Image ReadImage(const std::string& path);

// bit_depth must be 8 or 16.
void WritePgm(const Image& image, const std::string& path, int bit_depth = 16);
void WriteGrayPng(const Image& image, const std::string& path,
                  int bit_depth = 16);

// Writes an 8-bit RGB PNG from interleaved rgb triplets (size 3*w*h).
void WriteRgbPng(const std::vector<std::array<unsigned char, 3>>& rgb,
                 int width, int height, const std::string& path);

}  // namespace calib
