#include "calib/imaging/image_io.h"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace calib {

namespace {

[[noreturn]] void Fail(const std::string& path, const std::string& message) {
  throw std::runtime_error(path + ": " + message);
}

int SkipPgmWhitespace(std::istream& in) {
  int c = in.get();
  while (c == '#' || std::isspace(c)) {
    if (c == '#') {
      while (c != '\n' && c != EOF) c = in.get();
    }
    c = in.get();
  }
  return c;
}

int ReadPgmInt(std::istream& in, const std::string& path) {
  int c = SkipPgmWhitespace(in);
  if (!std::isdigit(c)) Fail(path, "malformed PGM header");
  int value = 0;
  while (std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

Image ReadPgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(path, "cannot open");
  char magic[2];
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') Fail(path, "not a binary PGM (P5)");
  const int width = ReadPgmInt(in, path);
  const int height = ReadPgmInt(in, path);
  const int maxval = ReadPgmInt(in, path);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    Fail(path, "invalid PGM dimensions");
  }
  // ReadPgmInt consumed the single whitespace after maxval already.
  in.unget();
  in.get();

  Image image(width, height);
  const size_t count = static_cast<size_t>(width) * height;
  if (maxval < 256) {
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), count);
    if (!in) Fail(path, "truncated PGM data");
    for (size_t i = 0; i < count; ++i) {
      image.mutable_data()[i] = raw[i] / static_cast<float>(maxval);
    }
  } else {
    std::vector<unsigned char> raw(2 * count);
    in.read(reinterpret_cast<char*>(raw.data()), 2 * count);
    if (!in) Fail(path, "truncated PGM data");
    for (size_t i = 0; i < count; ++i) {
      const int value = (raw[2 * i] << 8) | raw[2 * i + 1];  // big-endian
      image.mutable_data()[i] = value / static_cast<float>(maxval);
    }
  }
  return image;
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* file = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (file) std::fclose(file);
  }
};

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* file = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (file) std::fclose(file);
  }
};

Image ReadPng(const std::string& path) {
  PngReadCloser ctx;
  ctx.file = std::fopen(path.c_str(), "rb");
  if (!ctx.file) Fail(path, "cannot open");
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                   nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) Fail(path, "libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) Fail(path, "libpng read error");

  png_init_io(ctx.png, ctx.file);
  png_read_info(ctx.png, ctx.info);

  const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
  const int color_type = png_get_color_type(ctx.png, ctx.info);
  int bit_depth = png_get_bit_depth(ctx.png, ctx.info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(ctx.png);
  }
  if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(ctx.png);
  }
  png_set_strip_alpha(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  const int channels = png_get_channels(ctx.png, ctx.info);
  const size_t row_bytes = png_get_rowbytes(ctx.png, ctx.info);

  std::vector<unsigned char> raw(row_bytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * row_bytes;
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);

  Image image(static_cast<int>(width), static_cast<int>(height));
  const float maxval = bit_depth == 16 ? 65535.0f : 255.0f;
  for (png_uint_32 y = 0; y < height; ++y) {
    const unsigned char* row = rows[y];
    for (png_uint_32 x = 0; x < width; ++x) {
      double gray = 0.0;
      if (channels == 1) {
        gray = bit_depth == 16 ? (row[2 * x] << 8 | row[2 * x + 1])
                               : row[x];
      } else {
        // Rec.601 luminance for color inputs.
        double r, g, b;
        if (bit_depth == 16) {
          const unsigned char* p = row + 6 * x;
          r = (p[0] << 8) | p[1];
          g = (p[2] << 8) | p[3];
          b = (p[4] << 8) | p[5];
        } else {
          const unsigned char* p = row + 3 * x;
          r = p[0];
          g = p[1];
          b = p[2];
        }
        gray = 0.299 * r + 0.587 * g + 0.114 * b;
      }
      image.set(static_cast<int>(x), static_cast<int>(y),
                static_cast<float>(gray / maxval));
    }
  }
  return image;
}

bool HasSuffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Image ReadImage(const std::string& path) {
  if (HasSuffix(path, ".png") || HasSuffix(path, ".PNG")) return ReadPng(path);
  return ReadPgm(path);
}

void WritePgm(const Image& image, const std::string& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    Fail(path, "unsupported PGM bit depth");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(path, "cannot open for writing");
  const int maxval = bit_depth == 8 ? 255 : 65535;
  out << "P5\n" << image.width() << " " << image.height() << "\n" << maxval
      << "\n";
  const size_t count = image.data().size();
  if (bit_depth == 8) {
    std::vector<unsigned char> raw(count);
    for (size_t i = 0; i < count; ++i) {
      raw[i] = static_cast<unsigned char>(
          std::lround(std::clamp<double>(image.data()[i], 0, 1) * maxval));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), count);
  } else {
    std::vector<unsigned char> raw(2 * count);
    for (size_t i = 0; i < count; ++i) {
      const int v = static_cast<int>(
          std::lround(std::clamp<double>(image.data()[i], 0, 1) * maxval));
      raw[2 * i] = static_cast<unsigned char>(v >> 8);
      raw[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), 2 * count);
  }
  if (!out) Fail(path, "write failed");
}

void WriteGrayPng(const Image& image, const std::string& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    Fail(path, "unsupported PNG bit depth");
  }
  PngWriteCloser ctx;
  ctx.file = std::fopen(path.c_str(), "wb");
  if (!ctx.file) Fail(path, "cannot open for writing");
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                    nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) Fail(path, "libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) Fail(path, "libpng write error");

  png_init_io(ctx.png, ctx.file);
  png_set_IHDR(ctx.png, ctx.info, image.width(), image.height(), bit_depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);

  const int w = image.width();
  const int maxval = bit_depth == 8 ? 255 : 65535;
  std::vector<unsigned char> row(static_cast<size_t>(w) * (bit_depth / 8));
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const int v = static_cast<int>(
          std::lround(std::clamp<double>(image.at(x, y), 0, 1) * maxval));
      if (bit_depth == 8) {
        row[x] = static_cast<unsigned char>(v);
      } else {
        row[2 * x] = static_cast<unsigned char>(v >> 8);
        row[2 * x + 1] = static_cast<unsigned char>(v & 0xff);
      }
    }
    png_write_row(ctx.png, row.data());
  }
  png_write_end(ctx.png, nullptr);
}

void WriteRgbPng(const std::vector<std::array<unsigned char, 3>>& rgb,
                 int width, int height, const std::string& path) {
  if (rgb.size() != static_cast<size_t>(width) * height) {
    Fail(path, "rgb buffer size mismatch");
  }
  PngWriteCloser ctx;
  ctx.file = std::fopen(path.c_str(), "wb");
  if (!ctx.file) Fail(path, "cannot open for writing");
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                    nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) Fail(path, "libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) Fail(path, "libpng write error");

  png_init_io(ctx.png, ctx.file);
  png_set_IHDR(ctx.png, ctx.info, width, height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  std::vector<unsigned char> row(static_cast<size_t>(width) * 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto& px = rgb[static_cast<size_t>(y) * width + x];
      row[3 * x] = px[0];
      row[3 * x + 1] = px[1];
      row[3 * x + 2] = px[2];
    }
    png_write_row(ctx.png, row.data());
  }
  png_write_end(ctx.png, nullptr);
}

}  // namespace calib
