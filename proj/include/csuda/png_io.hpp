#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "csuda/dataset.hpp"

namespace csuda {

/// Interleaved 8-bit RGB buffer, row-major.
struct Rgb8Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // height * width * 3
};

void write_png(const std::filesystem::path& path, const Rgb8Image& img);
Rgb8Image read_png(const std::filesystem::path& path);

/// [0,1] float image <-> 8-bit RGB. Single-channel images are replicated.
Rgb8Image to_rgb8(const Image& img);
Image from_rgb8(const Rgb8Image& img);

/// Bilinear resize of a float image.
Image resize_bilinear(const Image& img, int out_height, int out_width);

}  // namespace csuda
