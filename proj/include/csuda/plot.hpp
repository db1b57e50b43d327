#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "csuda/png_io.hpp"

namespace csuda {

/// Tiles images into a grid (rows x cols, row-major order) with a 2 px gutter
/// and writes it as PNG.
void write_image_grid(const std::filesystem::path& path, const std::vector<Image>& images, int columns);

/// Minimal line plot (log-free, auto-scaled axes) rasterized to PNG; one
/// polyline per series.
struct PlotSeries {
  std::string name;
  std::vector<double> values;  // x = index
  std::uint8_t r = 0, g = 0, b = 0;
};

void write_line_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series, int width = 640,
                     int height = 400);

}  // namespace csuda
