#include "csuda/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csuda {

void write_image_grid(const std::filesystem::path& path, const std::vector<Image>& images, int columns) {
  require(!images.empty(), "write_image_grid: no images");
  require(columns >= 1, "write_image_grid: columns must be >= 1");
  const int h = images.front().height, w = images.front().width;
  const int rows = (static_cast<int>(images.size()) + columns - 1) / columns;
  const int gutter = 2;

  Rgb8Image grid;
  grid.height = rows * h + (rows + 1) * gutter;
  grid.width = columns * w + (columns + 1) * gutter;
  grid.pixels.assign(static_cast<std::size_t>(grid.height) * grid.width * 3, 32);

  for (std::size_t i = 0; i < images.size(); ++i) {
    const Rgb8Image tile = to_rgb8(images[i]);
    const int r0 = gutter + static_cast<int>(i) / columns * (h + gutter);
    const int c0 = gutter + static_cast<int>(i) % columns * (w + gutter);
    for (int y = 0; y < h; ++y)
      std::copy_n(tile.pixels.data() + static_cast<std::size_t>(y) * w * 3, static_cast<std::size_t>(w) * 3,
                  grid.pixels.data() + (static_cast<std::size_t>(r0 + y) * grid.width + c0) * 3);
  }
  write_png(path, grid);
}

namespace {

void put_pixel(Rgb8Image& img, int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
  const std::size_t p = (static_cast<std::size_t>(y) * img.width + x) * 3;
  img.pixels[p] = r;
  img.pixels[p + 1] = g;
  img.pixels[p + 2] = b;
}

void draw_line(Rgb8Image& img, int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g,
               std::uint8_t b) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    put_pixel(img, x0, y0, r, g, b);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series, int width,
                     int height) {
  require(!series.empty(), "write_line_plot: no series");
  Rgb8Image img;
  img.height = height;
  img.width = width;
  img.pixels.assign(static_cast<std::size_t>(height) * width * 3, 255);

  double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
  std::size_t max_len = 0;
  for (const auto& s : series) {
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    max_len = std::max(max_len, s.values.size());
  }
  if (max_len == 0) {
    write_png(path, img);
    return;
  }
  if (hi <= lo) hi = lo + 1.0;

  const int margin = 24;
  const int plot_w = width - 2 * margin, plot_h = height - 2 * margin;
  draw_line(img, margin, margin, margin, height - margin, 0, 0, 0);
  draw_line(img, margin, height - margin, width - margin, height - margin, 0, 0, 0);

  for (const auto& s : series) {
    if (s.values.size() < 2) continue;
    int px = 0, py = 0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      const int x = margin + static_cast<int>(static_cast<double>(i) / (max_len - 1) * plot_w);
      const int y =
          height - margin - static_cast<int>((s.values[i] - lo) / (hi - lo) * plot_h);
      if (i > 0) draw_line(img, px, py, x, y, s.r, s.g, s.b);
      px = x;
      py = y;
    }
  }
  write_png(path, img);
}

}  // namespace csuda
