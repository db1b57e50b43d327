#include "csuda/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <set>

#include "csuda/png_io.hpp"
#include "csuda/rng.hpp"

namespace csuda {

namespace {

constexpr int kMaxGlyphs = 16;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Hsv {
  float h, s, v;
};

void hsv_to_rgb(const Hsv& in, float& r, float& g, float& b) {
  float h = in.h - std::floor(in.h);
  const float c = in.v * in.s;
  const float hp = h * 6.0f;
  const float x = c * (1.0f - std::fabs(std::fmod(hp, 2.0f) - 1.0f));
  float r1 = 0, g1 = 0, b1 = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
  }
  const float m = in.v - c;
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

Hsv rgb_to_hsv(float r, float g, float b) {
  const float mx = std::max({r, g, b});
  const float mn = std::min({r, g, b});
  const float d = mx - mn;
  Hsv out{0.0f, 0.0f, mx};
  if (d > 1e-8f) {
    if (mx == r)
      out.h = std::fmod((g - b) / d, 6.0f) / 6.0f;
    else if (mx == g)
      out.h = ((b - r) / d + 2.0f) / 6.0f;
    else
      out.h = ((r - g) / d + 4.0f) / 6.0f;
    if (out.h < 0) out.h += 1.0f;
  }
  if (mx > 1e-8f) out.s = d / mx;
  return out;
}

float sd_rect(float dx, float dy, float hx, float hy) {
  return std::max(std::fabs(dx) - hx, std::fabs(dy) - hy);
}

float sd_halfplane(float px, float py, float ax, float ay, float bx, float by) {
  // signed distance to the line a->b, positive on the left-normal side
  const float ex = bx - ax, ey = by - ay;
  const float len = std::sqrt(ex * ex + ey * ey);
  return ((px - ax) * ey - (py - ay) * ex) / len;
}

// Signed distance (negative inside) of glyph `g` at offset (dx, dy) from the
// glyph center, for nominal radius r. Sixteen distinct shapes.
float glyph_sdf(int g, float dx, float dy, float r) {
  const float len = std::sqrt(dx * dx + dy * dy);
  switch (g) {
    case 0: return len - r;                                      // disk
    case 1: return std::fabs(len - 0.75f * r) - 0.3f * r;        // ring
    case 2: return sd_rect(dx, dy, 0.85f * r, 0.85f * r);        // square
    case 3: {                                                    // square frame
      const float outer = std::max(std::fabs(dx), std::fabs(dy));
      return std::fabs(outer - 0.72f * r) - 0.22f * r;
    }
    case 4: return (std::fabs(dx) + std::fabs(dy)) - 1.1f * r;   // diamond
    case 5: return std::fabs(std::fabs(dx) + std::fabs(dy) - 0.95f * r) - 0.26f * r;  // diamond frame
    case 6: {                                                    // triangle up
      const float d1 = sd_halfplane(dx, dy, 0.0f, -r, 0.95f * r, 0.8f * r);
      const float d2 = sd_halfplane(dx, dy, 0.95f * r, 0.8f * r, -0.95f * r, 0.8f * r);
      const float d3 = sd_halfplane(dx, dy, -0.95f * r, 0.8f * r, 0.0f, -r);
      return std::max({d1, d2, d3});
    }
    case 7: return glyph_sdf(6, dx, -dy, r);                     // triangle down
    case 8: return std::min(sd_rect(dx, dy, 0.32f * r, r), sd_rect(dx, dy, r, 0.32f * r));  // cross
    case 9: {                                                    // saltire
      const float rx = (dx + dy) * 0.70710678f;
      const float ry = (dx - dy) * 0.70710678f;
      return std::min(sd_rect(rx, ry, 0.32f * r, r), sd_rect(rx, ry, r, 0.32f * r));
    }
    case 10: return sd_rect(dx, dy, r, 0.32f * r);               // horizontal bar
    case 11: return sd_rect(dx, dy, 0.32f * r, r);               // vertical bar
    case 12: {                                                   // 4-point star (+ and x)
      const float rx = (dx + dy) * 0.70710678f;
      const float ry = (dx - dy) * 0.70710678f;
      const float plus = std::min(sd_rect(dx, dy, 0.2f * r, r), sd_rect(dx, dy, r, 0.2f * r));
      const float salt = std::min(sd_rect(rx, ry, 0.2f * r, r), sd_rect(rx, ry, r, 0.2f * r));
      return std::min(plus, salt);
    }
    case 13: return std::max(len - 1.05f * r, dy + 0.1f * r);    // upper half-disk
    case 14:                                                     // two vertical bars
      return std::min(sd_rect(dx - 0.5f * r, dy, 0.22f * r, r), sd_rect(dx + 0.5f * r, dy, 0.22f * r, r));
    default: {                                                   // checker quadrants
      const float a = std::max(std::fabs(dx - 0.5f * r), std::fabs(dy - 0.5f * r)) - 0.48f * r;
      const float b = std::max(std::fabs(dx + 0.5f * r), std::fabs(dy + 0.5f * r)) - 0.48f * r;
      return std::min(a, b);
    }
  }
}

DomainTransformSpec resolve_spec(const DomainTransformSpec& spec) {
  DomainTransformSpec out = spec;
  const std::string& n = spec.name;
  if (n == "identity" || n == "photo") {
    // no-op
  } else if (n == "hue_rotate" || n == "art") {
    if (n == "art" && out.hue_shift == 0.0f) out.hue_shift = 0.35f;
  } else if (n == "invert" || n == "inverted") {
    out.invert = true;
  } else if (n == "invert_flat" || n == "cartoon") {
    out.invert = true;
    if (out.posterize_levels <= 0) out.posterize_levels = 4;
  } else if (n == "edge_map" || n == "sketch") {
    out.edge_filter = true;
  } else if (n == "rotate") {
    // rotation_deg as given
  } else {
    throw std::invalid_argument("unknown domain transform '" + n + "'");
  }
  return out;
}

}  // namespace

bool is_builtin_domain(const std::string& domain) {
  return domain == "photo" || domain == "art" || domain == "cartoon" || domain == "sketch";
}

DomainTransformSpec builtin_domain(const std::string& domain) {
  if (!is_builtin_domain(domain)) throw std::invalid_argument("unknown built-in domain '" + domain + "'");
  DomainTransformSpec spec;
  spec.name = domain;
  return resolve_spec(spec);
}

namespace detail {

Image render_glyph(int glyph, int num_classes, int height, int width, std::uint64_t sample_seed) {
  Rng rng = make_rng(sample_seed);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);

  // jitter: translation +-3 px, scale +-15%
  const float cx = width / 2.0f + (uni(rng) * 2.0f - 1.0f) * 3.0f;
  const float cy = height / 2.0f + (uni(rng) * 2.0f - 1.0f) * 3.0f;
  const float radius = 0.30f * std::min(height, width) * (1.0f + (uni(rng) * 2.0f - 1.0f) * 0.15f);

  // class-coded foreground hue; neutral background with slight tint
  Hsv fg;
  fg.h = std::fmod((glyph + 0.37f) / static_cast<float>(num_classes) + (uni(rng) - 0.5f) * 0.04f + 1.0f, 1.0f);
  fg.s = 0.75f + (uni(rng) - 0.5f) * 0.1f;
  fg.v = 0.85f + (uni(rng) - 0.5f) * 0.1f;
  Hsv bg;
  bg.h = uni(rng);
  bg.s = uni(rng) * 0.15f;
  bg.v = 0.15f + uni(rng) * 0.2f;
  const float grad = (uni(rng) * 2.0f - 1.0f) * 0.2f;

  float fr, fgc, fb, br, bgc, bb;
  hsv_to_rgb(fg, fr, fgc, fb);
  hsv_to_rgb(bg, br, bgc, bb);

  Image img(1, 3, height, width);
  for (int y = 0; y < height; ++y) {
    const float shade = 1.0f + grad * (static_cast<float>(y) / (height - 1) - 0.5f);
    for (int x = 0; x < width; ++x) {
      const float d = glyph_sdf(glyph % kMaxGlyphs, x + 0.5f - cx, y + 0.5f - cy, radius);
      const float cov = std::clamp(0.5f - d, 0.0f, 1.0f);  // 1 px soft edge
      const int p = y * width + x;
      img.data(0, p) = std::clamp((br + (fr - br) * cov) * shade, 0.0f, 1.0f);
      img.data(1, p) = std::clamp((bgc + (fgc - bgc) * cov) * shade, 0.0f, 1.0f);
      img.data(2, p) = std::clamp((bb + (fb - bb) * cov) * shade, 0.0f, 1.0f);
    }
  }
  return img;
}

Image apply_transform(const Image& img, const DomainTransformSpec& spec_in) {
  const DomainTransformSpec spec = resolve_spec(spec_in);
  Image out = img;
  const int h = img.height, w = img.width;

  if (spec.name == "rotate" && spec.rotation_deg != 0.0f) {
    const float rad = spec.rotation_deg * static_cast<float>(M_PI) / 180.0f;
    const float cs = std::cos(rad), sn = std::sin(rad);
    const float cx = (w - 1) / 2.0f, cy = (h - 1) / 2.0f;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const float sx = cs * (x - cx) + sn * (y - cy) + cx;
        const float sy = -sn * (x - cx) + cs * (y - cy) + cy;
        const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, w - 1);
        const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, h - 1);
        const int x1 = std::min(x0 + 1, w - 1);
        const int y1 = std::min(y0 + 1, h - 1);
        const float fx = std::clamp(sx - x0, 0.0f, 1.0f);
        const float fy = std::clamp(sy - y0, 0.0f, 1.0f);
        for (int c = 0; c < img.channels; ++c) {
          const float v = (1 - fy) * ((1 - fx) * img.data(c, y0 * w + x0) + fx * img.data(c, y0 * w + x1)) +
                          fy * ((1 - fx) * img.data(c, y1 * w + x0) + fx * img.data(c, y1 * w + x1));
          out.data(c, y * w + x) = v;
        }
      }
    }
  }

  if (spec.invert) out.data = (1.0f - out.data.array()).matrix();

  if (spec.posterize_levels > 1) {
    const float levels = static_cast<float>(spec.posterize_levels - 1);
    out.data = ((out.data.array() * levels).round() / levels).matrix();
  }

  if (spec.hue_shift != 0.0f) {
    for (Eigen::Index p = 0; p < out.data.cols(); ++p) {
      Hsv hsv = rgb_to_hsv(out.data(0, p), out.data(1, p), out.data(2, p));
      hsv.h += spec.hue_shift;
      float r, g, b;
      hsv_to_rgb(hsv, r, g, b);
      out.data(0, p) = r;
      out.data(1, p) = g;
      out.data(2, p) = b;
    }
  }

  if (spec.edge_filter) {
    Eigen::VectorXf gray(h * w);
    for (int p = 0; p < h * w; ++p)
      gray(p) = 0.299f * out.data(0, p) + 0.587f * out.data(1, p) + 0.114f * out.data(2, p);
    auto at = [&](int y, int x) {
      return gray(std::clamp(y, 0, h - 1) * w + std::clamp(x, 0, w - 1));
    };
    Image edges(1, 3, h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const float gx = at(y - 1, x + 1) + 2 * at(y, x + 1) + at(y + 1, x + 1) -
                         at(y - 1, x - 1) - 2 * at(y, x - 1) - at(y + 1, x - 1);
        const float gy = at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1) -
                         at(y - 1, x - 1) - 2 * at(y - 1, x) - at(y - 1, x + 1);
        const float mag = std::clamp(0.5f * std::sqrt(gx * gx + gy * gy), 0.0f, 1.0f);
        edges.data(0, y * w + x) = mag;
        edges.data(1, y * w + x) = mag;
        edges.data(2, y * w + x) = mag;
      }
    }
    out = edges;
  }

  out.data = out.data.array().min(1.0f).max(0.0f).matrix();
  return out;
}

}  // namespace detail

DomainDataset generate_shiftshapes(int num_classes, int per_class, const DomainTransformSpec& domain,
                                   std::uint64_t seed, const std::string& split) {
  require(num_classes >= 2 && num_classes <= kMaxGlyphs,
          "num_classes must be in [2," + std::to_string(kMaxGlyphs) + "]");
  require(per_class >= 8, "per_class must be >= 8");
  const DomainTransformSpec spec = resolve_spec(domain);  // rejects unknown names up front

  DomainDataset data;
  data.domain_tag = spec.name;
  data.split = split;
  data.num_classes = num_classes;
  const std::uint64_t split_tag = fnv1a(split);

  constexpr int kH = 32, kW = 32;
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const std::uint64_t sample_seed =
          derive_seed(seed, {split_tag, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i)});
      Image img = detail::render_glyph(c, num_classes, kH, kW, sample_seed);
      if (spec.noise_sigma > 0.0f) {
        Rng rng = make_rng(sample_seed, {0xA0});
        std::normal_distribution<float> noise(0.0f, spec.noise_sigma);
        for (Eigen::Index p = 0; p < img.data.size(); ++p)
          img.data(p) = std::clamp(img.data(p) + noise(rng), 0.0f, 1.0f);
      }
      img = detail::apply_transform(img, spec);

      LabeledSample s;
      s.image = std::move(img);
      s.label = c;
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%s-%s-c%02d-%04d", spec.name.c_str(), split.c_str(), c, i);
      s.sample_id = buf;
      data.samples.push_back(std::move(s));
    }
  }
  data.validate();
  return data;
}

DomainDataset load_image_folder(const std::filesystem::path& root, const std::string& split,
                                int target_height, int target_width) {
  namespace fs = std::filesystem;
  require(fs::is_directory(root), "image folder root does not exist: " + root.string());

  std::vector<std::string> class_names;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) class_names.push_back(e.path().filename().string());
  std::sort(class_names.begin(), class_names.end());

  DomainDataset data;
  data.domain_tag = root.filename().string();
  data.split = split;

  int label = 0;
  for (const auto& cls : class_names) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root / cls))
      if (e.is_regular_file()) files.push_back(e.path());
    if (files.empty()) {
      std::cerr << "warning: skipping empty class directory '" << cls << "'\n";
      continue;
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      Image img;
      try {
        img = from_rgb8(read_png(f));
      } catch (const std::exception& e) {
        throw std::runtime_error("undecodable image file " + f.string() + ": " + e.what());
      }
      if (img.height != target_height || img.width != target_width)
        img = resize_bilinear(img, target_height, target_width);
      LabeledSample s;
      s.image = std::move(img);
      s.label = label;
      s.sample_id = cls + "/" + f.filename().string();
      data.samples.push_back(std::move(s));
    }
    ++label;
  }
  data.num_classes = label;
  data.validate();
  return data;
}

void export_image_folder(const DomainDataset& data, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  for (const auto& s : data.samples) {
    char cls[32];
    std::snprintf(cls, sizeof(cls), "class_%02d", s.label);
    const fs::path dir = root / cls;
    fs::create_directories(dir);
    std::string name = s.sample_id;
    std::replace(name.begin(), name.end(), '/', '_');
    write_png(dir / (name + ".png"), to_rgb8(s.image));
  }
}

DomainDataset concat_datasets(const std::vector<DomainDataset>& parts) {
  require(!parts.empty(), "cannot concatenate zero datasets");
  DomainDataset out;
  out.split = parts.front().split;
  out.num_classes = parts.front().num_classes;
  std::string tag;
  for (const auto& p : parts) {
    require(p.num_classes == out.num_classes, "class count mismatch in dataset union");
    tag += (tag.empty() ? "" : "+") + p.domain_tag;
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  }
  out.domain_tag = tag;
  out.validate();
  return out;
}

}  // namespace csuda
