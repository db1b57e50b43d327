#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csuda/dataset.hpp"

namespace csuda {

/// Deterministic per-sample domain transform. `name` selects the pipeline;
/// the scalars parameterize it. Unknown names are rejected.
///
/// Built-in names: "identity", "hue_rotate" (hue_shift turns), "invert_flat"
/// (inversion + posterize_levels flat shading), "edge_map" (Sobel magnitude),
/// "rotate" (rotation_deg about the center).
struct DomainTransformSpec {
  std::string name = "identity";
  float hue_shift = 0.0f;       // fraction of the hue circle, in [-1, 1]
  float rotation_deg = 0.0f;    // geometric rotation
  bool invert = false;
  bool edge_filter = false;
  int posterize_levels = 0;     // 0 disables flat shading
  float noise_sigma = 0.02f;    // additive Gaussian pixel noise, pre-transform
};

/// The four built-in toy domains: "photo" (identity), "art" (hue-rotated),
/// "cartoon" (color-inverted, flat-shaded), "sketch" (edge map).
DomainTransformSpec builtin_domain(const std::string& domain);
bool is_builtin_domain(const std::string& domain);

/// Renders a multi-domain toy classification benchmark: `num_classes`
/// distinct geometric glyphs (disk, ring, square, diamond, triangle, cross,
/// saltire, ...) with per-sample translation/scale jitter and pixel noise,
/// passed through the domain transform. Deterministic for a fixed seed;
/// per-sample RNG streams are derived from (seed, split, class, index).
DomainDataset generate_shiftshapes(int num_classes, int per_class, const DomainTransformSpec& domain,
                                   std::uint64_t seed, const std::string& split = "train");

/// Loads root/<class_name>/<image files> (PNG). Class names sorted
/// lexicographically define label indices; empty class directories are
/// skipped with a warning. Images are resized bilinearly to `target` pixels
/// and scaled to [0,1].
DomainDataset load_image_folder(const std::filesystem::path& root, const std::string& split,
                                int target_height = 32, int target_width = 32);

/// Writes a dataset in the image-folder layout (8-bit RGB PNG), mirroring
/// what load_image_folder expects.
void export_image_folder(const DomainDataset& data, const std::filesystem::path& root);

namespace detail {
// Exposed for tests: base glyph render before any domain transform.
Image render_glyph(int glyph, int num_classes, int height, int width, std::uint64_t sample_seed);
Image apply_transform(const Image& img, const DomainTransformSpec& spec);
}  // namespace detail

}  // namespace csuda
