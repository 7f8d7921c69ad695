#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sandpile/lattice.hpp"

namespace sandpile {

using Rgb = std::array<std::uint8_t, 3>;

/// Colour for each chip count 0..2d-1.
struct Palette {
  std::vector<Rgb> colors;

  /// White, light gray, dark gray, black for counts 0..3.
  static Palette four_grays();
  /// White-to-black ramp over counts 0..5, for d = 3 slices.
  static Palette six_grays();
  /// "default" picks four_grays for d = 2 and six_grays for d = 3; "gray6"
  /// forces the six-level ramp.
  static Palette named(std::string_view name, int dim);
};

/// Inclusive lattice rectangle [x0, x1] x [y0, y1] on axes 0 and 1.
struct Crop {
  std::int64_t x0 = 0;
  std::int64_t y0 = 0;
  std::int64_t x1 = 0;
  std::int64_t y1 = 0;
};

/// Raw 8-bit RGB raster, rows top to bottom.
struct Image {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<std::uint8_t> rgb;

  Rgb pixel(std::int64_t col, std::int64_t row) const {
    const auto o = static_cast<std::size_t>(3 * (row * width + col));
    return {rgb[o], rgb[o + 1], rgb[o + 2]};
  }
};

/// One pixel per site of the crop (default: the whole box). Column c shows
/// x = x0 + c, row r shows y = y1 - r. For d = 3 the slice at axis-2
/// coordinate `plane` is drawn.
Image render_image(const ChipGrid& s, const Palette& palette, const std::optional<Crop>& crop = std::nullopt,
                   std::int64_t plane = 0);

std::vector<std::uint8_t> encode_png(const Image& image);

std::vector<std::uint8_t> render_png(const ChipGrid& s, const Palette& palette,
                                     const std::optional<Crop>& crop = std::nullopt, std::int64_t plane = 0);

}  // namespace sandpile
