#include "sandpile/render.hpp"

#include <algorithm>
#include <set>

#include <zlib.h>

namespace sandpile {

Palette Palette::four_grays() { return {{{255, 255, 255}, {192, 192, 192}, {96, 96, 96}, {0, 0, 0}}}; }

Palette Palette::six_grays() {
  return {{{255, 255, 255}, {204, 204, 204}, {153, 153, 153}, {102, 102, 102}, {51, 51, 51}, {0, 0, 0}}};
}

Palette Palette::named(std::string_view name, int dim) {
  if (name == "default") return dim == 3 ? six_grays() : four_grays();
  if (name == "gray4") return four_grays();
  if (name == "gray6") return six_grays();
  throw FormatError("unknown palette '" + std::string(name) + "'");
}

Image render_image(const ChipGrid& s, const Palette& palette, const std::optional<Crop>& crop, std::int64_t plane) {
  const LatticeBox& box = s.box();
  const std::int64_t k = box.half_width();
  if (box.dim() < 2) throw FormatError("rendering needs d >= 2");
  const std::set<Rgb> distinct(palette.colors.begin(), palette.colors.end());
  if (distinct.size() != palette.colors.size()) throw FormatError("palette colours must be distinct");

  const Crop c = crop.value_or(Crop{-k, -k, k, k});
  if (c.x0 > c.x1 || c.y0 > c.y1) throw CropOutOfBounds("empty crop rectangle");
  for (const std::int64_t v : {c.x0, c.x1, c.y0, c.y1}) {
    if (v < -k || v > k) throw CropOutOfBounds("crop leaves the lattice box");
  }
  if (box.dim() == 3 && (plane < -k || plane > k)) throw CropOutOfBounds("slice plane outside the box");

  Image img;
  img.width = c.x1 - c.x0 + 1;
  img.height = c.y1 - c.y0 + 1;
  img.rgb.resize(static_cast<std::size_t>(3 * img.width * img.height));
  for (std::int64_t row = 0; row < img.height; ++row) {
    for (std::int64_t col = 0; col < img.width; ++col) {
      const Site z{c.x0 + col, c.y1 - row, box.dim() == 3 ? plane : 0};
      const std::int64_t count = s[z];
      if (count < 0 || count >= static_cast<std::int64_t>(palette.colors.size())) {
        throw FormatError("chip count " + std::to_string(count) + " has no palette colour");
      }
      const Rgb& rgb = palette.colors[static_cast<std::size_t>(count)];
      std::copy(rgb.begin(), rgb.end(), img.rgb.begin() + 3 * (row * img.width + col));
    }
  }
  return img;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* type, const std::vector<std::uint8_t>& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

  std::vector<std::uint8_t> header;
  put_u32(header, static_cast<std::uint32_t>(image.width));
  put_u32(header, static_cast<std::uint32_t>(image.height));
  header.insert(header.end(), {8, 2, 0, 0, 0});  // 8-bit RGB, deflate, no filter, no interlace
  put_chunk(out, "IHDR", header);

  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>((3 * image.width + 1) * image.height));
  for (std::int64_t row = 0; row < image.height; ++row) {
    raw.push_back(0);
    const auto begin = image.rgb.begin() + 3 * row * image.width;
    raw.insert(raw.end(), begin, begin + 3 * image.width);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw FormatError("zlib compression failed");
  }
  packed.resize(packed_size);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", {});
  return out;
}

std::vector<std::uint8_t> render_png(const ChipGrid& s, const Palette& palette, const std::optional<Crop>& crop,
                                     std::int64_t plane) {
  return encode_png(render_image(s, palette, crop, plane));
}

}  // namespace sandpile
