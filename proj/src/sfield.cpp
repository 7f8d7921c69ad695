#include "sandpile/sfield.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace sandpile {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void write_le(std::ostream& out, const T* data, std::int64_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  } else {
    for (std::int64_t i = 0; i < count; ++i) {
      char bytes[sizeof(T)];
      std::memcpy(bytes, data + i, sizeof(T));
      for (std::size_t b = 0; b < sizeof(T); ++b) out.put(bytes[sizeof(T) - 1 - b]);
    }
  }
}

template <typename T>
void read_le(std::istream& in, T* data, std::int64_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(T))) throw FormatError("sfield payload truncated");
  if constexpr (std::endian::native == std::endian::big) {
    for (std::int64_t i = 0; i < count; ++i) {
      char bytes[sizeof(T)];
      std::memcpy(bytes, data + i, sizeof(T));
      for (std::size_t b = 0; b < sizeof(T) / 2; ++b) std::swap(bytes[b], bytes[sizeof(T) - 1 - b]);
      std::memcpy(data + i, bytes, sizeof(T));
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string value_of(const std::string& token, const std::string& key) {
  if (token.rfind(key + "=", 0) != 0) throw FormatError("sfield header: expected " + key + "=");
  return token.substr(key.size() + 1);
}

template <typename T>
T parse_number(const std::string& text, const char* what) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw FormatError(std::string("sfield header: bad ") + what);
  }
  return value;
}

}  // namespace

std::string format_sfield_header(const SfieldHeader& header) {
  std::ostringstream os;
  os << "sfield v1 d=" << header.dim << " k=" << header.half_width << " h=" << format_double(header.h)
     << " dtype=" << (header.is_integer ? "i64" : "f64");
  return os.str();
}

SfieldHeader parse_sfield_header(const std::string& line) {
  std::istringstream is(line);
  std::string magic, version, d, k, h, dtype, extra;
  if (!(is >> magic >> version >> d >> k >> h >> dtype) || (is >> extra)) throw FormatError("sfield header: wrong token count");
  if (magic != "sfield" || version != "v1") throw FormatError("not an sfield v1 stream");
  SfieldHeader header;
  header.dim = parse_number<int>(value_of(d, "d"), "d");
  header.half_width = parse_number<std::int64_t>(value_of(k, "k"), "k");
  header.h = parse_number<double>(value_of(h, "h"), "h");
  const std::string type = value_of(dtype, "dtype");
  if (type == "i64") {
    header.is_integer = true;
  } else if (type == "f64") {
    header.is_integer = false;
  } else {
    throw FormatError("sfield header: unknown dtype " + type);
  }
  return header;
}

void write_sfield(std::ostream& out, const IntegerField& field) {
  out << format_sfield_header({field.dim(), field.box().half_width(), field.h(), true}) << '\n';
  write_le(out, field.values().data(), field.values().size());
}

void write_sfield(std::ostream& out, const RealField& field) {
  out << format_sfield_header({field.dim(), field.box().half_width(), field.h(), false}) << '\n';
  write_le(out, field.values().data(), field.values().size());
}

AnyField read_sfield(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty sfield stream");
  const SfieldHeader header = parse_sfield_header(line);
  const LatticeBox box(header.dim, header.half_width);
  if (header.is_integer) {
    IntegerField::Values values(box.size());
    read_le(in, values.data(), box.size());
    return IntegerField(box, header.h, std::move(values));
  }
  RealField::Values values(box.size());
  read_le(in, values.data(), box.size());
  return RealField(box, header.h, std::move(values));
}

void save_sfield(const std::filesystem::path& path, const AnyField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  std::visit([&](const auto& f) { write_sfield(out, f); }, field);
  if (!out) throw FormatError("write failed for " + path.string());
}

AnyField load_sfield(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_sfield(in);
}

ChipGrid load_chip_grid(const std::filesystem::path& path) {
  AnyField any = load_sfield(path);
  const auto* ints = std::get_if<IntegerField>(&any);
  if (ints == nullptr) throw FormatError(path.string() + ": expected dtype=i64 chip grid");
  return retag<ChipTag>(*ints);
}

}  // namespace sandpile
