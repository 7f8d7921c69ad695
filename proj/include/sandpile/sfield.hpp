#pragma once

// "sfield v1" interchange format: one ASCII header line
//   sfield v1 d=<d> k=<k> h=<decimal> dtype=<i64|f64>\n
// followed by (2k+1)^d little-endian values in row-major order (axis 0
// slowest).

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "sandpile/lattice.hpp"

namespace sandpile {

struct SfieldHeader {
  int dim = 2;
  std::int64_t half_width = 1;
  double h = 1.0;
  bool is_integer = true;
};

std::string format_sfield_header(const SfieldHeader& header);
SfieldHeader parse_sfield_header(const std::string& line);

void write_sfield(std::ostream& out, const IntegerField& field);
void write_sfield(std::ostream& out, const RealField& field);

template <typename Tag>
void write_sfield(std::ostream& out, const Field<std::int64_t, Tag>& field) {
  write_sfield(out, retag<SignedTag>(field));
}

using AnyField = std::variant<IntegerField, RealField>;

AnyField read_sfield(std::istream& in);

void save_sfield(const std::filesystem::path& path, const AnyField& field);
AnyField load_sfield(const std::filesystem::path& path);

/// Loads an i64 field and checks it is a valid (nonnegative) chip grid.
ChipGrid load_chip_grid(const std::filesystem::path& path);

}  // namespace sandpile
