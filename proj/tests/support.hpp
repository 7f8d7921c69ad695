#pragma once

#include "oracle.hpp"
#include "sandpile/lattice.hpp"

namespace support {

template <typename Tag>
oracle::Sparse to_sparse(const sandpile::Field<std::int64_t, Tag>& f) {
  oracle::Sparse out;
  for (std::int64_t i = 0; i < f.box().size(); ++i) {
    if (f.values()[i] != 0) {
      const sandpile::Site s = f.box().site(i);
      out[{s[0], s[1], s[2]}] = f.values()[i];
    }
  }
  return out;
}

inline sandpile::ChipGrid from_sparse(const oracle::Sparse& m, int dim, std::int64_t k) {
  sandpile::ChipGrid g(sandpile::LatticeBox(dim, k));
  for (const auto& [c, v] : m) g[{c[0], c[1], c[2]}] = v;
  return g;
}

}  // namespace support
