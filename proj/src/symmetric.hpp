#pragma once

#include <utility>

#include "sandpile/lattice.hpp"

namespace sandpile::detail {

/// True when the configuration is invariant under coordinate sign flips and
/// permutations.
bool is_fully_symmetric(const IntegerField& config);

/// Stabilizes a fully symmetric configuration on the fundamental domain,
/// with either a FIFO worklist or raster sweeps. Returns the final
/// configuration and odometer on the (possibly grown) box.
std::pair<IntegerField, Odometer> stabilize_symmetric(const IntegerField& config, bool fifo,
                                                      std::uint64_t memory_cap_bytes);

}  // namespace sandpile::detail
