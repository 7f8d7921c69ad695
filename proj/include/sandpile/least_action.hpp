#pragma once

// The odometer is the pointwise least nonnegative integer field v with
// eta + Delta^1 v <= 2d - 1. These routines check that statement on concrete
// instances and build stabilizing (not necessarily legal) witnesses.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "sandpile/stabilizer.hpp"

namespace sandpile {

struct StabilizingCheck {
  bool stabilizing = false;
  /// First offending site in raster order of v's box grown by one.
  std::optional<Site> violation;
};

/// Whether eta + Delta^1 v <= 2d - 1 everywhere. Throws BoxMismatch unless
/// v's box holds every site of {eta > 0} at least one step from its edge.
StabilizingCheck is_stabilizing(const ChipGrid& eta, const CandidateOdometer& v);

/// Whether odometer(eta) <= v pointwise. Throws NotStabilizing if v is not
/// stabilizing. A false return means the stabilizer is wrong.
bool check_least_action(const ChipGrid& eta, const CandidateOdometer& v, const StabilizeOptions& options = {});

/// Per-site multiplicities of a toppling sequence.
CandidateOdometer multiplicity(const std::vector<Site>& sequence, int dim);

/// Records two random legal stabilizing sequences and checks that they are
/// permutations of each other.
bool permutation_audit(const ChipGrid& eta, std::uint64_t seed_a, std::uint64_t seed_b,
                       const StabilizeOptions& options = {});

/// A stabilizing candidate built from the true odometer: a few extra forced
/// (possibly illegal) topplings at random sites near the pile, followed by
/// legal re-stabilization. `odometer` must be the odometer of eta and
/// `final` its stable configuration.
CandidateOdometer forced_candidate(const ChipGrid& final, const Odometer& odometer, std::mt19937_64& rng,
                                   const StabilizeOptions& options = {});

/// Pointwise a <= b, reading zero outside either box.
template <typename TagA, typename TagB>
bool dominated_by(const Field<std::int64_t, TagA>& a, const Field<std::int64_t, TagB>& b) {
  const LatticeBox& box = a.box();
  for (std::int64_t i = 0; i < box.size(); ++i) {
    if (a.values()[i] > b.value_or_zero(box.site(i))) return false;
  }
  const LatticeBox& other = b.box();
  for (std::int64_t i = 0; i < other.size(); ++i) {
    const Site s = other.site(i);
    if (!box.contains(s) && b.values()[i] < 0) return false;
  }
  return true;
}

}  // namespace sandpile
