#pragma once

#include <chrono>
#include <random>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sandpile/lattice.hpp"

namespace sandpile {

enum class StrategyKind { FifoWorklist, FullSweep, TiledParallel, RandomLegal };

struct Strategy {
  StrategyKind kind = StrategyKind::FifoWorklist;
  std::int64_t tile_size = 32;
  int worker_count = 1;

  static Strategy fifo() { return {}; }
  static Strategy sweep() { return {StrategyKind::FullSweep, 32, 1}; }
  static Strategy tiled(std::int64_t tile_size, int worker_count) {
    return {StrategyKind::TiledParallel, tile_size, worker_count};
  }
};

std::string_view to_string(StrategyKind kind);
/// Accepts "fifo", "sweep" and "tiled".
StrategyKind parse_strategy(std::string_view name);

struct StabilizeOptions {
  /// Upper bound on working memory; growing the box past it throws CapacityExceeded.
  std::uint64_t memory_cap_bytes = std::uint64_t{8} << 30;
  /// Longest toppling sequence random_legal_run will record.
  std::int64_t max_recorded_topples = 1'000'000;
};

struct StabilizeResult {
  ChipGrid final;
  Odometer odometer;
  std::int64_t total_topples = 0;
  Strategy strategy;
  std::chrono::nanoseconds wall_time{0};
};

/// Result of relaxing a configuration that may hold negative counts. Sites
/// with fewer than 2d chips never topple, so negative sites simply absorb.
struct SignedStabilizeResult {
  IntegerField final;
  Odometer odometer;
  std::int64_t total_topples = 0;
};

/// Topples every site holding at least 2d chips until none remain. The box
/// grows (doubling its half-width) whenever a site on its outer layer must
/// topple; the returned fields are trimmed to the smallest box that keeps a
/// one-site zero margin around the final pile and the odometer.
StabilizeResult stabilize(const ChipGrid& eta, const Strategy& strategy, const StabilizeOptions& options = {});

SignedStabilizeResult stabilize_signed(const IntegerField& config, const Strategy& strategy,
                                       const StabilizeOptions& options = {});

/// Box half-width used for n chips at the origin before any growth.
std::int64_t initial_half_width(std::int64_t n, int dim);

ChipGrid point_pile(std::int64_t n, int dim);

StabilizeResult stabilize_point_pile(std::int64_t n, int dim, const Strategy& strategy,
                                     const StabilizeOptions& options = {});

/// Stabilizes by single topplings at sites drawn uniformly from the
/// currently unstable ones. When `sequence` is non-null the toppled sites are
/// appended to it in order.
StabilizeResult random_legal_run(const ChipGrid& eta, std::uint64_t seed, const StabilizeOptions& options = {},
                                 std::vector<Site>* sequence = nullptr);

/// Independent uniform counts in [0, max_count] on every site of a box of
/// the given half-width.
ChipGrid random_configuration(int dim, std::int64_t half_width, std::int64_t max_count, std::mt19937_64& rng);

/// Smallest box keeping a one-site zero margin around the nonzero entries of
/// both fields (half-width at least 1).
LatticeBox trimmed_box(const IntegerField& a, const Odometer& b);

}  // namespace sandpile
