#pragma once

// Mutable toppling state shared by the stabilization strategies.

#include <cstdint>
#include <vector>

#include "sandpile/stabilizer.hpp"

namespace sandpile::detail {

enum class PassStatus { Stable, NeedsGrowth };

class Workspace {
 public:
  Workspace(const IntegerField& config, std::uint64_t memory_cap_bytes);

  const LatticeBox& box() const noexcept { return box_; }
  int two_d() const noexcept { return two_d_; }

  std::int64_t* counts() noexcept { return counts_.data(); }
  std::int64_t* odometer() noexcept { return odometer_.data(); }
  /// 1 for sites on the outer layer of the box, which are never toppled.
  const std::uint8_t* edge() const noexcept { return edge_.data(); }

  /// Doubles the half-width, keeping all state.
  void grow();

  /// Fires `times` topplings at once at interior site i.
  void topple(std::int64_t i, std::int64_t times);

  IntegerField final_field() const;
  Odometer odometer_field() const;

 private:
  void rebuild_edge();
  void check_capacity(const LatticeBox& box) const;

  LatticeBox box_;
  int two_d_;
  std::uint64_t memory_cap_bytes_;
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> counts_;
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> odometer_;
  std::vector<std::uint8_t> edge_;
};

/// Adds `times` to an odometer entry, throwing CapacityExceeded on overflow.
inline void add_topples(std::int64_t& entry, std::int64_t times) {
  if (__builtin_add_overflow(entry, times, &entry)) throw CapacityExceeded("odometer overflowed 64 bits");
}

PassStatus run_tiled(Workspace& ws, std::int64_t tile_size, int worker_count);

}  // namespace sandpile::detail
