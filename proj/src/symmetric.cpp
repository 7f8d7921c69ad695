// Stabilization of configurations invariant under the hyperoctahedral group
// (coordinate sign flips and permutations).
//
// For such a configuration every legal toppling can be applied to a whole
// orbit at once: distinct images of a site are never lattice neighbours, so
// firing them one after another is legal. The state is then carried on the
// fundamental domain x_0 >= x_1 >= ... >= x_{d-1} >= 0 only. A canonical site
// x firing t times sends to each canonical y the amount
//   t * #{x' in orbit(x) : x' ~ y},
// which is precomputed as an integer weight.

#include <algorithm>

#include "symmetric.hpp"
#include "workspace.hpp"

namespace sandpile::detail {
namespace {

Site canonical(Site z, int dim) {
  for (int a = 0; a < dim; ++a) z[a] = std::abs(z[a]);
  std::sort(z.begin(), z.begin() + dim, std::greater<>());
  return z;
}

bool is_canonical(const Site& z, int dim) {
  if (z[dim - 1] < 0) return false;
  for (int a = 0; a + 1 < dim; ++a) {
    if (z[a] < z[a + 1]) return false;
  }
  return true;
}

constexpr std::uint64_t kBytesPerSite = 8 + 8 + 1 + 8 + 1 + 3 * 8 + 3 * 8;

class ReducedLattice {
 public:
  ReducedLattice(const LatticeBox& box, std::uint64_t memory_cap_bytes) : box_(box) {
    const int dim = box.dim();
    slots_ = 2 * dim;
    std::vector<std::int64_t> compact(static_cast<std::size_t>(box.size()), -1);
    for (std::int64_t i = 0; i < box.size(); ++i) {
      const Site s = box.site(i);
      if (!is_canonical(s, dim)) continue;
      compact[i] = static_cast<std::int64_t>(sites_.size());
      sites_.push_back(s);
    }
    const std::size_t m = sites_.size();
    if (m > memory_cap_bytes / kBytesPerSite) throw CapacityExceeded("reduced lattice exceeds the configured memory cap");
    target_.assign(m * slots_, 0);
    weight_.assign(m * slots_, 0);
    degree_.assign(m, 0);
    edge_.assign(m, 0);
    for (std::size_t y = 0; y < m; ++y) {
      const Site& s = sites_[y];
      edge_[y] = box.on_edge(s) ? 1 : 0;
      for (int a = 0; a < dim; ++a) {
        for (const std::int64_t sign : {1, -1}) {
          const Site z = s + unit_site(a, sign);
          if (!box.contains(z)) continue;
          const auto x = static_cast<std::size_t>(compact[box.index(canonical(z, dim))]);
          add_weight(x, static_cast<std::int64_t>(y));
        }
      }
    }
    full_to_reduced_ = std::move(compact);
  }

  const LatticeBox& box() const noexcept { return box_; }
  std::size_t size() const noexcept { return sites_.size(); }
  int slots() const noexcept { return slots_; }
  const Site& site(std::size_t x) const noexcept { return sites_[x]; }
  const std::int64_t* target() const noexcept { return target_.data(); }
  const std::int64_t* weight() const noexcept { return weight_.data(); }
  const std::uint8_t* degree() const noexcept { return degree_.data(); }
  const std::uint8_t* edge() const noexcept { return edge_.data(); }
  std::int64_t reduced_index(const Site& s) const {
    return full_to_reduced_[box_.index(canonical(s, box_.dim()))];
  }

 private:
  void add_weight(std::size_t x, std::int64_t y) {
    const std::size_t base = x * slots_;
    for (std::uint8_t k = 0; k < degree_[x]; ++k) {
      if (target_[base + k] == y) {
        ++weight_[base + k];
        return;
      }
    }
    target_[base + degree_[x]] = y;
    weight_[base + degree_[x]] = 1;
    ++degree_[x];
  }

  LatticeBox box_;
  int slots_ = 0;
  std::vector<Site> sites_;
  std::vector<std::int64_t> target_;
  std::vector<std::int64_t> weight_;
  std::vector<std::uint8_t> degree_;
  std::vector<std::uint8_t> edge_;
  std::vector<std::int64_t> full_to_reduced_;
};

struct ReducedState {
  std::vector<std::int64_t> counts;
  std::vector<std::int64_t> odometer;
};

ReducedState restrict_to(const ReducedLattice& lattice, const IntegerField& counts, const Odometer& odometer) {
  ReducedState state;
  state.counts.resize(lattice.size());
  state.odometer.resize(lattice.size());
  for (std::size_t x = 0; x < lattice.size(); ++x) {
    state.counts[x] = counts.value_or_zero(lattice.site(x));
    state.odometer[x] = odometer.value_or_zero(lattice.site(x));
  }
  return state;
}

PassStatus reduced_pass(const ReducedLattice& lattice, ReducedState& state, bool fifo) {
  const std::int64_t two_d = 2 * lattice.box().dim();
  const auto m = static_cast<std::int64_t>(lattice.size());
  const int slots = lattice.slots();
  std::int64_t* const c = state.counts.data();
  std::int64_t* const odo = state.odometer.data();
  const std::int64_t* const target = lattice.target();
  const std::int64_t* const weight = lattice.weight();
  const std::uint8_t* const degree = lattice.degree();
  const std::uint8_t* const edge = lattice.edge();

  auto fire = [&](std::int64_t x, auto&& on_receive) {
    const std::int64_t t = c[x] / two_d;
    c[x] -= t * two_d;
    add_topples(odo[x], t);
    const std::int64_t base = x * slots;
    for (std::uint8_t k = 0; k < degree[x]; ++k) {
      const std::int64_t y = target[base + k];
      c[y] += weight[base + k] * t;
      on_receive(y);
    }
  };

  if (!fifo) {
    bool toppled = true;
    while (toppled) {
      toppled = false;
      for (std::int64_t x = 0; x < m; ++x) {
        if (c[x] < two_d) continue;
        if (edge[x]) return PassStatus::NeedsGrowth;
        fire(x, [](std::int64_t) {});
        toppled = true;
      }
    }
    return PassStatus::Stable;
  }

  std::vector<std::int64_t> ring(static_cast<std::size_t>(m));
  std::vector<std::uint8_t> queued(static_cast<std::size_t>(m), 0);
  std::int64_t head = 0;
  std::int64_t pending = 0;
  bool grow = false;
  auto push = [&](std::int64_t y) {
    if (c[y] < two_d || queued[y]) return;
    if (edge[y]) {
      grow = true;
      return;
    }
    std::int64_t slot = head + pending;
    if (slot >= m) slot -= m;
    ring[slot] = y;
    queued[y] = 1;
    ++pending;
  };
  for (std::int64_t x = 0; x < m && !grow; ++x) push(x);
  while (pending > 0 && !grow) {
    const std::int64_t x = ring[head];
    if (++head == m) head = 0;
    --pending;
    queued[x] = 0;
    if (c[x] < two_d) continue;
    fire(x, push);
  }
  return grow ? PassStatus::NeedsGrowth : PassStatus::Stable;
}

}  // namespace

bool is_fully_symmetric(const IntegerField& config) {
  const LatticeBox& box = config.box();
  for (std::int64_t i = 0; i < box.size(); ++i) {
    const Site s = box.site(i);
    if (config.values()[i] != config[canonical(s, box.dim())]) return false;
  }
  return true;
}

std::pair<IntegerField, Odometer> stabilize_symmetric(const IntegerField& config, bool fifo,
                                                      std::uint64_t memory_cap_bytes) {
  LatticeBox box = config.box();
  IntegerField counts = config;
  Odometer odometer(box);
  for (;;) {
    const ReducedLattice lattice(box, memory_cap_bytes);
    ReducedState state = restrict_to(lattice, counts, odometer);
    const PassStatus status = reduced_pass(lattice, state, fifo);

    counts = IntegerField(box);
    odometer = Odometer(box);
    for (std::int64_t i = 0; i < box.size(); ++i) {
      const std::int64_t x = lattice.reduced_index(box.site(i));
      counts.values()[i] = state.counts[x];
      odometer.values()[i] = state.odometer[x];
    }
    if (status == PassStatus::Stable) break;
    box = LatticeBox(box.dim(), 2 * box.half_width());
    counts = resize(counts, box);
    odometer = resize(odometer, box);
  }
  return {std::move(counts), std::move(odometer)};
}

}  // namespace sandpile::detail
