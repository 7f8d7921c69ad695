#include "sandpile/stabilizer.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "symmetric.hpp"
#include "workspace.hpp"

namespace sandpile {
namespace detail {

namespace {
// counts + odometer + edge mask, plus the FIFO ring and in-queue flags.
constexpr std::uint64_t kBytesPerSite = 8 + 8 + 1 + 8 + 1;
}  // namespace

Workspace::Workspace(const IntegerField& config, std::uint64_t memory_cap_bytes)
    : box_(config.box()),
      two_d_(2 * config.dim()),
      memory_cap_bytes_(memory_cap_bytes),
      counts_(config.values()),
      odometer_(decltype(odometer_)::Zero(config.box().size())) {
  check_capacity(box_);
  rebuild_edge();
}

void Workspace::check_capacity(const LatticeBox& box) const {
  if (static_cast<std::uint64_t>(box.size()) > memory_cap_bytes_ / kBytesPerSite) {
    throw CapacityExceeded("lattice box of half-width " + std::to_string(box.half_width()) +
                           " exceeds the configured memory cap");
  }
}

void Workspace::rebuild_edge() {
  edge_.assign(static_cast<std::size_t>(box_.size()), 0);
  for (std::int64_t i = 0; i < box_.size(); ++i) edge_[i] = box_.on_edge(box_.site(i)) ? 1 : 0;
}

void Workspace::grow() {
  const LatticeBox big(box_.dim(), 2 * box_.half_width());
  check_capacity(big);
  decltype(counts_) counts = decltype(counts_)::Zero(big.size());
  decltype(odometer_) odometer = decltype(odometer_)::Zero(big.size());
  for (std::int64_t i = 0; i < box_.size(); ++i) {
    const std::int64_t j = big.index(box_.site(i));
    counts[j] = counts_[i];
    odometer[j] = odometer_[i];
  }
  box_ = big;
  counts_ = std::move(counts);
  odometer_ = std::move(odometer);
  rebuild_edge();
}

void Workspace::topple(std::int64_t i, std::int64_t times) {
  counts_[i] -= times * two_d_;
  add_topples(odometer_[i], times);
  for (int a = 0; a < box_.dim(); ++a) {
    counts_[i + box_.stride(a)] += times;
    counts_[i - box_.stride(a)] += times;
  }
}

IntegerField Workspace::final_field() const { return IntegerField(box_, 1.0, counts_); }

Odometer Workspace::odometer_field() const { return Odometer(box_, 1.0, odometer_); }

namespace {

template <int D>
PassStatus fifo_pass(Workspace& ws) {
  const LatticeBox& box = ws.box();
  const std::int64_t size = box.size();
  std::int64_t* const c = ws.counts();
  std::int64_t* const odo = ws.odometer();
  const std::uint8_t* const edge = ws.edge();
  constexpr std::int64_t two_d = 2 * D;
  std::array<std::int64_t, D> stride{};
  for (int a = 0; a < D; ++a) stride[a] = box.stride(a);

  // Each site is queued at most once, so a ring of `size` slots suffices.
  std::vector<std::int64_t> ring(static_cast<std::size_t>(size));
  std::vector<std::uint8_t> queued(static_cast<std::size_t>(size), 0);
  std::int64_t head = 0;
  std::int64_t pending = 0;
  auto push = [&](std::int64_t j) {
    std::int64_t slot = head + pending;
    if (slot >= size) slot -= size;
    ring[slot] = j;
    queued[j] = 1;
    ++pending;
  };

  for (std::int64_t i = 0; i < size; ++i) {
    if (c[i] < two_d) continue;
    if (edge[i]) return PassStatus::NeedsGrowth;
    push(i);
  }

  while (pending > 0) {
    const std::int64_t i = ring[head];
    if (++head == size) head = 0;
    --pending;
    queued[i] = 0;
    if (c[i] < two_d) continue;
    const std::int64_t t = c[i] / two_d;
    c[i] -= t * two_d;
    add_topples(odo[i], t);
    bool grow = false;
    for (int a = 0; a < D; ++a) {
      for (const std::int64_t j : {i + stride[a], i - stride[a]}) {
        c[j] += t;
        if (c[j] >= two_d && !queued[j]) {
          if (edge[j]) {
            grow = true;
          } else {
            push(j);
          }
        }
      }
    }
    if (grow) return PassStatus::NeedsGrowth;
  }
  return PassStatus::Stable;
}

PassStatus sweep_pass(Workspace& ws) {
  const std::int64_t size = ws.box().size();
  std::int64_t* const c = ws.counts();
  const std::uint8_t* const edge = ws.edge();
  const std::int64_t two_d = ws.two_d();
  bool toppled = true;
  while (toppled) {
    toppled = false;
    for (std::int64_t i = 0; i < size; ++i) {
      if (c[i] < two_d) continue;
      if (edge[i]) return PassStatus::NeedsGrowth;
      ws.topple(i, c[i] / two_d);
      toppled = true;
    }
  }
  return PassStatus::Stable;
}

PassStatus run_pass(Workspace& ws, const Strategy& strategy) {
  switch (strategy.kind) {
    case StrategyKind::FifoWorklist:
      switch (ws.box().dim()) {
        case 1: return fifo_pass<1>(ws);
        case 2: return fifo_pass<2>(ws);
        default: return fifo_pass<3>(ws);
      }
    case StrategyKind::FullSweep:
      return sweep_pass(ws);
    case StrategyKind::TiledParallel:
      return run_tiled(ws, strategy.tile_size, strategy.worker_count);
    case StrategyKind::RandomLegal:
      break;
  }
  throw FormatError("strategy not usable for deterministic stabilization");
}

}  // namespace
}  // namespace detail

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::FifoWorklist: return "fifo";
    case StrategyKind::FullSweep: return "sweep";
    case StrategyKind::TiledParallel: return "tiled";
    case StrategyKind::RandomLegal: return "random";
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  if (name == "fifo") return StrategyKind::FifoWorklist;
  if (name == "sweep") return StrategyKind::FullSweep;
  if (name == "tiled") return StrategyKind::TiledParallel;
  throw FormatError("unknown strategy '" + std::string(name) + "'");
}

LatticeBox trimmed_box(const IntegerField& a, const Odometer& b) {
  const std::int64_t r = std::max(support_half_width(a), support_half_width(b));
  return LatticeBox(a.dim(), std::max<std::int64_t>(r + 1, 1));
}

namespace {

void validate_strategy(const Strategy& s) {
  if (s.kind == StrategyKind::TiledParallel) {
    if (s.tile_size < 2) throw FormatError("tile size must be at least 2");
    if (s.worker_count < 1) throw FormatError("worker count must be at least 1");
  }
}

void check_mass(const IntegerField::Values& values) {
  constexpr std::int64_t kMassLimit = std::int64_t{1} << 62;
  std::int64_t mass = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] > 0 && __builtin_add_overflow(mass, values[i], &mass)) mass = kMassLimit;
    if (mass >= kMassLimit) throw CapacityExceeded("total chip count exceeds 2^62");
  }
}

SignedStabilizeResult finish(const IntegerField& final, const Odometer& odometer) {
  const LatticeBox box = trimmed_box(final, odometer);
  SignedStabilizeResult result{resize(final, box), resize(odometer, box), 0};
  result.total_topples = result.odometer.values().sum();
  return result;
}

StabilizeResult to_chip_result(SignedStabilizeResult r, const Strategy& strategy,
                               std::chrono::steady_clock::time_point start) {
  StabilizeResult out{retag<ChipTag>(r.final), std::move(r.odometer), r.total_topples, strategy,
                      std::chrono::steady_clock::now() - start};
  return out;
}

}  // namespace

SignedStabilizeResult stabilize_signed(const IntegerField& config, const Strategy& strategy,
                                       const StabilizeOptions& options) {
  validate_strategy(strategy);
  check_mass(config.values());
  const bool reducible =
      strategy.kind == StrategyKind::FifoWorklist || strategy.kind == StrategyKind::FullSweep;
  if (reducible && detail::is_fully_symmetric(config)) {
    auto [final, odometer] = detail::stabilize_symmetric(
        config, strategy.kind == StrategyKind::FifoWorklist, options.memory_cap_bytes);
    return finish(final, odometer);
  }
  detail::Workspace ws(config, options.memory_cap_bytes);
  while (detail::run_pass(ws, strategy) == detail::PassStatus::NeedsGrowth) ws.grow();
  return finish(ws.final_field(), ws.odometer_field());
}

StabilizeResult stabilize(const ChipGrid& eta, const Strategy& strategy, const StabilizeOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (eta.values().size() > 0 && eta.values().minCoeff() < 0) throw FormatError("negative chip count");
  return to_chip_result(stabilize_signed(retag<SignedTag>(eta), strategy, options), strategy, start);
}

std::int64_t initial_half_width(std::int64_t n, int dim) {
  if (n < 1) throw FormatError("chip count must be positive");
  const double nd = static_cast<double>(n);
  const double radius = dim == 2 ? 0.45 * std::sqrt(nd) : 0.35 * std::cbrt(nd);
  return static_cast<std::int64_t>(std::ceil(radius)) + 4;
}

ChipGrid point_pile(std::int64_t n, int dim) {
  if (dim != 2 && dim != 3) throw FormatError("point piles are supported for d = 2 and d = 3");
  ChipGrid eta(LatticeBox(dim, initial_half_width(n, dim)));
  eta[Site{0, 0, 0}] = n;
  return eta;
}

StabilizeResult stabilize_point_pile(std::int64_t n, int dim, const Strategy& strategy,
                                     const StabilizeOptions& options) {
  return stabilize(point_pile(n, dim), strategy, options);
}

StabilizeResult random_legal_run(const ChipGrid& eta, std::uint64_t seed, const StabilizeOptions& options,
                                 std::vector<Site>* sequence) {
  const auto start = std::chrono::steady_clock::now();
  if (eta.values().size() > 0 && eta.values().minCoeff() < 0) throw FormatError("negative chip count");
  check_mass(eta.values());
  detail::Workspace ws(retag<SignedTag>(eta), options.memory_cap_bytes);
  std::mt19937_64 rng(seed);
  const std::int64_t two_d = ws.two_d();
  std::int64_t recorded = 0;

  std::vector<std::int64_t> unstable;
  std::vector<std::int64_t> position;
  auto insert = [&](std::int64_t j) {
    position[j] = static_cast<std::int64_t>(unstable.size());
    unstable.push_back(j);
  };
  auto erase = [&](std::int64_t j) {
    const std::int64_t p = position[j];
    const std::int64_t last = unstable.back();
    unstable[p] = last;
    position[last] = p;
    unstable.pop_back();
    position[j] = -1;
  };

  for (bool grown = true; grown;) {
    grown = false;
    const LatticeBox& box = ws.box();
    std::int64_t* const c = ws.counts();
    const std::uint8_t* const edge = ws.edge();
    unstable.clear();
    position.assign(static_cast<std::size_t>(box.size()), -1);
    for (std::int64_t i = 0; i < box.size() && !grown; ++i) {
      if (c[i] < two_d) continue;
      if (edge[i]) grown = true;
      insert(i);
    }
    while (!grown && !unstable.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, unstable.size() - 1);
      const std::int64_t i = unstable[pick(rng)];
      ws.topple(i, 1);
      if (sequence != nullptr) {
        if (++recorded > options.max_recorded_topples) throw CapacityExceeded("toppling sequence too long to record");
        sequence->push_back(box.site(i));
      }
      if (c[i] < two_d) erase(i);
      for (int a = 0; a < box.dim() && !grown; ++a) {
        for (const std::int64_t j : {i + box.stride(a), i - box.stride(a)}) {
          if (c[j] < two_d || position[j] >= 0) continue;
          if (edge[j]) {
            grown = true;
            break;
          }
          insert(j);
        }
      }
    }
    if (grown) ws.grow();
  }
  Strategy tag{StrategyKind::RandomLegal, 0, 1};
  return to_chip_result(finish(ws.final_field(), ws.odometer_field()), tag, start);
}

ChipGrid random_configuration(int dim, std::int64_t half_width, std::int64_t max_count, std::mt19937_64& rng) {
  ChipGrid eta(LatticeBox(dim, half_width));
  std::uniform_int_distribution<std::int64_t> count(0, max_count);
  for (std::int64_t i = 0; i < eta.box().size(); ++i) eta.values()[i] = count(rng);
  return eta;
}

}  // namespace sandpile
