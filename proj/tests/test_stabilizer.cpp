#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "sandpile/analysis.hpp"
#include "sandpile/least_action.hpp"
#include "sandpile/stabilizer.hpp"
#include "support.hpp"

using namespace sandpile;
using support::to_sparse;

namespace {

void check_exact(const ChipGrid& eta, const StabilizeResult& r) {
  const std::int64_t two_d = 2 * eta.dim();
  CHECK(r.final.values().sum() == eta.values().sum());
  CHECK(r.final.values().minCoeff() >= 0);
  CHECK(r.final.values().maxCoeff() < two_d);
  const IntegerField lap = apply_laplacian(r.odometer);
  lap.box().for_each_site(
      [&](const Site& z) { REQUIRE(r.final.value_or_zero(z) == eta.value_or_zero(z) + lap[z]); });
  CHECK(r.total_topples == r.odometer.values().sum());
}

void check_against_oracle(const ChipGrid& eta, const StabilizeResult& r) {
  const oracle::Stable o = oracle::naive_fifo(to_sparse(eta), eta.dim());
  CHECK(to_sparse(r.final) == o.final);
  CHECK(to_sparse(r.odometer) == o.odometer);
  CHECK(r.total_topples == o.topples);
}

const std::vector<Strategy> kStrategies = {Strategy::fifo(), Strategy::sweep(), Strategy::tiled(2, 1),
                                           Strategy::tiled(3, 3), Strategy::tiled(32, 2)};

}  // namespace

TEST_CASE("trivial piles") {
  for (const Strategy& s : kStrategies) {
    const StabilizeResult three = stabilize(point_pile(3, 2), s);
    CHECK(to_sparse(three.final) == oracle::Sparse{{{0, 0, 0}, 3}});
    CHECK(three.odometer.values().sum() == 0);

    const StabilizeResult four = stabilize(point_pile(4, 2), s);
    CHECK(to_sparse(four.final) ==
          oracle::Sparse{{{-1, 0, 0}, 1}, {{1, 0, 0}, 1}, {{0, -1, 0}, 1}, {{0, 1, 0}, 1}});
    CHECK(to_sparse(four.odometer) == oracle::Sparse{{{0, 0, 0}, 1}});

    const StabilizeResult six = stabilize(point_pile(6, 3), s);
    CHECK(to_sparse(six.final).size() == 6);
    CHECK(six.final[{0, 0, 0}] == 0);
    CHECK(to_sparse(six.odometer) == oracle::Sparse{{{0, 0, 0}, 1}});
    CHECK(six.strategy.kind == s.kind);
  }
}

TEST_CASE("sixteen chips by hand") {
  // Origin topples 4 times, each axis neighbour once, then the origin once more.
  oracle::Sparse final = {{{0, 0, 0}, 0}};
  oracle::Sparse odo = {{{0, 0, 0}, 5}};
  for (const oracle::Coord& e : oracle::neighbours({0, 0, 0}, 2)) {
    final[e] = 1;
    odo[e] = 1;
    final[{2 * e[0], 2 * e[1], 0}] = 1;
  }
  for (std::int64_t x : {-1, 1}) {
    for (std::int64_t y : {-1, 1}) final[{x, y, 0}] = 2;
  }
  final.erase({0, 0, 0});
  for (const Strategy& s : kStrategies) {
    const StabilizeResult r = stabilize_point_pile(16, 2, s);
    CHECK(to_sparse(r.final) == final);
    CHECK(to_sparse(r.odometer) == odo);
    CHECK(r.total_topples == 9);
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const StabilizeResult r = random_legal_run(point_pile(16, 2), seed);
    CHECK(to_sparse(r.final) == final);
    CHECK(to_sparse(r.odometer) == odo);
  }
}

TEST_CASE("small point piles against the naive oracle") {
  for (const std::int64_t n : {1, 3, 4, 5, 7, 8, 16, 17, 100, 1000, 5000}) {
    for (const Strategy& s : kStrategies) {
      const ChipGrid eta = point_pile(n, 2);
      const StabilizeResult r = stabilize(eta, s);
      check_exact(eta, r);
      check_against_oracle(eta, r);
    }
  }
  for (const std::int64_t n : {6, 7, 50, 500}) {
    for (const Strategy& s : kStrategies) {
      const ChipGrid eta = point_pile(n, 3);
      const StabilizeResult r = stabilize(eta, s);
      check_exact(eta, r);
      check_against_oracle(eta, r);
    }
  }
}

TEST_CASE("random configurations agree across strategies and legal orders") {
  std::mt19937_64 rng(2024);
  for (int j = 0; j < 6; ++j) {
    const int d = j % 2 == 0 ? 2 : 3;
    const ChipGrid eta = random_configuration(d, d == 2 ? 10 : 4, d == 2 ? 8 : 12, rng);
    const StabilizeResult ref = stabilize(eta, Strategy::fifo());
    check_exact(eta, ref);
    check_against_oracle(eta, ref);
    for (const Strategy& s : kStrategies) {
      const StabilizeResult r = stabilize(eta, s);
      CHECK(r.final == ref.final);
      CHECK(r.odometer == ref.odometer);
    }
    for (int k = 0; k < 5; ++k) {
      const StabilizeResult r = random_legal_run(eta, rng());
      CHECK(r.final == ref.final);
      CHECK(r.odometer == ref.odometer);
      CHECK(r.strategy.kind == StrategyKind::RandomLegal);
    }
  }
}

TEST_CASE("box growth and trimming") {
  // Initial box is tiny compared to the final pile: growth must kick in.
  ChipGrid eta(LatticeBox(2, 1));
  eta[{0, 0, 0}] = 2000;
  eta[{1, 1, 0}] = 7;
  for (const Strategy& s : kStrategies) {
    const StabilizeResult g = stabilize(eta, s);
    check_exact(eta, g);
    check_against_oracle(eta, g);
  }
  const StabilizeResult r = stabilize(eta, Strategy::fifo());
  const std::int64_t support = std::max(support_half_width(r.final), support_half_width(r.odometer));
  CHECK(r.final.box().half_width() == support + 1);
  CHECK(r.odometer.box() == r.final.box());

  // An off-centre, asymmetric pile goes through the general path.
  ChipGrid off(LatticeBox(2, 6));
  off[{5, -3, 0}] = 300;
  for (const Strategy& s : kStrategies) {
    const StabilizeResult ro = stabilize(off, s);
    check_exact(off, ro);
    check_against_oracle(off, ro);
  }

  // Already stable input is returned unchanged (up to trimming).
  ChipGrid calm(LatticeBox(2, 5));
  calm[{2, 2, 0}] = 3;
  const StabilizeResult rc = stabilize(calm, Strategy::fifo());
  CHECK(rc.total_topples == 0);
  CHECK(to_sparse(rc.final) == to_sparse(calm));
}

TEST_CASE("initial box and point pile preconditions") {
  CHECK(initial_half_width(100000, 2) == 147);  // ceil(0.45 * 316.23) + 4
  CHECK(initial_half_width(1000, 3) == 8);      // ceil(0.35 * 10) + 4
  CHECK_THROWS(point_pile(0, 2));
  CHECK_THROWS(point_pile(5, 4));
  CHECK_THROWS_AS(stabilize(point_pile(16, 2), Strategy{StrategyKind::TiledParallel, 1, 1}), FormatError);
  CHECK_THROWS_AS(stabilize(point_pile(16, 2), Strategy{StrategyKind::TiledParallel, 4, 0}), FormatError);
  CHECK(parse_strategy("tiled") == StrategyKind::TiledParallel);
  CHECK(to_string(StrategyKind::FullSweep) == "sweep");
  CHECK_THROWS(parse_strategy("magic"));
}

TEST_CASE("memory cap") {
  StabilizeOptions tight;
  tight.memory_cap_bytes = 4096;
  CHECK_THROWS_AS(stabilize_point_pile(100000, 2, Strategy::fifo(), tight), CapacityExceeded);
  CHECK_THROWS_AS(stabilize_point_pile(100000, 2, Strategy::tiled(8, 2), tight), CapacityExceeded);
  StabilizeOptions record;
  record.max_recorded_topples = 10;
  std::vector<Site> seq;
  CHECK_THROWS_AS(random_legal_run(point_pile(100, 2), 1, record, &seq), CapacityExceeded);
}

TEST_CASE("odometers increase with n") {
  const std::vector<std::int64_t> schedule = {100, 400, 1600, 6400};
  std::vector<StabilizeResult> runs;
  for (std::int64_t n : schedule) runs.push_back(stabilize_point_pile(n, 2, Strategy::sweep()));
  for (std::size_t j = 0; j + 1 < runs.size(); ++j) CHECK(dominated_by(runs[j].odometer, runs[j + 1].odometer));
}

TEST_CASE("signed relaxation") {
  IntegerField cfg(LatticeBox(2, 4));
  cfg[{0, 0, 0}] = 9;
  cfg[{1, 0, 0}] = -5;
  const SignedStabilizeResult r = stabilize_signed(cfg, Strategy::fifo());
  CHECK(r.final.values().sum() == 4);
  CHECK(r.final.values().maxCoeff() < 4);
  const IntegerField lap = apply_laplacian(r.odometer);
  lap.box().for_each_site([&](const Site& z) { CHECK(r.final.value_or_zero(z) == cfg.value_or_zero(z) + lap[z]); });
}

TEST_CASE("radius of n = 1e5") {
  const StabilizeResult r = stabilize_point_pile(100000, 2, Strategy::sweep());
  CHECK(r.final.values().sum() == 100000);
  CHECK(r.final.values().maxCoeff() == 3);
  CHECK(measured_radius(r.final) <= 0.45 * std::sqrt(100000.0));
  const StabilizeResult f = stabilize_point_pile(100000, 2, Strategy::fifo());
  CHECK(f.final == r.final);
  CHECK(f.odometer == r.odometer);
}
