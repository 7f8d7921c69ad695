#include <doctest.h>

#include <random>

#include "sandpile/least_action.hpp"
#include "support.hpp"

using namespace sandpile;

namespace {

CandidateOdometer candidate(const Odometer& v, std::int64_t k) { return resize(retag<CandidateTag>(v), LatticeBox(v.dim(), k)); }

}  // namespace

TEST_CASE("is_stabilizing examples") {
  const ChipGrid four = point_pile(4, 2);
  CandidateOdometer delta(LatticeBox(2, 2));
  delta[{0, 0, 0}] = 1;
  CHECK(is_stabilizing(four, delta).stabilizing);
  CHECK(check_least_action(four, delta));

  const StabilizingCheck zero = is_stabilizing(four, CandidateOdometer(LatticeBox(2, 2)));
  CHECK_FALSE(zero.stabilizing);
  REQUIRE(zero.violation.has_value());
  CHECK(*zero.violation == Site{0, 0, 0});
  CHECK_THROWS_AS(check_least_action(four, CandidateOdometer(LatticeBox(2, 2))), NotStabilizing);

  const ChipGrid sixteen = point_pile(16, 2);
  const StabilizeResult r = stabilize(sixteen, Strategy::fifo());
  CandidateOdometer far = candidate(r.odometer, 7);
  far[{5, 5, 0}] += 1;
  CHECK(is_stabilizing(sixteen, far).stabilizing);
  CHECK(check_least_action(sixteen, far));
}

TEST_CASE("first violation is in raster order") {
  ChipGrid eta(LatticeBox(2, 4));
  eta[{2, -1, 0}] = 5;
  eta[{-1, 3, 0}] = 4;
  const StabilizingCheck c = is_stabilizing(eta, CandidateOdometer(LatticeBox(2, 4)));
  CHECK_FALSE(c.stabilizing);
  CHECK(*c.violation == Site{-1, 3, 0});

  // Overshooting also breaks stability at a neighbour of the toppled site.
  ChipGrid calm(LatticeBox(2, 3));
  calm[{0, 1, 0}] = 3;
  CandidateOdometer v(LatticeBox(2, 3));
  v[{0, 0, 0}] = 1;
  const StabilizingCheck over = is_stabilizing(calm, v);
  CHECK_FALSE(over.stabilizing);
  CHECK(*over.violation == Site{0, 1, 0});
}

TEST_CASE("box compatibility") {
  ChipGrid eta(LatticeBox(2, 3));
  eta[{3, 0, 0}] = 1;
  CHECK_THROWS_AS(is_stabilizing(eta, CandidateOdometer(LatticeBox(2, 3))), BoxMismatch);
  CHECK_NOTHROW(is_stabilizing(eta, CandidateOdometer(LatticeBox(2, 4))));
  CHECK_THROWS_AS(is_stabilizing(eta, CandidateOdometer(LatticeBox(3, 5))), BoxMismatch);
  // A large eta box with small support is fine.
  ChipGrid roomy(LatticeBox(2, 20));
  roomy[{0, 0, 0}] = 2;
  CHECK(is_stabilizing(roomy, CandidateOdometer(LatticeBox(2, 1))).stabilizing);
}

TEST_CASE("forced candidates dominate the odometer") {
  std::mt19937_64 rng(99);
  int strict = 0;
  for (int j = 0; j < 4; ++j) {
    const ChipGrid eta = j == 0 ? point_pile(16, 2) : random_configuration(j < 3 ? 2 : 3, 4, j < 3 ? 7 : 10, rng);
    const StabilizeResult truth = stabilize(eta, Strategy::fifo());
    for (int c = 0; c < 50; ++c) {
      const CandidateOdometer v = forced_candidate(truth.final, truth.odometer, rng);
      REQUIRE(v.values().minCoeff() >= 0);
      REQUIRE(is_stabilizing(eta, v).stabilizing);
      CHECK(check_least_action(eta, v));
      CHECK(dominated_by(truth.odometer, v));
      if (!dominated_by(v, truth.odometer)) ++strict;
    }
    // The odometer itself is stabilizing and is the minimum.
    const CandidateOdometer u = candidate(truth.odometer, truth.odometer.box().half_width() + 1);
    CHECK(is_stabilizing(eta, u).stabilizing);
    CHECK(check_least_action(eta, u));
  }
  CHECK(strict == 200);
}

TEST_CASE("removing a topple from the odometer breaks stabilization") {
  const ChipGrid eta = point_pile(200, 2);
  const StabilizeResult truth = stabilize(eta, Strategy::fifo());
  const CandidateOdometer u = candidate(truth.odometer, truth.odometer.box().half_width() + 1);
  for (std::int64_t i = 0; i < u.box().size(); ++i) {
    if (u.values()[i] == 0) continue;
    CandidateOdometer less = u;
    less.values()[i] -= 1;
    CHECK_FALSE(is_stabilizing(eta, less).stabilizing);
  }
}

TEST_CASE("permutation audit") {
  std::vector<Site> a, b;
  random_legal_run(point_pile(4, 2), 1, {}, &a);
  random_legal_run(point_pile(4, 2), 2, {}, &b);
  CHECK(a == std::vector<Site>{{0, 0, 0}});
  CHECK(b == a);
  CHECK(permutation_audit(point_pile(4, 2), 1, 2));

  std::vector<Site> seq;
  const StabilizeResult r16 = random_legal_run(point_pile(16, 2), 5, {}, &seq);
  const CandidateOdometer m = multiplicity(seq, 2);
  CHECK(m[{0, 0, 0}] == 5);
  CHECK(m.values().sum() == 9);
  CHECK(dominated_by(m, r16.odometer));
  CHECK(dominated_by(r16.odometer, m));
  CHECK(permutation_audit(point_pile(16, 2), 3, 4));

  std::mt19937_64 rng(17);
  for (int j = 0; j < 10; ++j) {
    const ChipGrid eta = random_configuration(2, 5, 8, rng);
    CHECK(permutation_audit(eta, rng(), rng()));
    std::vector<Site> s;
    const StabilizeResult r = random_legal_run(eta, rng(), {}, &s);
    const CandidateOdometer mult = multiplicity(s, 2);
    CHECK(dominated_by(mult, r.odometer));
    CHECK(dominated_by(r.odometer, mult));
  }

  StabilizeOptions small;
  small.max_recorded_topples = 100;
  CHECK_THROWS_AS(permutation_audit(point_pile(1000, 2), 1, 2, small), CapacityExceeded);
}
