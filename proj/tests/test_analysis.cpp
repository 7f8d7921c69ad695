#include <doctest.h>

#include <random>

#include "sandpile/analysis.hpp"

using namespace sandpile;

TEST_CASE("test functions") {
  const TestFunction b = TestFunction::bump(Point(0.1, 0, 0), 0.5);
  CHECK(b(Point(0.1, 0, 0)) == 1.0);
  CHECK(b(Point(0.6, 0, 0)) == 0.0);
  CHECK(b(Point(0.35, 0, 0)) == doctest::Approx(std::exp(1.0 - 1.0 / 0.75)));

  const TestFunction pb = TestFunction::parse("polybump:0,0:0.5:1,2", 2);
  CHECK(pb.kind() == TestFunction::Kind::PolyBump);
  const Point x(0.2, -0.1, 0);
  CHECK(pb(x) == doctest::Approx(0.4 * 0.04 * TestFunction::bump(Point::Zero(), 0.5)(x)));

  const TestFunction pl = TestFunction::parse("plateau:0:0.3:0.6", 2);
  CHECK(pl(Point(0.29, 0.0, 0)) == 1.0);
  CHECK(pl(Point(0.6, 0.0, 0)) == 0.0);
  const double mid = pl(Point(0.45, 0, 0));
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int j = 0; j < 500; ++j) {
    const Point p(u(rng), u(rng), 0);
    for (const TestFunction& f : {b, pb, pl}) {
      CHECK(std::abs(f(p)) <= 1.0);
      if (euclidean_norm(Point(p - f.center())) >= f.support_radius()) CHECK(f(p) == 0.0);
    }
  }

  CHECK(TestFunction::parse("bump:0.25,-0.5:0.3", 2).center()[1] == -0.5);
  CHECK(TestFunction::parse("bump:0:0.3", 3).describe(3) == "bump:0,0,0:0.29999999999999999");
  CHECK_THROWS_AS(TestFunction::parse("bump:0,0:0.3", 3), FormatError);
  CHECK_THROWS_AS(TestFunction::parse("bump:0:-1", 2), FormatError);
  CHECK_THROWS_AS(TestFunction::parse("wave:0:1", 2), FormatError);
  CHECK_THROWS_AS(TestFunction::parse("plateau:0:0.5:0.4", 2), FormatError);
}

TEST_CASE("pairing") {
  const StabilizeResult r = stabilize_point_pile(1000, 2, Strategy::sweep());
  const RealField sbar = rescale_chips(resize(r.final, LatticeBox(2, 40)), 1000);
  const double rho = measured_radius(r.final) * sbar.h();
  const TestFunction cover = TestFunction::plateau(Point::Zero(), 1.01 * rho, 1.2 * rho);
  CHECK(std::abs(pair(sbar, cover) - 1.0) <= 1e-12);

  const RealField zero(LatticeBox(2, 40), sbar.h());
  CHECK(pair(zero, TestFunction::bump(Point::Zero(), 0.3)) == 0.0);

  // Linear in phi and in sbar.
  const TestFunction f = TestFunction::bump(Point(0.1, 0, 0), 0.3);
  const TestFunction g = TestFunction::poly_bump(Point::Zero(), 0.35, {2, 0, 0});
  const double a = 0.7, c = -2.25;
  const double combo = pair_with(sbar, [&](const Point& x) { return a * f(x) + c * g(x); });
  CHECK(std::abs(combo - (a * pair(sbar, f) + c * pair(sbar, g))) <= 1e-12 * std::abs(combo));
  RealField twice = sbar;
  twice.values() = 2.0 * sbar.values() - 0.5 * sbar.values();
  CHECK(std::abs(pair(twice, f) - 1.5 * pair(sbar, f)) <= 1e-12 * std::abs(pair(twice, f)));

  // Support must stay inside the covered region [-(k+1/2)h, (k+1/2)h].
  const double edge = 40.5 * sbar.h();
  CHECK_NOTHROW(pair(sbar, TestFunction::bump(Point::Zero(), edge)));
  CHECK_THROWS_AS(pair(sbar, TestFunction::bump(Point::Zero(), edge * 1.001)), SupportEscape);
  CHECK_THROWS_AS(pair(sbar, TestFunction::bump(Point(0, 0.5, 0), 0.9)), SupportEscape);
}

TEST_CASE("measured radius") {
  ChipGrid three(LatticeBox(2, 1));
  three[{0, 0, 0}] = 3;
  CHECK(measured_radius(three) == 0.0);
  CHECK(measured_radius(ChipGrid(LatticeBox(2, 2))) == 0.0);
  CHECK(measured_radius(stabilize_point_pile(4, 2, Strategy::fifo()).final) == 1.0);
  CHECK(measured_radius(stabilize_point_pile(16, 2, Strategy::fifo()).final) == 2.0);
}

TEST_CASE("w field") {
  const std::int64_t n = 2000;
  const StabilizeResult r = stabilize_point_pile(n, 2, Strategy::sweep());
  GreenProblem p;
  p.n = n;
  p.outer_radius = 1.6 * barrier_radius(r.odometer, n);
  const GreenSolution g = solve_phi_n(p);
  const RealField w = wbar_field(r.odometer, g.phi, n);
  const double h = g.phi.h();
  const double rho = measured_radius(r.final);
  w.box().for_each_site([&](const Site& z) {
    if (euclidean_norm(z) > rho) CHECK(w[z] == -g.phi[z]);
    if (z == Site{0, 0, 0} || w.box().on_edge(z)) return;
    if (euclidean_norm(Point(z[0] * h, z[1] * h, 0)) < p.outer_radius - 2 * h) {
      const double lap = discrete_laplacian(w, z);
      CHECK(lap >= -1e-6);
      CHECK(lap <= 3 + 1e-6);
      // In fact Delta^h w equals the chip count.
      CHECK(lap == doctest::Approx(static_cast<double>(r.final.value_or_zero(z))).epsilon(1e-6));
    }
  });
  CHECK_THROWS_AS(wbar_field(r.odometer, g.phi, n + 1), BoxMismatch);
  const RealField tiny(LatticeBox(2, 3), h);
  CHECK_THROWS_AS(wbar_field(r.odometer, tiny, n), BoxMismatch);
}

TEST_CASE("trend rule") {
  CHECK(decreasing_with_one_exception({4, 3, 2, 1}));
  CHECK(decreasing_with_one_exception({4, 5, 2, 1}));
  CHECK_FALSE(decreasing_with_one_exception({4, 5, 2, 3}));
  CHECK_FALSE(decreasing_with_one_exception({1, 0.5, 0.7, 1.2}));
  CHECK_FALSE(decreasing_with_one_exception({1, std::nan(""), 0.5}));
  CHECK(decreasing_with_one_exception({1}));
}

TEST_CASE("small convergence study") {
  const std::vector<TestFunction> phis = {TestFunction::bump(Point::Zero(), 0.3)};
  const ConvergenceReport one = run_convergence_study({1000}, phis, 2);
  REQUIRE(one.rows.size() == 1);
  CHECK(one.gaps.empty());
  CHECK(std::abs(one.rows[0].covering_pairing - 1.0) <= 1e-12);
  CHECK(one.invariants_ok());

  int sunk = 0;
  StudyOptions opts;
  opts.samples_per_axis = 64;
  const ConvergenceReport r = run_convergence_study({1000, 4000, 16000}, phis, 2, opts,
                                                    [&](std::int64_t, const RealField&, const RealField&) { ++sunk; });
  CHECK(sunk == 3);
  REQUIRE(r.gaps.size() == 2);
  for (const StudyGap& g : r.gaps) {
    CHECK(std::isfinite(g.w_gap));
    CHECK(g.w_gap > 0.0);
  }
  for (const StudyRow& row : r.rows) {
    CHECK(std::abs(row.mass - 1.0) <= 1e-12);
    CHECK(row.violations.empty());
    CHECK(row.outside_mismatch == 0.0);
  }
  CHECK(r.invariants_ok());

  const ConvergenceReport d3 = run_convergence_study({1000, 8000}, {TestFunction::bump(Point::Zero(), 0.3)}, 3, opts);
  CHECK(d3.rows.size() == 2);
  for (const StudyRow& row : d3.rows) CHECK(std::abs(row.mass - 1.0) <= 1e-12);
  CHECK(d3.invariants_ok());

  CHECK_THROWS_AS(run_convergence_study({4000, 1000}, phis, 2), FormatError);
}
