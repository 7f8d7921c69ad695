#include "verify.hpp"

#include <filesystem>
#include <functional>
#include <random>

#include "sandpile/analysis.hpp"
#include "sandpile/green.hpp"
#include "sandpile/least_action.hpp"
#include "sandpile/sfield.hpp"
#include "sandpile/stabilizer.hpp"

namespace sandpile::cli {

using nlohmann::ordered_json;

namespace {

class Suite {
 public:
  Suite(std::string name, std::string dump_dir) : name_(std::move(name)), dump_dir_(std::move(dump_dir)) {}

  void ok() { ++cases_; }

  // Records a failing case and dumps the supplied fields.
  void fail(const std::string& label, const std::string& detail,
            const std::vector<std::pair<std::string, AnyField>>& fields = {}) {
    ++cases_;
    ordered_json f;
    f["case"] = label;
    f["detail"] = detail;
    ordered_json dumps = ordered_json::array();
    if (!fields.empty()) std::filesystem::create_directories(dump_dir_);
    for (const auto& [what, field] : fields) {
      const std::filesystem::path path = std::filesystem::path(dump_dir_) / (name_ + "_" + label + "_" + what + ".sfield");
      save_sfield(path, field);
      dumps.push_back(path.string());
    }
    f["dumps"] = std::move(dumps);
    failures_.push_back(std::move(f));
  }

  void check(bool good, const std::string& label, const std::string& detail,
             const std::vector<std::pair<std::string, AnyField>>& fields = {}) {
    if (good) {
      ok();
    } else {
      fail(label, detail, fields);
    }
  }

  bool passed() const { return failures_.empty(); }

  ordered_json json() const {
    return {{"name", name_}, {"passed", passed()}, {"cases", cases_}, {"failures", failures_}};
  }

 private:
  std::string name_;
  std::string dump_dir_;
  std::int64_t cases_ = 0;
  ordered_json failures_ = ordered_json::array();
};

AnyField any(const ChipGrid& f) { return retag<SignedTag>(f); }
AnyField any(const Odometer& f) { return retag<SignedTag>(f); }
AnyField any(const CandidateOdometer& f) { return retag<SignedTag>(f); }

bool same(const StabilizeResult& a, const StabilizeResult& b) {
  return a.final == b.final && a.odometer == b.odometer;
}

std::string exact_violation(const ChipGrid& eta, const StabilizeResult& r) {
  const std::int64_t two_d = 2 * eta.dim();
  if (r.final.values().sum() != eta.values().sum()) return "mass not conserved";
  if (r.final.values().minCoeff() < 0 || r.final.values().maxCoeff() >= two_d) return "final not stable";
  const IntegerField lap = apply_laplacian(r.odometer);
  for (std::int64_t i = 0; i < lap.box().size(); ++i) {
    const Site z = lap.box().site(i);
    if (r.final.value_or_zero(z) != eta.value_or_zero(z) + lap.values()[i]) return "s != eta + Laplacian(v)";
  }
  return {};
}

void conservation(Suite& suite) {
  const std::vector<std::pair<int, std::int64_t>> cases = {{2, 3},   {2, 4},  {2, 5},    {2, 8},   {2, 16},
                                                           {2, 1000}, {2, 10000}, {3, 6}, {3, 100}, {3, 1000}};
  for (const auto& [d, n] : cases) {
    const ChipGrid eta = point_pile(n, d);
    const StabilizeResult r = stabilize(eta, Strategy::fifo());
    const std::string bad = exact_violation(eta, r);
    suite.check(bad.empty(), "d" + std::to_string(d) + "_n" + std::to_string(n), bad,
                {{"eta", any(eta)}, {"final", any(r.final)}, {"odometer", any(r.odometer)}});
  }
}

void abelian(Suite& suite, std::mt19937_64& rng) {
  for (int j = 0; j < 8; ++j) {
    const int d = j < 5 ? 2 : 3;
    const ChipGrid eta = random_configuration(d, d == 2 ? 10 : 4, d == 2 ? 8 : 12, rng);
    const std::string label = "eta" + std::to_string(j);
    const StabilizeResult ref = stabilize(eta, Strategy::fifo());
    std::vector<std::pair<std::string, StabilizeResult>> runs = {
        {"sweep", stabilize(eta, Strategy::sweep())}, {"tiled", stabilize(eta, Strategy::tiled(4, 2))}};
    for (int s = 0; s < 5; ++s) runs.emplace_back("random" + std::to_string(s), random_legal_run(eta, rng()));
    for (const auto& [name, r] : runs) {
      suite.check(same(ref, r), label + "_" + name, name + " differs from fifo",
                  {{"eta", any(eta)}, {"final", any(r.final)}, {"odometer", any(r.odometer)}});
    }
  }
}

void least_action(Suite& suite, std::mt19937_64& rng) {
  for (int j = 0; j < 3; ++j) {
    const ChipGrid eta = random_configuration(2, 6, 7, rng);
    const StabilizeResult truth = stabilize(eta, Strategy::fifo());
    for (int c = 0; c < 20; ++c) {
      const CandidateOdometer v = forced_candidate(truth.final, truth.odometer, rng);
      const std::string label = "eta" + std::to_string(j) + "_cand" + std::to_string(c);
      const StabilizingCheck check = is_stabilizing(eta, v);
      if (!check.stabilizing) {
        suite.fail(label, "generated candidate is not stabilizing", {{"eta", any(eta)}, {"candidate", any(v)}});
        continue;
      }
      suite.check(check_least_action(eta, v), label, "odometer not dominated by candidate",
                  {{"eta", any(eta)}, {"candidate", any(v)}, {"odometer", any(truth.odometer)}});
    }
  }
}

void permutations(Suite& suite, std::mt19937_64& rng) {
  for (int j = 0; j < 4; ++j) {
    const ChipGrid eta = random_configuration(2, 5, 8, rng);
    const std::uint64_t a = rng();
    const std::uint64_t b = rng();
    suite.check(permutation_audit(eta, a, b), "eta" + std::to_string(j), "sequences are not permutations",
                {{"eta", any(eta)}});
  }
}

void green(Suite& suite) {
  for (const int d : {2, 3}) {
    GreenProblem p;
    p.dim = d;
    p.n = 100;
    p.outer_radius = 2.0;
    const GreenSolution g = solve_phi_n(p);
    const std::string label = "d" + std::to_string(d) + "_n100";
    suite.check(g.residual <= p.tolerance, label + "_residual", "residual " + std::to_string(g.residual),
                {{"phi", g.phi}});
    bool boundary_exact = true;
    const LatticeBox& box = g.phi.box();
    for (std::int64_t i = 0; i < box.size(); ++i) {
      const Site z = box.site(i);
      const Point x(z[0] * g.phi.h(), z[1] * g.phi.h(), z[2] * g.phi.h());
      if (euclidean_norm(x) >= p.outer_radius && g.phi.values()[i] != continuum_phi(x, d)) boundary_exact = false;
    }
    suite.check(boundary_exact, label + "_boundary", "boundary differs from continuum potential", {{"phi", g.phi}});
  }
}

void barrier(Suite& suite) {
  for (const std::int64_t n : {1000, 4000}) {
    const StabilizeResult pile = stabilize_point_pile(n, 2, Strategy::sweep());
    const double radius = barrier_radius(pile.odometer, n);
    GreenProblem p;
    p.dim = 2;
    p.n = n;
    p.outer_radius = 1.6 * radius;
    const GreenSolution g = solve_phi_n(p);
    const RealField w = wbar_field(pile.odometer, g.phi, n);
    const BarrierReport b = barrier_bounds(w, g.phi, radius);
    suite.check(b.passed, "n" + std::to_string(n),
                "margins " + std::to_string(b.lower_margin) + ", " + std::to_string(b.upper_margin),
                {{"wbar", w}, {"phi", g.phi}});
  }
}

}  // namespace

nlohmann::ordered_json run_verify(std::uint64_t seed, const std::string& dump_dir, bool* passed) {
  std::mt19937_64 rng(seed);
  std::vector<Suite> suites;
  auto run_suite = [&](const std::string& name, const std::function<void(Suite&)>& body) {
    Suite s(name, dump_dir);
    try {
      body(s);
    } catch (const std::exception& e) {
      s.fail("error", e.what());
    }
    suites.push_back(std::move(s));
  };
  run_suite("conservation", conservation);
  run_suite("abelian", [&](Suite& s) { abelian(s, rng); });
  run_suite("least_action", [&](Suite& s) { least_action(s, rng); });
  run_suite("permutation", [&](Suite& s) { permutations(s, rng); });
  run_suite("green", green);
  run_suite("barrier", barrier);

  bool all = true;
  ordered_json list = ordered_json::array();
  for (const Suite& s : suites) {
    all = all && s.passed();
    list.push_back(s.json());
  }
  if (passed != nullptr) *passed = all;
  return {{"passed", all}, {"suites", std::move(list)}};
}

}  // namespace sandpile::cli
