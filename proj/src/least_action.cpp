#include "sandpile/least_action.hpp"

#include <algorithm>

namespace sandpile {

StabilizingCheck is_stabilizing(const ChipGrid& eta, const CandidateOdometer& v) {
  if (eta.dim() != v.dim()) throw BoxMismatch("configuration and candidate differ in dimension");
  if (v.values().size() > 0 && v.values().minCoeff() < 0) throw FormatError("candidate odometer must be nonnegative");
  const std::int64_t inner = v.box().half_width() - 1;
  const LatticeBox& ebox = eta.box();
  for (std::int64_t i = 0; i < ebox.size(); ++i) {
    if (eta.values()[i] == 0) continue;
    const Site s = ebox.site(i);
    for (int a = 0; a < eta.dim(); ++a) {
      if (std::abs(s[a]) > inner) throw BoxMismatch("candidate box does not cover the configuration with margin 1");
    }
  }

  const IntegerField lap = apply_laplacian(v);
  const LatticeBox& box = lap.box();
  const std::int64_t cap = 2 * eta.dim() - 1;
  for (std::int64_t i = 0; i < box.size(); ++i) {
    const Site s = box.site(i);
    if (eta.value_or_zero(s) + lap.values()[i] > cap) return {false, s};
  }
  return {true, std::nullopt};
}

bool check_least_action(const ChipGrid& eta, const CandidateOdometer& v, const StabilizeOptions& options) {
  const StabilizingCheck check = is_stabilizing(eta, v);
  if (!check.stabilizing) throw NotStabilizing("candidate violates eta + Delta v <= 2d - 1");
  const StabilizeResult truth = stabilize(eta, Strategy::fifo(), options);
  return dominated_by(truth.odometer, v);
}

CandidateOdometer multiplicity(const std::vector<Site>& sequence, int dim) {
  std::int64_t k = 0;
  for (const Site& s : sequence) {
    for (int a = 0; a < dim; ++a) k = std::max(k, std::abs(s[a]));
  }
  CandidateOdometer counts(LatticeBox(dim, k + 1));
  for (const Site& s : sequence) ++counts[s];
  return counts;
}

bool permutation_audit(const ChipGrid& eta, std::uint64_t seed_a, std::uint64_t seed_b,
                       const StabilizeOptions& options) {
  std::vector<Site> first;
  std::vector<Site> second;
  random_legal_run(eta, seed_a, options, &first);
  random_legal_run(eta, seed_b, options, &second);
  if (first.size() != second.size()) return false;
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return first == second;
}

CandidateOdometer forced_candidate(const ChipGrid& final, const Odometer& odometer, std::mt19937_64& rng,
                                   const StabilizeOptions& options) {
  const int dim = final.dim();
  const std::int64_t k = final.box().half_width();
  const LatticeBox box(dim, k + 2);

  // Forced topplings anywhere in the final box, not only at unstable sites.
  Odometer forced(box);
  std::uniform_int_distribution<std::int64_t> coord(-k, k);
  std::uniform_int_distribution<int> how_many(1, 6);
  std::uniform_int_distribution<std::int64_t> times(1, 3);
  for (int j = how_many(rng); j > 0; --j) {
    Site s{0, 0, 0};
    for (int a = 0; a < dim; ++a) s[a] = coord(rng);
    forced[s] += times(rng);
  }

  IntegerField config = resize(retag<SignedTag>(final), box);
  const IntegerField push = apply_laplacian(forced);
  config = resize(config, push.box());
  config.values() += push.values();

  const SignedStabilizeResult rest = stabilize_signed(config, Strategy::fifo(), options);
  const std::int64_t big = std::max({rest.odometer.box().half_width(), box.half_width(), odometer.box().half_width()}) + 1;
  const LatticeBox out_box(dim, big);
  CandidateOdometer v = resize(retag<CandidateTag>(odometer), out_box);
  v.values() += resize(retag<CandidateTag>(forced), out_box).values();
  v.values() += resize(retag<CandidateTag>(rest.odometer), out_box).values();
  return v;
}

}  // namespace sandpile
