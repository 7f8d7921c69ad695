#include "sandpile/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sandpile {
namespace {

Point point_of(const Site& z, double h) {
  return Point(static_cast<double>(z[0]) * h, static_cast<double>(z[1]) * h, static_cast<double>(z[2]) * h);
}

// Side of the region [-(k+1/2)h, (k+1/2)h]^d covered by the box's cells.
double covered_extent(const RealField& f) { return (static_cast<double>(f.box().half_width()) + 0.5) * f.h(); }

std::string describe_trend(const std::string& what, const std::vector<double>& gaps) {
  std::ostringstream os;
  os.precision(6);
  os << what << " is not decreasing (one exception allowed):";
  for (double g : gaps) os << ' ' << g;
  return os.str();
}

}  // namespace

double pair_with(const RealField& sbar, const std::function<double(const Point&)>& phi) {
  const LatticeBox& box = sbar.box();
  const double h = sbar.h();
  double sum = 0.0;
  for (std::int64_t i = 0; i < box.size(); ++i) {
    const double s = sbar.values()[i];
    if (s == 0.0) continue;
    sum += s * phi(point_of(box.site(i), h));
  }
  return std::pow(h, sbar.dim()) * sum;
}

double pair(const RealField& sbar, const TestFunction& phi) {
  const double extent = covered_extent(sbar);
  for (int a = 0; a < sbar.dim(); ++a) {
    if (std::abs(phi.center()[a]) + phi.support_radius() > extent) {
      throw SupportEscape("test function support leaves the field's box");
    }
  }
  return pair_with(sbar, [&](const Point& x) { return phi(x); });
}

RealField wbar_field(const Odometer& v, const RealField& phi, std::int64_t n) {
  if (v.dim() != phi.dim()) throw BoxMismatch("odometer and potential differ in dimension");
  const double h = spacing_for(n, phi.dim());
  if (std::abs(phi.h() - h) > 1e-12 * h) throw BoxMismatch("potential spacing does not match n^{-1/d}");
  if (support_half_width(v) >= phi.box().half_width()) throw BoxMismatch("odometer support leaves the potential's box");
  RealField w(phi.box(), phi.h());
  const double h2 = phi.h() * phi.h();
  const LatticeBox& box = phi.box();
  for (std::int64_t i = 0; i < box.size(); ++i) {
    w.values()[i] = h2 * static_cast<double>(v.value_or_zero(box.site(i))) - phi.values()[i];
  }
  return w;
}

double measured_radius(const ChipGrid& s) {
  double r = 0.0;
  const LatticeBox& box = s.box();
  for (std::int64_t i = 0; i < box.size(); ++i) {
    if (s.values()[i] > 0) r = std::max(r, euclidean_norm(box.site(i)));
  }
  return r;
}

double barrier_radius(const Odometer& v, std::int64_t n) {
  double r = 0.0;
  const LatticeBox& box = v.box();
  for (std::int64_t i = 0; i < box.size(); ++i) {
    if (v.values()[i] > 0) r = std::max(r, euclidean_norm(box.site(i)));
  }
  return (r + 1.0) * spacing_for(n, v.dim());
}

bool decreasing_with_one_exception(const std::vector<double>& gaps) {
  if (gaps.size() < 2) return true;
  for (double g : gaps) {
    if (!std::isfinite(g)) return false;
  }
  int increases = 0;
  for (std::size_t j = 1; j < gaps.size(); ++j) {
    if (gaps[j] > gaps[j - 1]) ++increases;
  }
  return increases <= 1 && gaps.back() < gaps.front();
}

bool ConvergenceReport::invariants_ok() const {
  for (const StudyRow& row : rows) {
    if (!row.violations.empty()) return false;
  }
  for (const StudyGap& gap : gaps) {
    if (!std::isfinite(gap.w_gap)) return false;
  }
  return true;
}

ConvergenceReport run_convergence_study(const std::vector<std::int64_t>& schedule,
                                        const std::vector<TestFunction>& functions, int dim,
                                        const StudyOptions& options, const FieldSink& sink) {
  if (schedule.empty()) throw FormatError("empty schedule");
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    if (schedule[j] < 1 || (j > 0 && schedule[j] <= schedule[j - 1])) {
      throw FormatError("schedule must be positive and strictly increasing");
    }
  }

  ConvergenceReport report;
  report.dim = dim;
  report.schedule = schedule;
  for (const TestFunction& f : functions) report.test_functions.push_back(f.describe(dim));

  std::vector<StabilizeResult> piles;
  double max_rescaled = 0.0;
  for (const std::int64_t n : schedule) {
    piles.push_back(stabilize_point_pile(n, dim, options.strategy, options.stabilize));
    const double h = spacing_for(n, dim);
    max_rescaled = std::max(max_rescaled, measured_radius(piles.back().final) * h);
  }
  // A single-site pile still needs a ball that covers its neighbours.
  max_rescaled = std::max(max_rescaled, spacing_for(schedule.front(), dim));
  report.outer_radius = options.outer_factor * max_rescaled;
  report.compare_radius = options.compare_factor * max_rescaled;
  const TestFunction covering = TestFunction::plateau(Point::Zero(), 1.2 * max_rescaled, 1.5 * max_rescaled);
  report.covering_function = covering.describe(dim);

  std::vector<RealField> wbars;
  const std::int64_t two_d = 2 * dim;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const std::int64_t n = schedule[j];
    const StabilizeResult& pile = piles[j];
    StudyRow row;
    row.n = n;
    row.h = spacing_for(n, dim);
    row.radius = measured_radius(pile.final);
    row.rescaled_radius = row.radius * row.h;
    row.radius_ratio = row.radius / std::pow(static_cast<double>(n), 1.0 / dim);
    row.s_min = pile.final.values().minCoeff();
    row.s_max = pile.final.values().maxCoeff();
    row.total_topples = pile.total_topples;

    const GreenSolution green = solve_phi_n({dim, n, report.outer_radius, options.tolerance, 500'000});
    row.green_iterations = green.iterations;
    row.green_residual = green.residual;
    RealField w = wbar_field(pile.odometer, green.phi, n);
    const RealField sbar = rescale_chips(resize(pile.final, green.phi.box()), n);

    row.mass = std::pow(row.h, dim) * static_cast<double>(pile.final.values().sum());
    for (const TestFunction& f : functions) row.pairings.push_back(pair(sbar, f));
    row.covering_pairing = pair(sbar, covering);

    const LatticeBox& box = green.phi.box();
    for (std::int64_t i = 0; i < box.size(); ++i) {
      if (euclidean_norm(box.site(i)) <= row.radius) continue;
      row.outside_mismatch = std::max(row.outside_mismatch, std::abs(w.values()[i] + green.phi.values()[i]));
    }

    if (std::abs(row.mass - 1.0) > 1e-12) row.violations.push_back("mass differs from 1");
    if (row.s_min < 0 || row.s_max > two_d - 1) row.violations.push_back("chip counts outside [0, 2d-1]");
    if (!std::isfinite(row.radius)) row.violations.push_back("radius not finite");
    if (dim == 2 && row.radius_ratio > options.radius_cap) row.violations.push_back("radius exceeds regression cap");
    if (row.outside_mismatch != 0.0) row.violations.push_back("w differs from -phi outside the pile");

    if (sink) sink(n, sbar, w);
    wbars.push_back(std::move(w));
    report.rows.push_back(std::move(row));
  }

  // Common evaluation grid: cell centres of a uniform grid on [-R, R]^d,
  // restricted to B_R, each field read by nearest-neighbour interpolation.
  const double radius = report.compare_radius;
  const int m = options.samples_per_axis;
  const double step = 2.0 * radius / m;
  std::vector<Point> samples;
  std::array<int, kMaxDim> idx{0, 0, 0};
  const int total = static_cast<int>(std::pow(m, dim));
  for (int flat = 0; flat < total; ++flat) {
    int rest = flat;
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = rest % m;
      rest /= m;
    }
    Point p = Point::Zero();
    for (int a = 0; a < dim; ++a) p[a] = -radius + (idx[a] + 0.5) * step;
    if (euclidean_norm(p) < radius) samples.push_back(p);
  }

  for (std::size_t j = 0; j + 1 < schedule.size(); ++j) {
    StudyGap gap;
    gap.n_from = schedule[j];
    gap.n_to = schedule[j + 1];
    for (const Point& p : samples) {
      gap.w_gap = std::max(gap.w_gap, std::abs(nn_interpolate(wbars[j], p) - nn_interpolate(wbars[j + 1], p)));
    }
    for (std::size_t f = 0; f < functions.size(); ++f) {
      gap.pairing_gaps.push_back(std::abs(report.rows[j + 1].pairings[f] - report.rows[j].pairings[f]));
    }
    report.gaps.push_back(std::move(gap));
  }

  if (report.gaps.size() >= 2) {
    std::vector<double> w_gaps;
    for (const StudyGap& g : report.gaps) w_gaps.push_back(g.w_gap);
    if (!decreasing_with_one_exception(w_gaps)) report.warnings.push_back(describe_trend("w gap", w_gaps));
    for (std::size_t f = 0; f < functions.size(); ++f) {
      std::vector<double> series;
      for (const StudyGap& g : report.gaps) series.push_back(g.pairing_gaps[f]);
      if (!decreasing_with_one_exception(series)) {
        report.warnings.push_back(describe_trend("pairing gap for " + report.test_functions[f], series));
      }
    }
  }
  return report;
}

}  // namespace sandpile
