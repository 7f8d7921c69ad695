#pragma once

// Rescaled views of point piles, weak-* pairings, and cross-n convergence
// diagnostics.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sandpile/green.hpp"
#include "sandpile/stabilizer.hpp"
#include "sandpile/test_function.hpp"

namespace sandpile {

/// h^d * sum_z s(z) phi(hz), i.e. the exact integral of the piecewise
/// constant field against phi sampled at cell centres. Throws SupportEscape
/// if the support of phi leaves the region covered by the box.
double pair(const RealField& sbar, const TestFunction& phi);

/// Same quadrature for an arbitrary integrand; no support check.
double pair_with(const RealField& sbar, const std::function<double(const Point&)>& phi);

/// h^2 v(z) - phi(z) on the lattice of `phi`. The odometer lives on Z^d and
/// is read at the same integer coordinates.
RealField wbar_field(const Odometer& v, const RealField& phi, std::int64_t n);

/// Largest Euclidean norm of a site holding chips; 0 for an empty pile.
double measured_radius(const ChipGrid& s);

/// Radius R (rescaled) of a ball E = B_R outside of which the odometer
/// vanishes on every site, including the lattice boundary of E.
double barrier_radius(const Odometer& v, std::int64_t n);

/// True if the last gap is below the first and at most one step increases.
bool decreasing_with_one_exception(const std::vector<double>& gaps);

struct StudyOptions {
  Strategy strategy = Strategy::sweep();
  StabilizeOptions stabilize;
  /// R' = outer_factor * (largest rescaled pile radius in the schedule).
  double outer_factor = 1.6;
  /// Radius of the ball on which w fields are compared, same units.
  double compare_factor = 1.25;
  int samples_per_axis = 256;
  double tolerance = 1e-10;
  /// d = 2 regression cap on radius / n^{1/d}.
  double radius_cap = 0.45;
};

struct StudyRow {
  std::int64_t n = 0;
  double h = 0.0;
  double mass = 0.0;
  double radius = 0.0;
  double rescaled_radius = 0.0;
  double radius_ratio = 0.0;
  std::int64_t s_min = 0;
  std::int64_t s_max = 0;
  std::int64_t total_topples = 0;
  std::vector<double> pairings;
  double covering_pairing = 0.0;
  /// max |w + phi| over sites beyond the measured pile radius.
  double outside_mismatch = 0.0;
  std::int64_t green_iterations = 0;
  double green_residual = 0.0;
  std::vector<std::string> violations;
};

struct StudyGap {
  std::int64_t n_from = 0;
  std::int64_t n_to = 0;
  double w_gap = 0.0;
  std::vector<double> pairing_gaps;
};

struct ConvergenceReport {
  int dim = 2;
  std::vector<std::int64_t> schedule;
  std::vector<std::string> test_functions;
  std::string covering_function;
  double outer_radius = 0.0;
  double compare_radius = 0.0;
  std::vector<StudyRow> rows;
  std::vector<StudyGap> gaps;
  std::vector<std::string> warnings;

  bool invariants_ok() const;
};

/// Receives (n, rescaled pile, w field) for every schedule entry.
using FieldSink = std::function<void(std::int64_t, const RealField&, const RealField&)>;

ConvergenceReport run_convergence_study(const std::vector<std::int64_t>& schedule,
                                        const std::vector<TestFunction>& functions, int dim,
                                        const StudyOptions& options = {}, const FieldSink& sink = {});

}  // namespace sandpile
