#pragma once

// Fundamental solution of the lattice Laplacian on hZ^d, realized as a
// finite-box Dirichlet problem whose boundary data is the continuum
// Newtonian potential.

#include <cstdint>
#include <functional>
#include <optional>

#include "sandpile/lattice.hpp"

namespace sandpile {

/// Volume of the unit ball in R^d.
double unit_ball_volume(int dim);

/// -log|x| / (2 pi) for d = 2, and |x|^{2-d} / (d (d-2) |B_1|) for d >= 3.
/// Throws SingularPoint at x = 0.
double continuum_phi(const Point& x, int dim);

struct SolverOptions {
  /// Bound on max |Delta^h u - f| / residual_scale over the interior.
  double tolerance = 1e-10;
  std::int64_t max_iterations = 500'000;
};

/// Delta^h u = f on the interior sites, u = g elsewhere in the box. The
/// interior must avoid the outer layer of the box.
struct DirichletProblem {
  LatticeBox box;
  double h = 1.0;
  std::function<bool(const Site&)> interior;
  std::function<double(const Site&)> boundary;
  std::function<double(const Site&)> source;
  std::function<double(const Site&)> initial_guess;
  double residual_scale = 1.0;
  SolverOptions options;
  /// All data is invariant under coordinate sign flips and permutations:
  /// solve on the fundamental domain only, with orbit-weighted inner products.
  bool symmetric = false;
};

struct DirichletSolution {
  RealField u;
  std::int64_t iterations = 0;
  /// Interior sites of the full problem, and the number actually iterated on.
  std::int64_t unknowns = 0;
  std::int64_t reduced_unknowns = 0;
  /// max interior |Delta^h u - f| / residual_scale, recomputed from u.
  double residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients on the negated Dirichlet
/// Laplacian. Throws NoConvergence when the iteration budget runs out.
DirichletSolution solve_dirichlet(const DirichletProblem& problem);

struct GreenProblem {
  int dim = 2;
  std::int64_t n = 1;
  /// Radius R' of the ball E = {|x| < R'} on which Delta^h is inverted.
  double outer_radius = 1.0;
  double tolerance = 1e-10;
  std::int64_t max_iterations = 500'000;
};

struct GreenSolution {
  RealField phi;
  std::int64_t iterations = 0;
  std::int64_t unknowns = 0;
  std::int64_t reduced_unknowns = 0;
  double residual = 0.0;
};

/// Lattice half-width used for a Green problem: covers B_{R'} and its
/// lattice boundary with one spare layer.
std::int64_t green_half_width(const GreenProblem& problem);

/// Solves Delta^h Phi_n = -n delta_0 on hZ^d cap B_{R'} (h = n^{-1/d}) with
/// Phi_n equal to the continuum potential everywhere else in the box.
GreenSolution solve_phi_n(const GreenProblem& problem);

/// max over sites of B_{R'} of |Delta^h phi + n delta_0| / n.
double phi_residual(const RealField& phi, std::int64_t n, double outer_radius);

struct BarrierReport {
  bool passed = false;
  /// min over B_R of w - lower barrier, and of upper barrier - w.
  double lower_margin = 0.0;
  double upper_margin = 0.0;
  double inf_boundary = 0.0;
  double sup_boundary = 0.0;
  std::int64_t sites_checked = 0;
};

/// Checks |x|^2 - (R+h)^2 + inf_{dE}(-phi) <= w(x) <= sup_{dE}(-phi) for every
/// lattice site x of E = B_R, up to `slack`.
BarrierReport barrier_bounds(const RealField& wbar, const RealField& phi, double radius, double slack = 1e-8);

}  // namespace sandpile
