#include "sandpile/green.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include <Eigen/Core>

namespace sandpile {

double unit_ball_volume(int dim) {
  const double d = dim;
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double continuum_phi(const Point& x, int dim) {
  if (dim < 2) throw FormatError("continuum potential needs d >= 2");
  const double r = euclidean_norm(x);
  if (r == 0.0) throw SingularPoint("continuum potential is singular at the origin");
  if (dim == 2) return -std::log(r) / (2.0 * std::numbers::pi);
  const double d = dim;
  return std::pow(r, 2.0 - d) / (d * (d - 2.0) * unit_ball_volume(dim));
}

namespace {

Point point_of(const Site& z, double h) {
  return Point(static_cast<double>(z[0]) * h, static_cast<double>(z[1]) * h, static_cast<double>(z[2]) * h);
}

// Matrix-free operator A = -h^2 Delta^h restricted to the interior unknowns.
struct InteriorOperator {
  int slots = 0;
  std::vector<std::int64_t> neighbour;  // unknown index or -1

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    const auto m = x.size();
    const double diag = slots;
    for (Eigen::Index i = 0; i < m; ++i) {
      double acc = diag * x[i];
      const std::int64_t* nb = &neighbour[static_cast<std::size_t>(i) * slots];
      for (int k = 0; k < slots; ++k) {
        if (nb[k] >= 0) acc -= x[nb[k]];
      }
      out[i] = acc;
    }
  }
};

Site canonical(Site z, int dim) {
  for (int a = 0; a < dim; ++a) z[a] = std::abs(z[a]);
  std::sort(z.begin(), z.begin() + dim, std::greater<>());
  return z;
}

// Number of images of a canonical site under sign flips and permutations.
double orbit_size(const Site& z, int dim) {
  double size = 1.0;
  int run = 1;
  for (int a = 0; a < dim; ++a) {
    if (z[a] != 0) size *= 2.0;
    size *= a + 1;
    if (a > 0 && z[a] == z[a - 1]) size /= ++run;
    else run = 1;
  }
  return size;
}

}  // namespace

DirichletSolution solve_dirichlet(const DirichletProblem& p) {
  const LatticeBox& box = p.box;
  const int dim = box.dim();
  const int slots = 2 * dim;
  const double h2 = p.h * p.h;

  std::vector<std::int64_t> unknown_of(static_cast<std::size_t>(box.size()), -1);
  std::vector<std::int64_t> site_of;
  std::int64_t interior_sites = 0;
  for (std::int64_t i = 0; i < box.size(); ++i) {
    const Site s = box.site(i);
    if (!p.interior(s)) continue;
    ++interior_sites;
    if (box.on_edge(s)) throw BoxMismatch("Dirichlet interior touches the outer layer of the box");
    if (p.symmetric && !(canonical(s, dim) == s)) continue;
    unknown_of[i] = static_cast<std::int64_t>(site_of.size());
    site_of.push_back(i);
  }
  // Reduced unknown for any interior site.
  auto unknown_at = [&](std::int64_t j) {
    if (!p.symmetric || unknown_of[j] >= 0) return unknown_of[j];
    const Site s = box.site(j);
    if (!p.interior(s)) return std::int64_t{-1};
    return unknown_of[box.index(canonical(s, dim))];
  };
  const auto m = static_cast<Eigen::Index>(site_of.size());

  RealField u(box, p.h);
  for (std::int64_t i = 0; i < box.size(); ++i) {
    if (unknown_of[i] >= 0) continue;
    const Site s = box.site(i);
    if (!p.symmetric || !p.interior(s)) u.values()[i] = p.boundary(s);
  }
  if (!u.values().allFinite()) throw SingularBoundary("boundary data is not finite");

  InteriorOperator op{slots, std::vector<std::int64_t>(static_cast<std::size_t>(m) * slots, -1)};
  Eigen::VectorXd b(m);
  Eigen::VectorXd x(m);
  Eigen::VectorXd weight = Eigen::VectorXd::Ones(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const std::int64_t i = site_of[k];
    const Site s = box.site(i);
    double rhs = -h2 * p.source(s);
    int slot = 0;
    for (int a = 0; a < dim; ++a) {
      for (const std::int64_t j : {i + box.stride(a), i - box.stride(a)}) {
        const std::int64_t q = unknown_at(j);
        if (q >= 0) {
          op.neighbour[static_cast<std::size_t>(k) * slots + slot] = q;
        } else {
          rhs += u.values()[j];
        }
        ++slot;
      }
    }
    b[k] = rhs;
    x[k] = p.initial_guess ? p.initial_guess(s) : 0.0;
    if (p.symmetric) weight[k] = orbit_size(s, dim);
  }

  // max |Delta^h u - f| / scale equals max |A x - b| / (h^2 scale).
  const double to_residual = 1.0 / (h2 * p.residual_scale);
  const Eigen::VectorXd inv_diag = Eigen::VectorXd::Constant(m, 1.0 / slots);
  // The reduced operator is self-adjoint under <a, c> = sum weight a c, which
  // equals the full inner product of the expanded vectors.
  auto dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& c) { return (weight.array() * a.array() * c.array()).sum(); };
  Eigen::VectorXd r(m), z(m), dir(m), adir(m);
  std::int64_t iterations = 0;
  double residual = std::numeric_limits<double>::infinity();

  // Restarting from the current iterate recomputes the true residual, which
  // guards against drift of the recursively updated one.
  for (int restart = 0; restart < 8 && m > 0; ++restart) {
    op.apply(x, adir);
    r = b - adir;
    residual = r.lpNorm<Eigen::Infinity>() * to_residual;
    if (residual <= p.options.tolerance) break;
    z = inv_diag.cwiseProduct(r);
    dir = z;
    double rz = dot(r, z);
    while (iterations < p.options.max_iterations) {
      ++iterations;
      op.apply(dir, adir);
      const double alpha = rz / dot(dir, adir);
      x.noalias() += alpha * dir;
      r.noalias() -= alpha * adir;
      if (r.lpNorm<Eigen::Infinity>() * to_residual <= 0.25 * p.options.tolerance) break;
      z = inv_diag.cwiseProduct(r);
      const double rz_next = dot(r, z);
      dir = z + (rz_next / rz) * dir;
      rz = rz_next;
    }
    if (iterations >= p.options.max_iterations) break;
  }
  if (m > 0) {
    op.apply(x, adir);
    residual = (b - adir).lpNorm<Eigen::Infinity>() * to_residual;
  } else {
    residual = 0.0;
  }
  if (!(residual <= p.options.tolerance)) {
    throw NoConvergence("conjugate gradients stopped at residual " + std::to_string(residual) + " after " +
                        std::to_string(iterations) + " iterations");
  }
  for (std::int64_t i = 0; i < box.size(); ++i) {
    const std::int64_t q = unknown_at(i);
    if (q >= 0) u.values()[i] = x[q];
  }
  return DirichletSolution{std::move(u), iterations, interior_sites, static_cast<std::int64_t>(m), residual};
}

std::int64_t green_half_width(const GreenProblem& problem) {
  const double h = spacing_for(problem.n, problem.dim);
  return static_cast<std::int64_t>(std::floor(problem.outer_radius / h)) + 2;
}

GreenSolution solve_phi_n(const GreenProblem& problem) {
  if (!(problem.outer_radius > 0.0)) throw FormatError("outer radius must be positive");
  if (!(problem.tolerance > 0.0 && problem.tolerance <= 1e-6)) throw FormatError("tolerance must lie in (0, 1e-6]");
  const int dim = problem.dim;
  const double h = spacing_for(problem.n, dim);
  const double radius = problem.outer_radius;
  const auto n = static_cast<double>(problem.n);

  DirichletProblem dp{LatticeBox(dim, green_half_width(problem)), h, {}, {}, {}, {}, n,
                      SolverOptions{problem.tolerance, problem.max_iterations}, true};
  dp.interior = [=](const Site& z) { return euclidean_norm(point_of(z, h)) < radius; };
  dp.boundary = [=](const Site& z) {
    if (z == Site{0, 0, 0}) throw SingularBoundary("the origin lies on the Dirichlet boundary");
    return continuum_phi(point_of(z, h), dim);
  };
  dp.source = [=](const Site& z) { return z == Site{0, 0, 0} ? -n : 0.0; };
  dp.initial_guess = [=](const Site& z) {
    if (z == Site{0, 0, 0}) return continuum_phi(Point(0.25 * h, 0.0, 0.0), dim);
    return continuum_phi(point_of(z, h), dim);
  };
  DirichletSolution sol = solve_dirichlet(dp);
  return GreenSolution{std::move(sol.u), sol.iterations, sol.unknowns, sol.reduced_unknowns, sol.residual};
}

double phi_residual(const RealField& phi, std::int64_t n, double outer_radius) {
  const LatticeBox& box = phi.box();
  const double h = phi.h();
  double worst = 0.0;
  for (std::int64_t i = 0; i < box.size(); ++i) {
    const Site z = box.site(i);
    if (euclidean_norm(point_of(z, h)) >= outer_radius) continue;
    const double source = z == Site{0, 0, 0} ? static_cast<double>(n) : 0.0;
    worst = std::max(worst, std::abs(discrete_laplacian(phi, z) + source) / static_cast<double>(n));
  }
  return worst;
}

BarrierReport barrier_bounds(const RealField& wbar, const RealField& phi, double radius, double slack) {
  if (!(wbar.box() == phi.box()) || wbar.h() != phi.h()) throw BoxMismatch("w and phi live on different lattices");
  const LatticeBox& box = wbar.box();
  const double h = wbar.h();
  auto in_ball = [&](const Site& z) { return euclidean_norm(point_of(z, h)) < radius; };
  const std::vector<Site> boundary = lattice_boundary(in_ball, box);

  BarrierReport report;
  report.inf_boundary = std::numeric_limits<double>::infinity();
  report.sup_boundary = -std::numeric_limits<double>::infinity();
  for (const Site& z : boundary) {
    if (!box.contains(z)) throw BoxMismatch("box does not cover the lattice boundary of B_R");
    report.inf_boundary = std::min(report.inf_boundary, -phi[z]);
    report.sup_boundary = std::max(report.sup_boundary, -phi[z]);
  }
  report.lower_margin = std::numeric_limits<double>::infinity();
  report.upper_margin = std::numeric_limits<double>::infinity();
  const double outer = (radius + h) * (radius + h);
  for (std::int64_t i = 0; i < box.size(); ++i) {
    const Site z = box.site(i);
    if (!in_ball(z)) continue;
    const double r = euclidean_norm(point_of(z, h));
    const double lower = r * r - outer + report.inf_boundary;
    const double w = wbar.values()[i];
    report.lower_margin = std::min(report.lower_margin, w - lower);
    report.upper_margin = std::min(report.upper_margin, report.sup_boundary - w);
    ++report.sites_checked;
  }
  report.passed = report.sites_checked > 0 && report.lower_margin >= -slack && report.upper_margin >= -slack;
  return report;
}

}  // namespace sandpile
