#pragma once

// Reference implementations kept deliberately naive and independent of the
// library code paths: sparse maps, one topple at a time, formulas spelled out.

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Coord = std::array<std::int64_t, 3>;
using Sparse = std::map<Coord, std::int64_t>;

inline std::vector<Coord> neighbours(const Coord& x, int d) {
  std::vector<Coord> out;
  for (int a = 0; a < d; ++a) {
    for (int s : {-1, 1}) {
      Coord y = x;
      y[a] += s;
      out.push_back(y);
    }
  }
  return out;
}

struct Stable {
  Sparse final;
  Sparse odometer;
  std::int64_t topples = 0;
};

/// Plain FIFO, one toppling per pop, unbounded lattice.
inline Stable naive_fifo(Sparse eta, int d) {
  Stable r;
  std::deque<Coord> queue;
  for (const auto& [x, c] : eta) {
    if (c >= 2 * d) queue.push_back(x);
  }
  while (!queue.empty()) {
    const Coord x = queue.front();
    queue.pop_front();
    if (eta[x] < 2 * d) continue;
    eta[x] -= 2 * d;
    ++r.odometer[x];
    ++r.topples;
    if (eta[x] >= 2 * d) queue.push_back(x);
    for (const Coord& y : neighbours(x, d)) {
      if (++eta[y] == 2 * d) queue.push_back(y);
    }
  }
  for (const auto& [x, c] : eta) {
    if (c != 0) r.final[x] = c;
  }
  return r;
}

inline Sparse point(std::int64_t n) { return {{Coord{0, 0, 0}, n}}; }

/// Sites outside E with a neighbour inside E, E given as an explicit set.
inline std::set<Coord> boundary(const std::set<Coord>& e, int d) {
  std::set<Coord> out;
  for (const Coord& x : e) {
    for (const Coord& y : neighbours(x, d)) {
      if (!e.count(y)) out.insert(y);
    }
  }
  return out;
}

inline double phi(double r, int d) {
  const double pi = 3.14159265358979323846;
  if (d == 2) return -std::log(r) / (2.0 * pi);
  return 1.0 / (4.0 * pi * r);  // d = 3: 1 / (3 * 1 * 4 pi / 3)
}

/// Dense LU solve of Delta^h u = -n delta_0 on {|hz| < R}, u = phi outside.
/// Returns u at the sites of a box of half-width k, raster order axis 0 slowest.
inline std::vector<double> dense_green(int d, std::int64_t n, double R, std::int64_t k) {
  const double h = std::pow(static_cast<double>(n), -1.0 / d);
  const std::int64_t side = 2 * k + 1;
  std::int64_t total = 1;
  for (int a = 0; a < d; ++a) total *= side;
  auto coord = [&](std::int64_t i) {
    Coord c{0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
      c[a] = i % side - k;
      i /= side;
    }
    return c;
  };
  auto radius = [&](const Coord& c) {
    double s = 0;
    for (int a = 0; a < d; ++a) s += static_cast<double>(c[a] * c[a]);
    return std::sqrt(s) * h;
  };
  std::map<Coord, int> unknown;
  for (std::int64_t i = 0; i < total; ++i) {
    const Coord c = coord(i);
    if (radius(c) < R) unknown.emplace(c, static_cast<int>(unknown.size()));
  }
  const int m = static_cast<int>(unknown.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (const auto& [c, row] : unknown) {
    A(row, row) = -2.0 * d / (h * h);
    if (c == Coord{0, 0, 0}) b(row) = -static_cast<double>(n);
    for (const Coord& y : neighbours(c, d)) {
      auto it = unknown.find(y);
      if (it != unknown.end()) {
        A(row, it->second) += 1.0 / (h * h);
      } else {
        b(row) -= phi(radius(y), d) / (h * h);
      }
    }
  }
  const Eigen::VectorXd u = A.partialPivLu().solve(b);
  std::vector<double> out(static_cast<std::size_t>(total));
  for (std::int64_t i = 0; i < total; ++i) {
    const Coord c = coord(i);
    auto it = unknown.find(c);
    out[static_cast<std::size_t>(i)] = it != unknown.end() ? u(it->second) : phi(radius(c), d);
  }
  return out;
}

}  // namespace oracle
