#include "sandpile/lattice.hpp"

#include <algorithm>
#include <limits>

namespace sandpile {

LatticeBox::LatticeBox(int dim, std::int64_t half_width) : dim_(dim), half_width_(half_width) {
  if (dim < 1 || dim > kMaxDim) throw FormatError("lattice dimension must be 1, 2 or 3");
  if (half_width < 1) throw FormatError("box half-width must be at least 1");
  const std::int64_t side = 2 * half_width + 1;
  std::int64_t size = 1;
  for (int a = dim - 1; a >= 0; --a) {
    strides_[a] = size;
    if (size > std::numeric_limits<std::int64_t>::max() / side) throw CapacityExceeded("box too large");
    size *= side;
  }
  size_ = size;
}

namespace {

template <typename T>
double sorted_norm(std::array<T, kMaxDim> sq) {
  std::sort(sq.begin(), sq.end());
  double sum = 0.0;
  for (T v : sq) sum += static_cast<double>(v);
  return std::sqrt(sum);
}

}  // namespace

double euclidean_norm(const Point& x) {
  return sorted_norm(std::array<double, kMaxDim>{x[0] * x[0], x[1] * x[1], x[2] * x[2]});
}

double euclidean_norm(const Site& z) {
  return sorted_norm(std::array<std::int64_t, kMaxDim>{z[0] * z[0], z[1] * z[1], z[2] * z[2]});
}

std::vector<Site> lattice_boundary(const std::function<bool(const Site&)>& in_set, const LatticeBox& box) {
  const LatticeBox big(box.dim(), box.half_width() + 1);
  std::vector<char> member(static_cast<std::size_t>(box.size()), 0);
  for (std::int64_t i = 0; i < box.size(); ++i) member[i] = in_set(box.site(i)) ? 1 : 0;

  auto is_member = [&](const Site& s) { return box.contains(s) && member[box.index(s)] != 0; };

  std::vector<Site> out;
  for (std::int64_t i = 0; i < big.size(); ++i) {
    const Site s = big.site(i);
    if (is_member(s)) continue;
    bool adjacent = false;
    for (int a = 0; a < box.dim() && !adjacent; ++a) {
      adjacent = is_member(s + unit_site(a, 1)) || is_member(s + unit_site(a, -1));
    }
    if (adjacent) out.push_back(s);
  }
  return out;
}

Site nearest_site(const Point& x, double h, int dim) {
  Site s{0, 0, 0};
  for (int a = 0; a < dim; ++a) s[a] = round_half_down(x[a] / h);
  return s;
}

double nn_interpolate(const RealField& field, const Point& x) {
  return field.at(nearest_site(x, field.h(), field.dim()));
}

double spacing_for(std::int64_t n, int dim) {
  if (n < 1) throw FormatError("chip count must be positive");
  const double nd = static_cast<double>(n);
  switch (dim) {
    case 1: return 1.0 / nd;
    case 2: return 1.0 / std::sqrt(nd);
    case 3: return 1.0 / std::cbrt(nd);
    default: return std::pow(nd, -1.0 / dim);
  }
}

RealField rescale_chips(const ChipGrid& s, std::int64_t n) {
  return RealField(s.box(), spacing_for(n, s.dim()), s.values().cast<double>());
}

}  // namespace sandpile
