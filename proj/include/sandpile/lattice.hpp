#pragma once

// Lattice geometry and dense fields on origin-centered boxes of hZ^d.
//
// A box of half-width k holds the sites {-k..k}^d, stored row-major with
// axis 0 slowest. Coordinates beyond the box dimension are always zero, so a
// Site is a fixed 3-array regardless of d.

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "sandpile/errors.hpp"

namespace sandpile {

inline constexpr int kMaxDim = 3;

using Site = std::array<std::int64_t, kMaxDim>;
using Point = Eigen::Vector3d;

class LatticeBox {
 public:
  LatticeBox(int dim, std::int64_t half_width);

  int dim() const noexcept { return dim_; }
  std::int64_t half_width() const noexcept { return half_width_; }
  std::int64_t side() const noexcept { return 2 * half_width_ + 1; }
  std::int64_t size() const noexcept { return size_; }
  std::int64_t stride(int axis) const noexcept { return strides_[axis]; }

  bool contains(const Site& site) const noexcept {
    for (int a = 0; a < dim_; ++a) {
      if (site[a] < -half_width_ || site[a] > half_width_) return false;
    }
    for (int a = dim_; a < kMaxDim; ++a) {
      if (site[a] != 0) return false;
    }
    return true;
  }

  /// True when some coordinate sits at +-k.
  bool on_edge(const Site& site) const noexcept {
    for (int a = 0; a < dim_; ++a) {
      if (site[a] == -half_width_ || site[a] == half_width_) return true;
    }
    return false;
  }

  std::int64_t index(const Site& site) const noexcept {
    assert(contains(site));
    std::int64_t idx = 0;
    for (int a = 0; a < dim_; ++a) idx += (site[a] + half_width_) * strides_[a];
    return idx;
  }

  std::int64_t checked_index(const Site& site) const {
    if (!contains(site)) throw OutOfBounds("site outside lattice box");
    return index(site);
  }

  Site site(std::int64_t index) const noexcept {
    Site s{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      s[a] = index / strides_[a] - half_width_;
      index %= strides_[a];
    }
    return s;
  }

  bool operator==(const LatticeBox& other) const noexcept {
    return dim_ == other.dim_ && half_width_ == other.half_width_;
  }

  /// Visits every site in raster order.
  template <typename F>
  void for_each_site(F&& f) const {
    for (std::int64_t i = 0; i < size_; ++i) f(site(i));
  }

 private:
  int dim_;
  std::int64_t half_width_;
  std::int64_t size_;
  std::array<std::int64_t, kMaxDim> strides_{};
};

inline Site unit_site(int axis, std::int64_t sign) {
  Site s{0, 0, 0};
  s[axis] = sign;
  return s;
}

inline Site operator+(Site a, const Site& b) {
  for (int i = 0; i < kMaxDim; ++i) a[i] += b[i];
  return a;
}

/// Euclidean norm with the squared coordinates summed in ascending order, so
/// the result is invariant under coordinate permutations and sign flips.
double euclidean_norm(const Point& x);
double euclidean_norm(const Site& z);

// Field kinds. The tag only separates types; storage is identical.
struct ChipTag {};
struct OdometerTag {};
struct CandidateTag {};
struct SignedTag {};
struct RealTag {};

template <typename Scalar, typename Tag>
class Field {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  explicit Field(LatticeBox box, double h = 1.0, Scalar fill = Scalar{0})
      : box_(box), h_(h), values_(Values::Constant(box.size(), fill)) {
    check_spacing();
  }

  Field(LatticeBox box, double h, Values values)
      : box_(box), h_(h), values_(std::move(values)) {
    check_spacing();
    if (values_.size() != box_.size()) throw BoxMismatch("value count does not match box size");
    if constexpr (std::is_integral_v<Scalar> && !std::is_same_v<Tag, SignedTag>) {
      if (values_.size() > 0 && values_.minCoeff() < 0) throw FormatError("negative entry in nonnegative field");
    } else if constexpr (std::is_floating_point_v<Scalar>) {
      if (!values_.allFinite()) throw FormatError("non-finite value in real field");
    }
  }

  const LatticeBox& box() const noexcept { return box_; }
  int dim() const noexcept { return box_.dim(); }
  double h() const noexcept { return h_; }
  const Values& values() const noexcept { return values_; }
  Values& values() noexcept { return values_; }

  Scalar operator[](const Site& s) const noexcept { return values_[box_.index(s)]; }
  Scalar& operator[](const Site& s) noexcept { return values_[box_.index(s)]; }

  Scalar at(const Site& s) const { return values_[box_.checked_index(s)]; }

  /// Sites outside the box read as zero.
  Scalar value_or_zero(const Site& s) const noexcept {
    return box_.contains(s) ? values_[box_.index(s)] : Scalar{0};
  }

  bool operator==(const Field& other) const {
    return box_ == other.box_ && h_ == other.h_ && (values_ == other.values_).all();
  }

 private:
  void check_spacing() const {
    if (!(h_ > 0.0) || !std::isfinite(h_)) throw FormatError("lattice spacing must be positive and finite");
  }

  LatticeBox box_;
  double h_;
  Values values_;
};

using ChipGrid = Field<std::int64_t, ChipTag>;
using Odometer = Field<std::int64_t, OdometerTag>;
using CandidateOdometer = Field<std::int64_t, CandidateTag>;
using IntegerField = Field<std::int64_t, SignedTag>;
using RealField = Field<double, RealTag>;

template <typename NewTag, typename Scalar, typename Tag>
Field<Scalar, NewTag> retag(const Field<Scalar, Tag>& f) {
  return Field<Scalar, NewTag>(f.box(), f.h(), f.values());
}

/// Copies `f` onto `box`; sites missing from `f` become zero. Throws
/// BoxMismatch if a nonzero value would be dropped.
template <typename Scalar, typename Tag>
Field<Scalar, Tag> resize(const Field<Scalar, Tag>& f, const LatticeBox& box) {
  if (box.dim() != f.dim()) throw BoxMismatch("dimension mismatch");
  Field<Scalar, Tag> out(box, f.h());
  const auto& src = f.box();
  for (std::int64_t i = 0; i < src.size(); ++i) {
    const Scalar v = f.values()[i];
    if (v == Scalar{0}) continue;
    const Site s = src.site(i);
    if (!box.contains(s)) throw BoxMismatch("resize would drop nonzero values");
    out[s] = v;
  }
  return out;
}

/// Largest sup-norm over sites with nonzero value; -1 for an all-zero field.
template <typename Scalar, typename Tag>
std::int64_t support_half_width(const Field<Scalar, Tag>& f) {
  std::int64_t r = -1;
  const auto& box = f.box();
  for (std::int64_t i = 0; i < box.size(); ++i) {
    if (f.values()[i] == Scalar{0}) continue;
    const Site s = box.site(i);
    for (int a = 0; a < box.dim(); ++a) r = std::max(r, std::abs(s[a]));
  }
  return r;
}

/// h^{-2} * sum over the 2d neighbours y of (u(y) - u(x)). Integer fields
/// (which always carry h = 1) are evaluated in exact integer arithmetic.
template <typename Scalar, typename Tag>
auto discrete_laplacian(const Field<Scalar, Tag>& u, const Site& x)
    -> std::conditional_t<std::is_integral_v<Scalar>, Scalar, double> {
  const auto& box = u.box();
  if (!box.contains(x) || box.on_edge(x)) throw OutOfBounds("laplacian stencil leaves the box");
  const std::int64_t i = box.index(x);
  const auto& v = u.values();
  if constexpr (std::is_integral_v<Scalar>) {
    Scalar sum = 0;
    for (int a = 0; a < box.dim(); ++a) sum += v[i + box.stride(a)] + v[i - box.stride(a)];
    return sum - 2 * box.dim() * v[i];
  } else {
    double sum = 0.0;
    for (int a = 0; a < box.dim(); ++a) sum += (v[i + box.stride(a)] - v[i]) + (v[i - box.stride(a)] - v[i]);
    return sum / (u.h() * u.h());
  }
}

/// Exact Delta^1 of an integer field at every site of the box grown by one,
/// reading zero outside the box.
template <typename Tag>
IntegerField apply_laplacian(const Field<std::int64_t, Tag>& u) {
  const auto& src = u.box();
  const LatticeBox big(src.dim(), src.half_width() + 1);
  IntegerField out(big);
  const int two_d = 2 * src.dim();
  for (std::int64_t i = 0; i < src.size(); ++i) {
    const std::int64_t v = u.values()[i];
    if (v == 0) continue;
    const Site s = src.site(i);
    const std::int64_t j = big.index(s);
    out.values()[j] -= two_d * v;
    for (int a = 0; a < src.dim(); ++a) {
      out.values()[j + big.stride(a)] += v;
      out.values()[j - big.stride(a)] += v;
    }
  }
  return out;
}

/// Sites outside E that have a lattice neighbour in E, in raster order. E is
/// given by a predicate evaluated on the box only; the result may include
/// sites one step outside the box.
std::vector<Site> lattice_boundary(const std::function<bool(const Site&)>& in_set, const LatticeBox& box);

/// Nearest integer, ties rounded down (0.5 -> 0, -0.5 -> -1).
inline std::int64_t round_half_down(double x) { return static_cast<std::int64_t>(std::ceil(x - 0.5)); }

/// Lattice index of the point h * round(x / h).
Site nearest_site(const Point& x, double h, int dim);

/// Value of the field at the lattice point nearest to x (ties rounded down).
double nn_interpolate(const RealField& field, const Point& x);

/// View of a stable pile on the lattice n^{-1/d} Z^d.
RealField rescale_chips(const ChipGrid& s, std::int64_t n);

/// Spacing h = n^{-1/d}.
double spacing_for(std::int64_t n, int dim);

}  // namespace sandpile
