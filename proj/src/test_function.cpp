#include "sandpile/test_function.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace sandpile {
namespace {

// exp(-1/t) for t > 0, else 0.
double smooth_ramp(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
  const double a = smooth_ramp(t);
  const double b = smooth_ramp(1.0 - t);
  return a / (a + b);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

template <typename T>
T parse_value(std::string_view text) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw FormatError("bad number '" + std::string(text) + "' in test function");
  }
  return value;
}

Point parse_center(std::string_view text, int dim) {
  Point c = Point::Zero();
  if (text == "0") return c;
  const auto parts = split(text, ',');
  if (static_cast<int>(parts.size()) != dim) throw FormatError("test function center needs " + std::to_string(dim) + " coordinates");
  for (int a = 0; a < dim; ++a) c[a] = parse_value<double>(parts[a]);
  return c;
}

}  // namespace

TestFunction TestFunction::bump(const Point& center, double radius) {
  if (!(radius > 0.0)) throw FormatError("bump radius must be positive");
  return TestFunction(Kind::Bump, center, radius);
}

TestFunction TestFunction::poly_bump(const Point& center, double radius, const std::array<int, kMaxDim>& exponents) {
  if (!(radius > 0.0)) throw FormatError("bump radius must be positive");
  for (int e : exponents) {
    if (e < 0) throw FormatError("monomial exponents must be nonnegative");
  }
  TestFunction f(Kind::PolyBump, center, radius);
  f.exponents_ = exponents;
  return f;
}

TestFunction TestFunction::plateau(const Point& center, double inner, double outer) {
  if (!(inner > 0.0) || !(outer > inner)) throw FormatError("plateau needs 0 < inner < outer");
  TestFunction f(Kind::Plateau, center, outer);
  f.inner_ = inner;
  return f;
}

TestFunction TestFunction::parse(std::string_view text, int dim) {
  const auto parts = split(text, ':');
  const std::string_view kind = parts.front();
  if (kind == "bump" && parts.size() == 3) {
    return bump(parse_center(parts[1], dim), parse_value<double>(parts[2]));
  }
  if (kind == "polybump" && parts.size() == 4) {
    std::array<int, kMaxDim> exps{0, 0, 0};
    const auto e = split(parts[3], ',');
    if (static_cast<int>(e.size()) != dim) throw FormatError("polybump needs one exponent per axis");
    for (int a = 0; a < dim; ++a) exps[a] = parse_value<int>(e[a]);
    return poly_bump(parse_center(parts[1], dim), parse_value<double>(parts[2]), exps);
  }
  if (kind == "plateau" && parts.size() == 4) {
    return plateau(parse_center(parts[1], dim), parse_value<double>(parts[2]), parse_value<double>(parts[3]));
  }
  throw FormatError("cannot parse test function '" + std::string(text) + "'");
}

double TestFunction::operator()(const Point& x) const {
  const Point y = x - center_;
  const double r = euclidean_norm(y);
  if (r >= radius_) return 0.0;
  switch (kind_) {
    case Kind::Plateau:
      return smooth_step((radius_ - r) / (radius_ - inner_));
    case Kind::Bump:
    case Kind::PolyBump: {
      const double q = (r * r) / (radius_ * radius_);
      double value = std::exp(1.0 - 1.0 / (1.0 - q));
      if (kind_ == Kind::PolyBump) {
        for (int a = 0; a < kMaxDim; ++a) value *= std::pow(y[a] / radius_, exponents_[a]);
      }
      return value;
    }
  }
  return 0.0;
}

std::string TestFunction::describe(int dim) const {
  std::ostringstream os;
  os.precision(17);
  auto center = [&] {
    for (int a = 0; a < dim; ++a) os << (a ? "," : "") << center_[a];
  };
  switch (kind_) {
    case Kind::Bump:
      os << "bump:";
      center();
      os << ':' << radius_;
      break;
    case Kind::PolyBump:
      os << "polybump:";
      center();
      os << ':' << radius_ << ':';
      for (int a = 0; a < dim; ++a) os << (a ? "," : "") << exponents_[a];
      break;
    case Kind::Plateau:
      os << "plateau:";
      center();
      os << ':' << inner_ << ':' << radius_;
      break;
  }
  return os.str();
}

}  // namespace sandpile
