#include "darmois/group.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "darmois/errors.hpp"

namespace darmois {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t mod_reduce(std::int64_t v, std::int64_t n) {
  std::int64_t r = v % n;
  return r < 0 ? r + n : r;
}
}  // namespace

Factor real_factor() { return {FactorKind::Real, 0}; }
Factor circle_factor() { return {FactorKind::Circle, 0}; }
Factor cyclic_factor(std::int64_t n) {
  if (n < 2) throw InputError("cyclic factor needs modulus >= 2");
  return {FactorKind::Cyclic, n};
}
Factor integers_factor() { return {FactorKind::Integers, 0}; }

LcaGroup::LcaGroup(std::vector<Factor> factors) : factors_(std::move(factors)) {
  for (const Factor& f : factors_) {
    if (f.kind == FactorKind::Cyclic && f.n < 2)
      throw InputError("cyclic factor needs modulus >= 2");
  }
}

LcaGroup LcaGroup::dual() const {
  std::vector<Factor> out;
  out.reserve(factors_.size());
  for (const Factor& f : factors_) {
    switch (f.kind) {
      case FactorKind::Real: out.push_back(real_factor()); break;
      case FactorKind::Circle: out.push_back(integers_factor()); break;
      case FactorKind::Integers: out.push_back(circle_factor()); break;
      case FactorKind::Cyclic: out.push_back(cyclic_factor(f.n)); break;
    }
  }
  return LcaGroup(std::move(out));
}

std::size_t LcaGroup::real_dims() const {
  std::size_t c = 0;
  for (const Factor& f : factors_) c += f.kind == FactorKind::Real;
  return c;
}
std::size_t LcaGroup::circle_dims() const {
  std::size_t c = 0;
  for (const Factor& f : factors_) c += f.kind == FactorKind::Circle;
  return c;
}
std::size_t LcaGroup::cyclic_dims() const {
  std::size_t c = 0;
  for (const Factor& f : factors_) c += f.kind == FactorKind::Cyclic;
  return c;
}
std::size_t LcaGroup::integer_dims() const {
  std::size_t c = 0;
  for (const Factor& f : factors_) c += f.kind == FactorKind::Integers;
  return c;
}

bool LcaGroup::is_finite() const {
  for (const Factor& f : factors_)
    if (f.kind != FactorKind::Cyclic) return false;
  return true;
}

std::int64_t LcaGroup::order() const {
  if (!is_finite()) throw InputError("order() requires a finite group");
  std::int64_t o = 1;
  for (const Factor& f : factors_) o *= f.n;
  return o;
}

std::string LcaGroup::to_string() const {
  if (factors_.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) os << " x ";
    switch (factors_[i].kind) {
      case FactorKind::Real: os << "R"; break;
      case FactorKind::Circle: os << "T"; break;
      case FactorKind::Integers: os << "Z"; break;
      case FactorKind::Cyclic: os << "Z(" << factors_[i].n << ")"; break;
    }
  }
  return os.str();
}

double normalize_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t = 0;  // fmod rounding can land exactly on 2*pi
  return t;
}

Element::Element(LcaGroup group)
    : group_(std::move(group)),
      xs_(group_.num_factors(), 0.0),
      ks_(group_.num_factors(), 0) {}

double Element::x(std::size_t i) const {
  const FactorKind k = group_.factor(i).kind;
  if (k != FactorKind::Real && k != FactorKind::Circle)
    throw InputError("x() on a discrete factor");
  return xs_.at(i);
}

void Element::set_x(std::size_t i, double value) {
  const FactorKind k = group_.factor(i).kind;
  if (k == FactorKind::Real) {
    xs_.at(i) = value;
  } else if (k == FactorKind::Circle) {
    xs_.at(i) = normalize_angle(value);
  } else {
    throw InputError("set_x() on a discrete factor");
  }
}

std::int64_t Element::k(std::size_t i) const {
  const FactorKind k = group_.factor(i).kind;
  if (k != FactorKind::Integers && k != FactorKind::Cyclic)
    throw InputError("k() on a continuous factor");
  return ks_.at(i);
}

void Element::set_k(std::size_t i, std::int64_t value) {
  const Factor& f = group_.factor(i);
  if (f.kind == FactorKind::Integers) {
    ks_.at(i) = value;
  } else if (f.kind == FactorKind::Cyclic) {
    ks_.at(i) = mod_reduce(value, f.n);
  } else {
    throw InputError("set_k() on a continuous factor");
  }
}

Element Element::operator+(const Element& other) const {
  if (group_ != other.group_) throw InputError("adding elements of different groups");
  Element out(group_);
  for (std::size_t i = 0; i < group_.num_factors(); ++i) {
    switch (group_.factor(i).kind) {
      case FactorKind::Real: out.xs_[i] = xs_[i] + other.xs_[i]; break;
      case FactorKind::Circle: out.xs_[i] = normalize_angle(xs_[i] + other.xs_[i]); break;
      case FactorKind::Integers: out.ks_[i] = ks_[i] + other.ks_[i]; break;
      case FactorKind::Cyclic:
        out.ks_[i] = mod_reduce(ks_[i] + other.ks_[i], group_.factor(i).n);
        break;
    }
  }
  return out;
}

Element Element::operator-() const {
  Element out(group_);
  for (std::size_t i = 0; i < group_.num_factors(); ++i) {
    switch (group_.factor(i).kind) {
      case FactorKind::Real: out.xs_[i] = -xs_[i]; break;
      case FactorKind::Circle: out.xs_[i] = normalize_angle(-xs_[i]); break;
      case FactorKind::Integers: out.ks_[i] = -ks_[i]; break;
      case FactorKind::Cyclic:
        out.ks_[i] = mod_reduce(-ks_[i], group_.factor(i).n);
        break;
    }
  }
  return out;
}

bool Element::approx_equal(const Element& other, double tol) const {
  if (group_ != other.group_) return false;
  for (std::size_t i = 0; i < group_.num_factors(); ++i) {
    switch (group_.factor(i).kind) {
      case FactorKind::Real:
        if (std::abs(xs_[i] - other.xs_[i]) > tol) return false;
        break;
      case FactorKind::Circle: {
        double d = std::abs(normalize_angle(xs_[i]) - normalize_angle(other.xs_[i]));
        if (std::min(d, kTwoPi - d) > tol) return false;
        break;
      }
      case FactorKind::Integers:
      case FactorKind::Cyclic:
        if (ks_[i] != other.ks_[i]) return false;
        break;
    }
  }
  return true;
}

bool Element::is_zero(double tol) const { return approx_equal(Element(group_), tol); }

std::vector<double> Element::lattice_coords() const {
  std::vector<double> out;
  out.reserve(group_.lattice_dims());
  for (std::size_t i = 0; i < group_.num_factors(); ++i)
    if (group_.factor(i).kind == FactorKind::Real) out.push_back(xs_[i]);
  for (std::size_t i = 0; i < group_.num_factors(); ++i)
    if (group_.factor(i).kind == FactorKind::Integers)
      out.push_back(static_cast<double>(ks_[i]));
  return out;
}

std::string Element::to_string() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < group_.num_factors(); ++i) {
    if (i) os << ", ";
    switch (group_.factor(i).kind) {
      case FactorKind::Real:
      case FactorKind::Circle: os << xs_[i]; break;
      case FactorKind::Integers:
      case FactorKind::Cyclic: os << ks_[i]; break;
    }
  }
  os << ")";
  return os.str();
}

double pair_phase(const Element& x, const Element& y) {
  const LcaGroup& gx = x.group();
  const LcaGroup& gy = y.group();
  if (gx.dual() != gy)
    throw InputError("pair(): second argument must live in the dual group");
  double phase = 0;
  for (std::size_t i = 0; i < gx.num_factors(); ++i) {
    switch (gx.factor(i).kind) {
      case FactorKind::Real: phase += x.x(i) * y.x(i); break;
      case FactorKind::Circle: phase += x.x(i) * static_cast<double>(y.k(i)); break;
      case FactorKind::Integers: phase += static_cast<double>(x.k(i)) * y.x(i); break;
      case FactorKind::Cyclic: {
        const std::int64_t n = gx.factor(i).n;
        const std::int64_t r = mod_reduce(x.k(i) * y.k(i), n);
        phase += kTwoPi * static_cast<double>(r) / static_cast<double>(n);
        break;
      }
    }
  }
  return phase;
}

std::complex<double> pair(const Element& x, const Element& y) {
  const double phase = pair_phase(x, y);
  return {std::cos(phase), std::sin(phase)};
}

}  // namespace darmois
