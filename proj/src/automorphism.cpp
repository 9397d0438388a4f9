#include "darmois/automorphism.hpp"

#include <numeric>

#include "darmois/errors.hpp"

namespace darmois {

namespace {

std::int64_t mod_reduce(std::int64_t v, std::int64_t n) {
  std::int64_t r = v % n;
  return r < 0 ? r + n : r;
}

// indices of Circle and Integers factors, in factor order
std::vector<std::size_t> cross_factor_indices(const LcaGroup& g) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.num_factors(); ++i) {
    const FactorKind k = g.factor(i).kind;
    if (k == FactorKind::Circle || k == FactorKind::Integers) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> cyclic_factor_indices(const LcaGroup& g) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.num_factors(); ++i)
    if (g.factor(i).kind == FactorKind::Cyclic) out.push_back(i);
  return out;
}

}  // namespace

std::int64_t mod_inverse(std::int64_t u, std::int64_t n) {
  u = mod_reduce(u, n);
  std::int64_t t = 0, new_t = 1, r = n, new_r = u;
  while (new_r != 0) {
    const std::int64_t q = r / new_r;
    t = std::exchange(new_t, t - q * new_t);
    r = std::exchange(new_r, r - q * new_r);
  }
  if (r != 1) throw MathError("mod_inverse: arguments not coprime");
  return mod_reduce(t, n);
}

Automorphism Automorphism::identity(const LcaGroup& g) {
  Automorphism a;
  a.group = g;
  const auto b = static_cast<Eigen::Index>(g.real_dims());
  a.alpha = Eigen::MatrixXd::Identity(b, b);
  a.cross.assign(cross_factor_indices(g).size(), Eigen::VectorXd::Zero(b));
  a.signs.assign(cross_factor_indices(g).size(), 1);
  for (std::size_t i : cyclic_factor_indices(g)) {
    (void)i;
    a.units.push_back(1);
  }
  return a;
}

Automorphism Automorphism::inversion(const LcaGroup& g) {
  Automorphism a = identity(g);
  a.alpha = -a.alpha;
  for (int& s : a.signs) s = -1;
  const auto cyc = cyclic_factor_indices(g);
  for (std::size_t j = 0; j < cyc.size(); ++j) a.units[j] = g.factor(cyc[j]).n - 1;
  return a;
}

void Automorphism::validate() const {
  const auto b = static_cast<Eigen::Index>(group.real_dims());
  if (alpha.rows() != b || alpha.cols() != b)
    throw InputError("automorphism: real block has wrong shape");
  if (b > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(alpha);
    if (!lu.isInvertible()) throw InputError("automorphism: real block is singular");
  }
  const auto nc = cross_factor_indices(group).size();
  if (cross.size() != nc) throw InputError("automorphism: wrong number of cross vectors");
  for (const auto& v : cross)
    if (v.size() != b) throw InputError("automorphism: cross vector has wrong dimension");
  if (signs.size() != nc) throw InputError("automorphism: wrong number of signs");
  for (int s : signs)
    if (s != 1 && s != -1) throw InputError("automorphism: signs must be +-1");
  const auto cyc = cyclic_factor_indices(group);
  if (units.size() != cyc.size()) throw InputError("automorphism: wrong number of units");
  for (std::size_t j = 0; j < cyc.size(); ++j) {
    const std::int64_t n = group.factor(cyc[j]).n;
    if (std::gcd(mod_reduce(units[j], n), n) != 1)
      throw InputError("automorphism: unit not coprime to modulus");
  }
}

Element Automorphism::apply(const Element& x) const {
  if (x.group() != group) throw InputError("automorphism applied to foreign element");
  const auto b = static_cast<Eigen::Index>(group.real_dims());
  Eigen::VectorXd t(b);
  {
    Eigen::Index d = 0;
    for (std::size_t i = 0; i < group.num_factors(); ++i)
      if (group.factor(i).kind == FactorKind::Real) t(d++) = x.x(i);
  }
  Eigen::VectorXd new_t = alpha * t;
  // Integers-factor cross contributions land in the real block.
  {
    std::size_t c = 0;
    for (std::size_t i = 0; i < group.num_factors(); ++i) {
      const FactorKind k = group.factor(i).kind;
      if (k == FactorKind::Integers) {
        new_t += static_cast<double>(x.k(i)) * cross[c];
        ++c;
      } else if (k == FactorKind::Circle) {
        ++c;
      }
    }
  }
  Element out(group);
  Eigen::Index d = 0;
  std::size_t c = 0, cy = 0;
  for (std::size_t i = 0; i < group.num_factors(); ++i) {
    switch (group.factor(i).kind) {
      case FactorKind::Real:
        out.set_x(i, new_t(d));
        ++d;
        break;
      case FactorKind::Circle:
        out.set_x(i, cross[c].dot(t) + signs[c] * x.x(i));
        ++c;
        break;
      case FactorKind::Integers:
        out.set_k(i, signs[c] * x.k(i));
        ++c;
        break;
      case FactorKind::Cyclic:
        out.set_k(i, mod_reduce(units[cy] * x.k(i), group.factor(i).n));
        ++cy;
        break;
    }
  }
  return out;
}

Automorphism Automorphism::adjoint() const {
  Automorphism a;
  a.group = group.dual();
  a.alpha = alpha.transpose();
  a.cross = cross;
  a.signs = signs;
  a.units = units;
  return a;
}

Automorphism Automorphism::inverse() const {
  Automorphism a;
  a.group = group;
  const auto b = static_cast<Eigen::Index>(group.real_dims());
  Eigen::MatrixXd ainv = b > 0 ? alpha.inverse().eval() : Eigen::MatrixXd(0, 0);
  a.alpha = ainv;
  a.signs = signs;
  a.cross.reserve(cross.size());
  std::size_t c = 0;
  for (std::size_t i = 0; i < group.num_factors(); ++i) {
    const FactorKind k = group.factor(i).kind;
    if (k == FactorKind::Circle) {
      a.cross.push_back((-signs[c] * (ainv.transpose() * cross[c])).eval());
      ++c;
    } else if (k == FactorKind::Integers) {
      a.cross.push_back((-signs[c] * (ainv * cross[c])).eval());
      ++c;
    }
  }
  const auto cyc = cyclic_factor_indices(group);
  for (std::size_t j = 0; j < cyc.size(); ++j)
    a.units.push_back(mod_inverse(units[j], group.factor(cyc[j]).n));
  return a;
}

bool Automorphism::approx_equal(const Automorphism& other, double tol) const {
  if (group != other.group || signs != other.signs || units != other.units) return false;
  if (alpha.size() > 0 && (alpha - other.alpha).cwiseAbs().maxCoeff() > tol) return false;
  for (std::size_t j = 0; j < cross.size(); ++j)
    if (cross[j].size() > 0 && (cross[j] - other.cross[j]).cwiseAbs().maxCoeff() > tol)
      return false;
  return true;
}

}  // namespace darmois
