#include "darmois/subgroup.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "darmois/errors.hpp"

namespace darmois {

Subgroup Subgroup::full(const LcaGroup& g) {
  Subgroup s;
  s.kind_ = Kind::Full;
  s.group_ = g;
  return s;
}

Subgroup Subgroup::trivial(const LcaGroup& g) {
  Subgroup s;
  s.kind_ = Kind::Trivial;
  s.group_ = g;
  return s;
}

Subgroup Subgroup::doubled(const LcaGroup& g) {
  Subgroup s;
  s.kind_ = Kind::Doubled;
  s.group_ = g;
  return s;
}

Subgroup Subgroup::annihilator(const LcaGroup& g, std::vector<Element> dual_generators) {
  const LcaGroup dual = g.dual();
  for (const Element& gen : dual_generators)
    if (gen.group() != dual)
      throw InputError("annihilator generators must live in the dual group");
  Subgroup s;
  s.kind_ = Kind::Annihilator;
  s.group_ = g;
  s.generators_ = std::move(dual_generators);
  return s;
}

Subgroup Subgroup::kernel_real(const Automorphism& eps) {
  eps.validate();
  Subgroup s;
  s.kind_ = Kind::KernelReal;
  s.group_ = eps.group;
  s.eps_ = eps;
  return s;
}

bool Subgroup::contains(const Element& x, double tol) const {
  if (x.group() != group_) throw InputError("membership test on foreign element");
  switch (kind_) {
    case Kind::Full:
      return true;
    case Kind::Trivial:
      return x.is_zero(tol);
    case Kind::Doubled: {
      // 2x is onto for Real and Circle; even integers on Z; for Z(n) the
      // doubling map is onto iff n is odd, else the even residues.
      for (std::size_t i = 0; i < group_.num_factors(); ++i) {
        const Factor& f = group_.factor(i);
        if (f.kind == FactorKind::Integers && x.k(i) % 2 != 0) return false;
        if (f.kind == FactorKind::Cyclic && f.n % 2 == 0 && x.k(i) % 2 != 0)
          return false;
      }
      return true;
    }
    case Kind::Annihilator: {
      for (const Element& gen : generators_)
        if (std::abs(pair(x, gen) - std::complex<double>(1.0, 0.0)) > tol) return false;
      return true;
    }
    case Kind::KernelReal: {
      for (std::size_t i = 0; i < group_.num_factors(); ++i) {
        const Factor& f = group_.factor(i);
        switch (f.kind) {
          case FactorKind::Real: break;
          case FactorKind::Circle: {
            const double t = normalize_angle(x.x(i));
            if (std::min(t, 2 * std::numbers::pi - t) > tol) return false;
            break;
          }
          case FactorKind::Integers:
          case FactorKind::Cyclic:
            if (x.k(i) != 0) return false;
            break;
        }
      }
      const auto b = static_cast<Eigen::Index>(group_.real_dims());
      if (b == 0) return true;
      Eigen::VectorXd t(b);
      Eigen::Index d = 0;
      for (std::size_t i = 0; i < group_.num_factors(); ++i)
        if (group_.factor(i).kind == FactorKind::Real) t(d++) = x.x(i);
      const Eigen::VectorXd r =
          (Eigen::MatrixXd::Identity(b, b) - eps_->alpha) * t;
      return r.cwiseAbs().maxCoeff() <= tol * std::max(1.0, t.cwiseAbs().maxCoeff());
    }
  }
  return false;
}

std::string Subgroup::to_string() const {
  switch (kind_) {
    case Kind::Full: return group_.to_string();
    case Kind::Trivial: return "{0}";
    case Kind::Doubled: return "(" + group_.to_string() + ")^(2)";
    case Kind::Annihilator: {
      std::ostringstream os;
      os << "Ann(";
      for (std::size_t i = 0; i < generators_.size(); ++i)
        os << (i ? ", " : "") << generators_[i].to_string();
      os << ")";
      return os.str();
    }
    case Kind::KernelReal: return "Ker(I - eps)|_real";
  }
  return "?";
}

}  // namespace darmois
