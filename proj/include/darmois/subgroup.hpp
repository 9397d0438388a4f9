#pragma once

#include <optional>
#include <string>
#include <vector>

#include "darmois/automorphism.hpp"
#include "darmois/group.hpp"

namespace darmois {

// Closed subgroups the toolkit reasons about, by description:
//   Full          whole group
//   Trivial       {0}
//   Doubled       G^(2) = {2x : x in G}
//   Annihilator   {x : (x, g) = 1 for every generator g in dual(G)}
//   KernelReal    Ker(I - eps) restricted to the real subspace (other
//                 coordinates zero)
class Subgroup {
 public:
  enum class Kind { Full, Trivial, Doubled, Annihilator, KernelReal };

  static Subgroup full(const LcaGroup& g);
  static Subgroup trivial(const LcaGroup& g);
  static Subgroup doubled(const LcaGroup& g);
  static Subgroup annihilator(const LcaGroup& g, std::vector<Element> dual_generators);
  static Subgroup kernel_real(const Automorphism& eps);

  Kind kind() const { return kind_; }
  const LcaGroup& group() const { return group_; }
  const std::vector<Element>& generators() const { return generators_; }

  bool contains(const Element& x, double tol = 1e-9) const;
  std::string to_string() const;

 private:
  Kind kind_ = Kind::Full;
  LcaGroup group_;
  std::vector<Element> generators_;     // Annihilator only
  std::optional<Automorphism> eps_;     // KernelReal only
};

}  // namespace darmois
