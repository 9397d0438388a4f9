#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "darmois/group.hpp"

namespace darmois {

// Topological automorphism of R^b x T^m x prod Z(n_i) x Z^q, block form:
//   real block:  t -> alpha t  (invertible b x b), plus cross contributions
//                n_j v_j from each Integers factor
//   Circle j:    theta -> <v_j, t> + sign_j theta   (mod 2 pi)
//   Integers j:  n -> sign_j n  (its cross column v_j feeds the real block)
//   Cyclic i:    k -> unit_i k mod n_i, gcd(unit_i, n_i) = 1
// cross/sign entries are indexed over Circle and Integers factors in factor
// order; units over Cyclic factors in factor order.
struct Automorphism {
  LcaGroup group;
  Eigen::MatrixXd alpha;
  std::vector<Eigen::VectorXd> cross;
  std::vector<int> signs;
  std::vector<std::int64_t> units;

  static Automorphism identity(const LcaGroup& g);
  // -1 on every factor (units n_i - 1 on cyclic factors)
  static Automorphism inversion(const LcaGroup& g);

  void validate() const;  // throws InputError on malformed blocks

  Element apply(const Element& x) const;

  // Adjoint automorphism of dual(group): same signs, same cross vectors, same
  // units, transposed real block. Characterized by (delta x, y) = (x, adjoint y).
  Automorphism adjoint() const;

  Automorphism inverse() const;

  bool approx_equal(const Automorphism& other, double tol = 1e-12) const;
};

std::int64_t mod_inverse(std::int64_t u, std::int64_t n);  // throws MathError if not coprime

}  // namespace darmois
