#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace darmois {

// Factors of a locally compact Abelian group of the form
//   R^a x T^m x prod_i Z(n_i) x Z^q.
// Duality swaps Circle <-> Integers and fixes Real and Cyclic(n).
enum class FactorKind { Real, Circle, Cyclic, Integers };

struct Factor {
  FactorKind kind = FactorKind::Real;
  std::int64_t n = 0;  // modulus, Cyclic only (n >= 2)

  bool operator==(const Factor&) const = default;
};

Factor real_factor();
Factor circle_factor();
Factor cyclic_factor(std::int64_t n);
Factor integers_factor();

class LcaGroup {
 public:
  LcaGroup() = default;
  explicit LcaGroup(std::vector<Factor> factors);

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t num_factors() const { return factors_.size(); }
  const Factor& factor(std::size_t i) const { return factors_.at(i); }

  LcaGroup dual() const;

  std::size_t real_dims() const;
  std::size_t circle_dims() const;
  std::size_t cyclic_dims() const;
  std::size_t integer_dims() const;
  // Dimension of the coordinate block a quadratic form acts on: Real plus
  // Integers coordinates, in factor order.
  std::size_t lattice_dims() const { return real_dims() + integer_dims(); }

  bool is_finite() const;      // Cyclic factors only (or empty)
  std::int64_t order() const;  // product of moduli, finite groups only

  std::string to_string() const;
  bool operator==(const LcaGroup&) const = default;

 private:
  std::vector<Factor> factors_;
};

// One element, coordinates stored per factor:
//   Real      -> real coordinate
//   Circle    -> angle in [0, 2*pi)
//   Cyclic(n) -> residue in [0, n)
//   Integers  -> integer
class Element {
 public:
  Element() = default;
  explicit Element(LcaGroup group);
  static Element zero(const LcaGroup& group) { return Element(group); }

  const LcaGroup& group() const { return group_; }

  double x(std::size_t i) const;             // Real or Circle coordinate
  void set_x(std::size_t i, double value);   // normalizes Circle angles
  std::int64_t k(std::size_t i) const;       // Integers or Cyclic coordinate
  void set_k(std::size_t i, std::int64_t value);  // reduces Cyclic residues

  Element operator+(const Element& other) const;
  Element operator-() const;
  Element operator-(const Element& other) const { return *this + (-other); }

  bool approx_equal(const Element& other, double tol = 1e-9) const;
  bool is_zero(double tol = 1e-9) const;

  // Real and Integers coordinates as doubles, Real block first, factor order
  // within each block.
  std::vector<double> lattice_coords() const;

  std::string to_string() const;

 private:
  LcaGroup group_;
  std::vector<double> xs_;        // Real/Circle slots
  std::vector<std::int64_t> ks_;  // Integers/Cyclic slots
};

double normalize_angle(double theta);  // into [0, 2*pi)

// Duality pairing (x, y) for x in G, y in dual(G). Bicharacter of modulus one:
//   Real      x Real:     exp(i s t)
//   Circle    x Integers: exp(i n theta)
//   Integers  x Circle:   exp(i m phi)
//   Cyclic(n) x Cyclic(n): exp(2 pi i j k / n), j k reduced mod n exactly
std::complex<double> pair(const Element& x, const Element& y);
double pair_phase(const Element& x, const Element& y);

}  // namespace darmois
