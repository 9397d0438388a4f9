#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>
#include <string>
#include <vector>

namespace darmois {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::rational<BigInt>;

Rational rational(long long num, long long den = 1);
std::string to_string(const Rational& r);

// A maximal Q-linearly independent system d_1..d_r inside a rank-r rational
// subgroup of Q^ambient.
struct RationalBasis {
  std::size_t ambient = 0;
  std::vector<std::vector<Rational>> vectors;

  void validate() const;  // throws InputError on shape problems
};

// Exact coordinates q with d = sum_i q_i d_i, by Gaussian elimination over Q.
// Throws MathError if the basis is dependent or d lies outside the span.
std::vector<Rational> rational_coordinates(const std::vector<Rational>& d,
                                           const RationalBasis& basis);

// Image of (s, d, k) in Q^a x Q^r x Z^m: real coordinates pass through, the
// rational-subgroup coordinate d is replaced by its exact basis coordinates,
// integer coordinates pass through. Additive and injective on the domain.
struct EmbeddedPoint {
  std::vector<Rational> s;
  std::vector<Rational> q;
  std::vector<BigInt> k;

  bool operator==(const EmbeddedPoint&) const = default;
};

EmbeddedPoint embed(const std::vector<Rational>& s, const std::vector<Rational>& d,
                    const std::vector<BigInt>& k, const RationalBasis& basis);

}  // namespace darmois
