#include "darmois/embedding.hpp"

#include <sstream>

#include "darmois/errors.hpp"

namespace darmois {

Rational rational(long long num, long long den) {
  if (den == 0) throw InputError("rational: zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << "/" << r.denominator();
  return os.str();
}

void RationalBasis::validate() const {
  if (ambient == 0) throw InputError("rational basis: ambient rank must be positive");
  if (vectors.empty()) throw InputError("rational basis: empty system");
  if (vectors.size() > ambient)
    throw InputError("rational basis: more vectors than ambient rank");
  for (const auto& v : vectors)
    if (v.size() != ambient)
      throw InputError("rational basis: vector has wrong ambient dimension");
}

std::vector<Rational> rational_coordinates(const std::vector<Rational>& d,
                                           const RationalBasis& basis) {
  basis.validate();
  if (d.size() != basis.ambient)
    throw InputError("rational_coordinates: point has wrong ambient dimension");

  const std::size_t l = basis.ambient;
  const std::size_t r = basis.vectors.size();

  // augmented system [B | d] with B columns the basis vectors; exact
  // fraction-free-ish elimination with full pivot-by-first-nonzero
  std::vector<std::vector<Rational>> m(l, std::vector<Rational>(r + 1));
  for (std::size_t row = 0; row < l; ++row) {
    for (std::size_t col = 0; col < r; ++col) m[row][col] = basis.vectors[col][row];
    m[row][r] = d[row];
  }

  std::vector<std::size_t> pivot_row(r, SIZE_MAX);
  std::size_t row = 0;
  for (std::size_t col = 0; col < r && row < l; ++col) {
    std::size_t sel = SIZE_MAX;
    for (std::size_t i = row; i < l; ++i)
      if (m[i][col] != Rational(0)) {
        sel = i;
        break;
      }
    if (sel == SIZE_MAX) throw MathError("rational_coordinates: basis system is dependent");
    std::swap(m[sel], m[row]);
    const Rational p = m[row][col];
    for (std::size_t j = col; j <= r; ++j) m[row][j] /= p;
    for (std::size_t i = 0; i < l; ++i) {
      if (i == row || m[i][col] == Rational(0)) continue;
      const Rational f = m[i][col];
      for (std::size_t j = col; j <= r; ++j) m[i][j] -= f * m[row][j];
    }
    pivot_row[col] = row;
    ++row;
  }
  for (std::size_t col = 0; col < r; ++col)
    if (pivot_row[col] == SIZE_MAX)
      throw MathError("rational_coordinates: basis system is dependent");

  // rows below the pivots must have vanished, else d is outside the span
  for (std::size_t i = row; i < l; ++i)
    if (m[i][r] != Rational(0))
      throw MathError("rational_coordinates: point outside the rational span");

  std::vector<Rational> q(r);
  for (std::size_t col = 0; col < r; ++col) q[col] = m[pivot_row[col]][r];
  return q;
}

EmbeddedPoint embed(const std::vector<Rational>& s, const std::vector<Rational>& d,
                    const std::vector<BigInt>& k, const RationalBasis& basis) {
  EmbeddedPoint out;
  out.s = s;
  out.q = rational_coordinates(d, basis);
  out.k = k;
  return out;
}

}  // namespace darmois
