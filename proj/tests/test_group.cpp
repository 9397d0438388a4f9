#include <cmath>
#include <complex>
#include <numbers>

#include "darmois/errors.hpp"
#include "darmois/group.hpp"
#include "doctest.h"

using namespace darmois;

namespace {
constexpr double kPi = std::numbers::pi;

LcaGroup mixed_group() {
  return LcaGroup({real_factor(), circle_factor(), cyclic_factor(6), integers_factor()});
}
}  // namespace

TEST_CASE("duality swaps circle and integers and fixes real and cyclic") {
  const LcaGroup g = mixed_group();
  const LcaGroup y = g.dual();
  REQUIRE(y.num_factors() == 4);
  CHECK(y.factor(0).kind == FactorKind::Real);
  CHECK(y.factor(1).kind == FactorKind::Integers);
  CHECK(y.factor(2).kind == FactorKind::Cyclic);
  CHECK(y.factor(2).n == 6);
  CHECK(y.factor(3).kind == FactorKind::Circle);
  CHECK(y.dual() == g);  // double dual
}

TEST_CASE("group invariants and dimension counters") {
  const LcaGroup g = mixed_group();
  CHECK(g.real_dims() == 1);
  CHECK(g.circle_dims() == 1);
  CHECK(g.cyclic_dims() == 1);
  CHECK(g.integer_dims() == 1);
  CHECK(g.lattice_dims() == 2);
  CHECK_FALSE(g.is_finite());

  const LcaGroup f({cyclic_factor(3), cyclic_factor(4)});
  CHECK(f.is_finite());
  CHECK(f.order() == 12);
  CHECK_THROWS_AS(g.order(), InputError);
  CHECK_THROWS_AS(cyclic_factor(1), InputError);
  CHECK_FALSE(g.to_string().empty());
}

TEST_CASE("pairing matches the per-factor formulas") {
  SUBCASE("real") {
    const LcaGroup g({real_factor()});
    Element x(g), y(g.dual());
    x.set_x(0, 1.5);
    y.set_x(0, 2.0);
    const std::complex<double> want(std::cos(3.0), std::sin(3.0));
    CHECK(std::abs(pair(x, y) - want) < 1e-15);
  }
  SUBCASE("circle against integer frequency") {
    const LcaGroup g({circle_factor()});
    Element x(g), y(g.dual());
    x.set_x(0, 0.7);
    y.set_k(0, 3);
    CHECK(std::abs(pair(x, y) - std::polar(1.0, 2.1)) < 1e-15);
  }
  SUBCASE("integer against circle phase") {
    const LcaGroup g({integers_factor()});
    Element x(g), y(g.dual());
    x.set_k(0, 2);
    y.set_x(0, 1.1);
    CHECK(std::abs(pair(x, y) - std::polar(1.0, 2.2)) < 1e-15);
  }
  SUBCASE("cyclic products reduce exactly mod n") {
    const LcaGroup g({cyclic_factor(5)});
    Element x(g), y(g.dual());
    x.set_k(0, 4);
    y.set_k(0, 4);  // 16 = 1 mod 5
    CHECK(pair_phase(x, y) == doctest::Approx(2.0 * kPi / 5.0).epsilon(1e-15));
    x.set_k(0, 3);  // 12 = 2 mod 5
    CHECK(pair_phase(x, y) == doctest::Approx(4.0 * kPi / 5.0).epsilon(1e-15));
  }
}

TEST_CASE("pairing is a bicharacter of modulus one") {
  const LcaGroup g = mixed_group();
  const LcaGroup yg = g.dual();
  Element x1(g), x2(g), y(yg);
  x1.set_x(0, 0.3);
  x1.set_x(1, 1.9);
  x1.set_k(2, 4);
  x1.set_k(3, -2);
  x2.set_x(0, -1.1);
  x2.set_x(1, 5.5);
  x2.set_k(2, 5);
  x2.set_k(3, 7);
  y.set_x(0, 0.8);
  y.set_k(1, -3);
  y.set_k(2, 2);
  y.set_x(3, 2.4);
  CHECK(std::abs(std::abs(pair(x1, y)) - 1.0) < 1e-15);
  CHECK(std::abs(pair(x1 + x2, y) - pair(x1, y) * pair(x2, y)) < 1e-12);
  CHECK(std::abs(pair(-x1, y) - std::conj(pair(x1, y))) < 1e-12);
  CHECK_THROWS_AS(pair(x1, x2), InputError);  // second argument not in the dual
}

TEST_CASE("element coordinates normalize and reduce") {
  const LcaGroup g = mixed_group();
  Element e(g);
  e.set_x(1, 2.0 * kPi + 0.5);  // circle wraps
  CHECK(e.x(1) == doctest::Approx(0.5).epsilon(1e-12));
  e.set_k(2, -1);  // cyclic reduces into [0, n)
  CHECK(e.k(2) == 5);
  e.set_k(2, 13);
  CHECK(e.k(2) == 1);
  CHECK_THROWS_AS(e.set_k(0, 1), InputError);   // real slot
  CHECK_THROWS_AS(e.set_x(2, 0.5), InputError); // cyclic slot

  Element a(g);
  a.set_x(0, 1.25);
  a.set_x(1, 5.0);
  a.set_k(2, 4);
  a.set_k(3, -7);
  CHECK((a + (-a)).is_zero(1e-12));
  CHECK((a - a).is_zero(1e-12));
}

TEST_CASE("circle closeness is measured around the wrap point") {
  const LcaGroup g({circle_factor()});
  Element a(g), b(g);
  a.set_x(0, 1e-12);
  b.set_x(0, 2.0 * kPi - 1e-12);
  CHECK(a.approx_equal(b, 1e-9));
  b.set_x(0, 0.1);
  CHECK_FALSE(a.approx_equal(b, 1e-9));
}

TEST_CASE("lattice coordinates list real then integer slots in factor order") {
  const LcaGroup g({real_factor(), circle_factor(), integers_factor(), real_factor()});
  Element e(g);
  e.set_x(0, 1.5);
  e.set_x(1, 0.4);
  e.set_k(2, -3);
  e.set_x(3, 2.25);
  const std::vector<double> c = e.lattice_coords();
  REQUIRE(c.size() == 3);
  CHECK(c[0] == 1.5);
  CHECK(c[1] == 2.25);
  CHECK(c[2] == -3.0);
}

TEST_CASE("angle normalization lands in [0, 2 pi)") {
  CHECK(normalize_angle(2.0 * kPi) == doctest::Approx(0.0));
  CHECK(normalize_angle(-kPi / 2.0) == doctest::Approx(1.5 * kPi));
  CHECK(normalize_angle(7.0) == doctest::Approx(7.0 - 2.0 * kPi));
}
