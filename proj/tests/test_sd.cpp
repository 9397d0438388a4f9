#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <memory>

#include "darmois/automorphism.hpp"
#include "darmois/charfn.hpp"
#include "darmois/errors.hpp"
#include "darmois/grid.hpp"
#include "darmois/group.hpp"
#include "darmois/sd.hpp"
#include "doctest.h"

using namespace darmois;

namespace {

Eigen::MatrixXd scalar(double v) {
  Eigen::MatrixXd q(1, 1);
  q << v;
  return q;
}

// component shaped like the solution family on the circle
CharFn circle_component(double sigma, double kappa, int which, double theta0 = 0.0) {
  const LcaGroup g({circle_factor()});
  Element shift(g);
  shift.set_x(0, theta0);
  CharFn gauss = gaussian_charfn(g, shift, scalar(sigma));
  if (kappa == 0.0) return gauss;
  return convolve(gauss, signed_pi_charfn(g, kappa, which));
}

SdInstance circle_instance(const CharFn& mu1, const CharFn& mu2) {
  const LcaGroup g({circle_factor()});
  SdInstance inst;
  inst.group = g;
  inst.components = {mu1, mu2};
  inst.betas = {Automorphism::identity(g), Automorphism::inversion(g)};
  return inst;
}

std::shared_ptr<const DualLattice> int_lattice(std::int64_t radius) {
  const LcaGroup z({integers_factor()});
  return std::make_shared<DualLattice>(DualLattice::symmetric(z, radius));
}

}  // namespace

TEST_CASE("matched circle pairs satisfy the equation to rounding error") {
  const CharFn mu1 = circle_component(0.8, 0.12, 1, 0.7);
  const CharFn mu2 = circle_component(0.8, 0.12, 2, 5.1);
  const SdInstance inst = circle_instance(mu1, mu2);
  const DualLattice lat = instance_lattice(inst, GridSpec{8, 0, 0.0});
  const SdReport rep = sd_residual(inst, lat, 1e-12);
  CHECK(rep.pass);
  CHECK(rep.max_residual <= 1e-13);
  CHECK(rep.n_points == 17);
  CHECK(rep.n_pairs == 17 * 17);
  CHECK(rep.n_skipped == 0);
}

TEST_CASE("mismatched quadratic coefficients leave the known gap at (1, 1)") {
  const CharFn mu1 = circle_component(0.5, 0.0, 1);
  const CharFn mu2 = circle_component(0.7, 0.0, 2);
  const SdInstance inst = circle_instance(mu1, mu2);
  const LcaGroup y({integers_factor()});
  Element u(y), v(y);
  u.set_k(0, 1);
  v.set_k(0, 1);
  // |e^{-2} - e^{-2.4}|
  CHECK(sd_residual_at(inst, u, v) ==
        doctest::Approx(0.04461732994720018).epsilon(1e-12));
  const DualLattice lat = instance_lattice(inst, GridSpec{8, 0, 0.0});
  const SdReport rep = sd_residual(inst, lat, 1e-9);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_residual >= 0.04);
}

TEST_CASE("line pairs with equal coefficients solve the inverted-coefficient equation") {
  const LcaGroup g({real_factor()});
  SdInstance inst;
  inst.group = g;
  Element x1(g), x2(g);
  x1.set_x(0, 0.8);
  x2.set_x(0, -1.7);
  inst.components = {gaussian_charfn(g, x1, scalar(0.6)),
                     gaussian_charfn(g, x2, scalar(0.6))};
  inst.betas = {Automorphism::identity(g), Automorphism::inversion(g)};
  const DualLattice lat = instance_lattice(inst, GridSpec{0, 21, 5.0});
  const SdReport rep = sd_residual(inst, lat, 1e-12);
  CHECK(rep.pass);
  CHECK(rep.max_residual <= 1e-13);
}

TEST_CASE("explicit identity coefficient lists match the empty default") {
  const CharFn mu1 = circle_component(1.0, 0.1, 1);
  const CharFn mu2 = circle_component(1.0, 0.1, 2);
  SdInstance inst = circle_instance(mu1, mu2);
  const DualLattice lat = instance_lattice(inst, GridSpec{6, 0, 0.0});
  const double with_default = sd_residual(inst, lat, 1e-9).max_residual;
  inst.alphas = {Automorphism::identity(inst.group),
                 Automorphism::identity(inst.group)};
  const double with_explicit = sd_residual(inst, lat, 1e-9).max_residual;
  CHECK(with_default == with_explicit);
}

TEST_CASE("product pairs on the line-times-circle group pass with coupled forms") {
  const LcaGroup g({real_factor(), circle_factor()});
  Eigen::MatrixXd q(2, 2);
  q << 0.5, 0.2, 0.2, 1.0;
  Element x1(g), x2(g);
  x1.set_x(0, 0.4);
  x1.set_x(1, 2.2);
  x2.set_x(0, -0.9);
  x2.set_x(1, 0.3);
  const CharFn mu1 = convolve(gaussian_charfn(g, x1, q), signed_pi_charfn(g, 0.1, 1));
  const CharFn mu2 = convolve(gaussian_charfn(g, x2, q), signed_pi_charfn(g, 0.1, 2));
  SdInstance inst;
  inst.group = g;
  inst.components = {mu1, mu2};
  inst.betas = {Automorphism::identity(g), Automorphism::inversion(g)};
  const DualLattice lat = instance_lattice(inst, GridSpec{6, 9, 3.0});
  const SdReport rep = sd_residual(inst, lat, 1e-12);
  CHECK(rep.pass);
  CHECK(rep.max_residual <= 1e-12);
}

TEST_CASE("tabulated components skip pairs that leave their lattice") {
  const LcaGroup g({circle_factor()});
  const CharFn closed1 = circle_component(1.0, 0.1, 1);
  auto lat4 = int_lattice(4);
  std::vector<std::complex<double>> vals(lat4->size());
  for (std::size_t i = 0; i < lat4->size(); ++i)
    vals[i] = closed1.eval(lat4->element_at(i));
  SdInstance inst =
      circle_instance(CharFn::tabulated(lat4, vals), circle_component(1.0, 0.1, 2));
  const SdReport rep = sd_residual(inst, *lat4, 1e-12);
  CHECK(rep.pass);
  CHECK(rep.n_skipped > 0);
  CHECK(rep.n_pairs + rep.n_skipped == 81);
}

TEST_CASE("instances are validated before evaluation") {
  const LcaGroup g({circle_factor()});
  const CharFn mu = circle_component(1.0, 0.0, 1);
  SdInstance inst;
  inst.group = g;
  inst.components = {mu};
  const DualLattice lat = DualLattice::symmetric(g.dual(), 4);
  CHECK_THROWS_AS(sd_residual(inst, lat, 1e-9), InputError);
  inst.components = {mu, mu};
  inst.betas = {Automorphism::inversion(g)};  // wrong count
  CHECK_THROWS_AS(sd_residual(inst, lat, 1e-9), InputError);
  inst.betas.clear();
  // lattice over some other group, not over dual(g)
  const DualLattice wrong = DualLattice::symmetric(LcaGroup({cyclic_factor(3)}), 0);
  CHECK_THROWS_AS(sd_residual(inst, wrong, 1e-9), InputError);
}

TEST_CASE("image membership for coefficient-minus-identity maps") {
  SUBCASE("inverted integer axis accepts exactly the even points") {
    const LcaGroup y({integers_factor()});
    const Automorphism eps = Automorphism::inversion(y);
    Element u(y);
    for (std::int64_t n = -6; n <= 6; ++n) {
      u.set_k(0, n);
      CHECK(in_image_of_eps_minus_id(eps, u) == (n % 2 == 0));
    }
  }
  SUBCASE("identity map accepts only zero") {
    const LcaGroup y({integers_factor()});
    const Automorphism eps = Automorphism::identity(y);
    Element u(y);
    u.set_k(0, 0);
    CHECK(in_image_of_eps_minus_id(eps, u));
    u.set_k(0, 2);
    CHECK_FALSE(in_image_of_eps_minus_id(eps, u));
  }
  SUBCASE("invertible real difference covers the whole line") {
    const LcaGroup y({real_factor()});
    Automorphism eps = Automorphism::identity(y);
    eps.alpha(0, 0) = 0.5;  // eps - I = -0.5, invertible
    Element u(y);
    u.set_x(0, 3.7);
    CHECK(in_image_of_eps_minus_id(eps, u));
  }
  SUBCASE("cyclic doubling map hits the even residues") {
    const LcaGroup y({cyclic_factor(4)});
    const Automorphism eps = Automorphism::inversion(y);  // unit 3, eps - I ~ x2
    Element u(y);
    for (std::int64_t k = 0; k < 4; ++k) {
      u.set_k(0, k);
      CHECK(in_image_of_eps_minus_id(eps, u) == (k % 2 == 0));
    }
  }
}

TEST_CASE("the symmetrized product identity holds on the admissible shifts") {
  const LcaGroup g({circle_factor()});
  const LcaGroup y = g.dual();
  const DualLattice lat = DualLattice::symmetric(y, 8);
  const Automorphism eps = Automorphism::inversion(y);
  SUBCASE("even gaussian passes") {
    const CharFn f = circle_component(0.6, 0.0, 1);
    const ParallelogramReport rep = parallelogram_residual(f, eps, lat, 1e-12);
    CHECK(rep.pass);
    CHECK(rep.n_admissible_u == 9);  // even frequencies within radius 8
    CHECK(rep.max_residual <= 1e-13);
  }
  SUBCASE("solution component with a two-point factor passes") {
    const CharFn f = circle_component(0.6, 0.2, 1);
    CHECK(parallelogram_residual(f, eps, lat, 1e-12).pass);
  }
  SUBCASE("cubic modulus fails") {
    auto lat8 = int_lattice(8);
    std::vector<std::complex<double>> vals(lat8->size());
    for (std::size_t i = 0; i < lat8->size(); ++i) {
      const double n = static_cast<double>(lat8->element_at(i).k(0));
      vals[i] = std::exp(-0.01 * std::abs(n * n * n));
    }
    const CharFn f = CharFn::tabulated(lat8, vals);
    const ParallelogramReport rep = parallelogram_residual(f, eps, lat, 1e-9);
    CHECK_FALSE(rep.pass);
    CHECK(rep.max_residual > 0.01);
  }
}

TEST_CASE("third differences annihilate quadratic-plus-parity tables") {
  auto lat = int_lattice(20);
  const RealGrid psi = RealGrid::tabulate(lat, [](const Element& e) {
    const double n = static_cast<double>(e.k(0));
    const double parity = (e.k(0) % 2 != 0) ? 2.0 : 0.0;
    return 0.9 * n * n + 0.2 * parity;
  });
  const DifferenceReport rep = third_difference_residual(psi, 4, 1e-10);
  CHECK(rep.pass);
  CHECK(rep.max_residual <= 1e-11);
  CHECK(rep.n_tuples > 0);
}

TEST_CASE("third differences expose a quartic") {
  auto lat = int_lattice(20);
  const RealGrid psi = RealGrid::tabulate(lat, [](const Element& e) {
    const double n = static_cast<double>(e.k(0));
    return n * n * n * n;
  });
  const DifferenceReport rep = third_difference_residual(psi, 4, 1e-10);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_residual > 1.0);
}

TEST_CASE("coset decomposition recovers the form and the odd-coset constant") {
  SUBCASE("single integer axis") {
    auto lat = int_lattice(6);
    const RealGrid psi = RealGrid::tabulate(lat, [](const Element& e) {
      const double n = static_cast<double>(e.k(0));
      return 0.7 * n * n + 0.3 * ((e.k(0) % 2 + 2) % 2 != 0 ? 2.0 : 0.0);
    });
    const CosetDecomposition dec = coset_decompose(psi, 1e-9);
    CHECK(dec.pass);
    CHECK(dec.Q(0, 0) == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(dec.odd_constant == doctest::Approx(0.6).epsilon(1e-10));
    CHECK(dec.even_constant == 0.0);
  }
  SUBCASE("real axis plus integer axis with coupling") {
    const LcaGroup y({real_factor(), integers_factor()});
    auto lat =
        std::make_shared<DualLattice>(DualLattice::symmetric(y, 4, 9, 2.0));
    Eigen::Matrix2d q;
    q << 0.5, 0.1, 0.1, 0.8;
    const RealGrid psi = RealGrid::tabulate(lat, [&](const Element& e) {
      const Eigen::Vector2d ell(e.x(0), static_cast<double>(e.k(1)));
      const double parity = (e.k(1) % 2 + 2) % 2 != 0 ? 1.0 : 0.0;
      return ell.dot(q * ell) - 0.5 * parity;
    });
    const CosetDecomposition dec = coset_decompose(psi, 1e-9);
    CHECK(dec.pass);
    CHECK((dec.Q - q).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(dec.odd_constant == doctest::Approx(-0.5).epsilon(1e-10));
  }
  SUBCASE("shape and precondition failures") {
    const LcaGroup z2({integers_factor(), integers_factor()});
    auto lat2 = std::make_shared<DualLattice>(DualLattice::symmetric(z2, 2));
    const RealGrid flat(lat2, std::vector<double>(lat2->size(), 0.0));
    CHECK_THROWS_AS(coset_decompose(flat, 1e-9), InputError);
    auto lat = int_lattice(6);
    const RealGrid quartic = RealGrid::tabulate(lat, [](const Element& e) {
      const double n = static_cast<double>(e.k(0));
      return n * n * n * n;
    });
    CHECK_THROWS_AS(coset_decompose(quartic, 1e-9), MathError);
    const RealGrid offset(lat, std::vector<double>(lat->size(), 1.0));
    CHECK_THROWS_AS(coset_decompose(offset, 1e-9), MathError);  // psi(0) != 0
  }
}

TEST_CASE("the additive split fits separable tables and rejects coupled ones") {
  const LcaGroup y({integers_factor()});
  auto lat = int_lattice(5);
  const Automorphism eps = Automorphism::inversion(y);
  auto quad = [&](double c) {
    return RealGrid::tabulate(lat, [c](const Element& e) {
      const double n = static_cast<double>(e.k(0));
      return c * n * n;
    });
  };
  SUBCASE("equal coefficients separate exactly") {
    const PexiderFit fit = pexider_fit(quad(0.4), quad(0.4), eps, 1e-9);
    CHECK(fit.pass);
    CHECK(fit.max_residual < 1e-9);
    for (std::size_t i = 0; i < lat->size(); ++i) {
      const double n = static_cast<double>(lat->element_at(i).k(0));
      CHECK(fit.P[i] == doctest::Approx(0.8 * n * n).epsilon(1e-8));
    }
  }
  SUBCASE("unequal coefficients leave a cross term") {
    const PexiderFit fit = pexider_fit(quad(0.4), quad(0.6), eps, 1e-9);
    CHECK_FALSE(fit.pass);
    CHECK(fit.max_residual > 0.1);
  }
}

TEST_CASE("quadratic extraction polarizes the form and rejects non-quadratics") {
  SUBCASE("one axis") {
    auto lat = int_lattice(6);
    const RealGrid phi = RealGrid::tabulate(lat, [](const Element& e) {
      const double n = static_cast<double>(e.k(0));
      return 1.3 * n * n;
    });
    const Eigen::MatrixXd q = extract_quadratic_form(phi);
    REQUIRE(q.rows() == 1);
    CHECK(q(0, 0) == doctest::Approx(1.3).epsilon(1e-12));
  }
  SUBCASE("two axes with fractional real step") {
    const LcaGroup y({real_factor(), integers_factor()});
    auto lat =
        std::make_shared<DualLattice>(DualLattice::symmetric(y, 4, 9, 2.0));
    Eigen::Matrix2d q;
    q << 0.4, 0.1, 0.1, 0.9;
    const RealGrid phi = RealGrid::tabulate(lat, [&](const Element& e) {
      const Eigen::Vector2d ell(e.x(0), static_cast<double>(e.k(1)));
      return ell.dot(q * ell);
    });
    const Eigen::MatrixXd got = extract_quadratic_form(phi);
    CHECK((got - q).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("quartic fails the parallelogram precheck") {
    auto lat = int_lattice(6);
    const RealGrid phi = RealGrid::tabulate(lat, [](const Element& e) {
      const double n = static_cast<double>(e.k(0));
      return n * n * n * n;
    });
    CHECK_THROWS_AS(extract_quadratic_form(phi), MathError);
  }
}
