#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

#include "darmois/charfn.hpp"
#include "darmois/errors.hpp"
#include "darmois/sampling.hpp"
#include "doctest.h"

using namespace darmois;

namespace {

Eigen::MatrixXd scalar(double v) {
  Eigen::MatrixXd q(1, 1);
  q << v;
  return q;
}

LcaGroup circle_group() { return LcaGroup({circle_factor()}); }

CharFn circle_target(double sigma, double kappa, int which, double theta0 = 0.0) {
  const LcaGroup g = circle_group();
  Element shift(g);
  shift.set_x(0, theta0);
  CharFn gauss = gaussian_charfn(g, shift, scalar(sigma));
  if (kappa == 0.0) return gauss;
  return convolve(gauss, signed_pi_charfn(g, kappa, which));
}

// empirical transform at frequency n of circle samples
std::complex<double> empirical(const std::vector<Element>& xs, std::int64_t n) {
  std::complex<double> acc = 0.0;
  for (const Element& x : xs)
    acc += std::complex<double>(std::cos(n * x.x(0)), std::sin(n * x.x(0)));
  return acc / static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("the random stream is deterministic and well scaled") {
  Rng a(7), b(7);
  for (int i = 0; i < 50; ++i) CHECK(a.next_u64() == b.next_u64());
  for (int i = 0; i < 50; ++i) {
    const double ua = a.uniform(), ub = b.uniform();
    CHECK(ua == ub);
    CHECK(ua > 0.0);
    CHECK(ua < 1.0);
  }
  for (int i = 0; i < 51; ++i) CHECK(a.normal() == b.normal());
  CHECK(splitmix64(424242) != 424242);
}

TEST_CASE("sampling is reproducible for a fixed seed") {
  const Sampler s{circle_target(0.5, 0.0, 1, 1.0), 99, SampleMethod::WrappedGaussian};
  const SampleBatch a = sample(s, 50);
  const SampleBatch b = sample(s, 50);
  REQUIRE(a.samples.size() == 50);
  for (std::size_t i = 0; i < 50; ++i)
    CHECK(a.samples[i].x(0) == b.samples[i].x(0));  // bit-identical
  const SampleBatch c = sample({s.target, 100, s.method}, 50);
  bool same = true;
  for (std::size_t i = 0; i < 50; ++i) same = same && a.samples[i].x(0) == c.samples[i].x(0);
  CHECK_FALSE(same);
}

TEST_CASE("line gaussian samples match their first two moments") {
  const LcaGroup g({real_factor()});
  Element shift(g);
  shift.set_x(0, 2.5);
  const Sampler s{gaussian_charfn(g, shift, scalar(0.4)), 424242,
                  SampleMethod::ExactGaussian};
  const std::size_t n = 20000;
  const SampleBatch batch = sample(s, n);
  CHECK(batch.acceptance_rate == 1.0);
  double mean = 0.0, var = 0.0;
  for (const Element& x : batch.samples) mean += x.x(0);
  mean /= n;
  for (const Element& x : batch.samples) var += (x.x(0) - mean) * (x.x(0) - mean);
  var /= n;
  // transform e^{-q s^2} has variance 2q = 0.8
  CHECK(mean == doctest::Approx(2.5).epsilon(0.02));
  CHECK(var == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("wrapped gaussian samples reproduce the transform on low frequencies") {
  const CharFn target = circle_target(0.5, 0.0, 1, 0.9);
  const Sampler s{target, 424242, SampleMethod::WrappedGaussian};
  const std::size_t n = 20000;
  const SampleBatch batch = sample(s, n);
  const double bound = 5.0 / std::sqrt(static_cast<double>(n));
  const LcaGroup y = circle_group().dual();
  for (std::int64_t k = -4; k <= 4; ++k) {
    Element fr(y);
    fr.set_k(0, k);
    CHECK(std::abs(empirical(batch.samples, k) - target.eval(fr)) < bound);
  }
  for (const Element& x : batch.samples) {
    CHECK(x.x(0) >= 0.0);
    CHECK(x.x(0) < 2.0 * std::numbers::pi);
  }
}

TEST_CASE("a point-mass target yields constant samples") {
  const CharFn target = circle_target(0.0, 0.0, 1, 2.0);
  const SampleBatch batch =
      sample({target, 424242, SampleMethod::WrappedGaussian}, 200);
  for (const Element& x : batch.samples)
    CHECK(x.x(0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mixture thinning reproduces signed-component targets") {
  SUBCASE("nonnegative two-point side is drawn directly") {
    const CharFn target = circle_target(0.5, 0.1, 2);
    const Sampler s{target, 424242, SampleMethod::RejectionMixture};
    const std::size_t n = 30000;
    const SampleBatch batch = sample(s, n);
    CHECK(batch.acceptance_rate == 1.0);
    const double bound = 5.0 / std::sqrt(static_cast<double>(n));
    const LcaGroup y = circle_group().dual();
    for (std::int64_t k = -4; k <= 4; ++k) {
      Element fr(y);
      fr.set_k(0, k);
      CHECK(std::abs(empirical(batch.samples, k) - target.eval(fr)) < bound);
    }
  }
  SUBCASE("signed side thins proposals and keeps the transform") {
    const CharFn target = circle_target(1.0, 0.15, 1);
    const Sampler s{target, 424242, SampleMethod::RejectionMixture};
    const std::size_t n = 30000;
    const SampleBatch batch = sample(s, n);
    // acceptance approaches 1/m0 with m0 = (1 + e^{0.3})/2, and never drops
    // below the 1/(2 m0) floor
    const double m0 = 0.5 * (1.0 + std::exp(0.3));
    CHECK(batch.acceptance_rate > 0.5 / m0);
    CHECK(batch.n_proposals > n);
    const double bound = 5.0 / std::sqrt(static_cast<double>(n));
    const LcaGroup y = circle_group().dual();
    for (std::int64_t k = -4; k <= 4; ++k) {
      Element fr(y);
      fr.set_k(0, k);
      CHECK(std::abs(empirical(batch.samples, k) - target.eval(fr)) < bound);
    }
  }
}

TEST_CASE("samplers reject invalid targets and method mismatches") {
  // inadmissible signed mass: the density of the target dips negative
  CHECK_THROWS_AS(
      sample({circle_target(1.0, 0.2, 1), 424242, SampleMethod::RejectionMixture}, 10),
      MathError);
  // signed components require the thinning method
  CHECK_THROWS_AS(
      sample({circle_target(1.0, 0.15, 1), 424242, SampleMethod::WrappedGaussian}, 10),
      InputError);
  // groups outside R^a x T^m are not samplable
  const LcaGroup zg({cyclic_factor(4)});
  CHECK_THROWS_AS(
      sample({gaussian_charfn(zg, Element::zero(zg), Eigen::MatrixXd::Zero(0, 0)),
              424242, SampleMethod::ExactGaussian},
             10),
      InputError);
}

TEST_CASE("the independence statistic accepts solution pairs") {
  const CharFn mu1 = circle_target(1.0, 0.0, 1);
  const CharFn mu2 = circle_target(1.0, 0.0, 2);
  const Automorphism delta = Automorphism::inversion(circle_group());
  const IndependenceReport rep =
      independence_test({mu1, 424242, SampleMethod::WrappedGaussian},
                        {mu2, 424242, SampleMethod::WrappedGaussian}, delta, 50000);
  CHECK(rep.consistent);
  CHECK(rep.statistic <= rep.threshold);
  CHECK(rep.threshold == doctest::Approx(5.0 / std::sqrt(50000.0)));
  CHECK(rep.n_samples == 50000);
}

TEST_CASE("the independence statistic exposes mismatched pairs") {
  const CharFn mu1 = circle_target(0.5, 0.0, 1);
  const CharFn mu2 = circle_target(0.7, 0.0, 2);
  const Automorphism delta = Automorphism::inversion(circle_group());
  const IndependenceReport rep =
      independence_test({mu1, 424242, SampleMethod::WrappedGaussian},
                        {mu2, 424242, SampleMethod::WrappedGaussian}, delta, 50000);
  CHECK_FALSE(rep.consistent);
  CHECK(rep.statistic > 0.02);
  REQUIRE(rep.worst_u.size() == 1);
  REQUIRE(rep.worst_v.size() == 1);
  // the population gap peaks at the (1, 1) frequency pair up to reflection
  CHECK(std::abs(rep.worst_u[0]) == doctest::Approx(1.0));
  CHECK(std::abs(rep.worst_v[0]) == doctest::Approx(1.0));
}

TEST_CASE("the independence test validates its inputs") {
  const CharFn mu = circle_target(1.0, 0.0, 1);
  const Automorphism delta = Automorphism::inversion(circle_group());
  CHECK_THROWS_AS(independence_test({mu, 1, SampleMethod::WrappedGaussian},
                                    {mu, 2, SampleMethod::WrappedGaussian}, delta, 10),
                  InputError);
  const LcaGroup r({real_factor()});
  const CharFn line = gaussian_charfn(r, Element::zero(r), scalar(0.5));
  CHECK_THROWS_AS(
      independence_test({mu, 1, SampleMethod::WrappedGaussian},
                        {line, 2, SampleMethod::ExactGaussian}, delta, 2000),
      InputError);
}
