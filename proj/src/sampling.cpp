#include "darmois/sampling.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "darmois/errors.hpp"
#include "darmois/log.hpp"

namespace darmois {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// group factor index of X's circle factor carrying the signed component
std::size_t circle_factor_index(const LcaGroup& g) {
  for (std::size_t i = 0; i < g.num_factors(); ++i)
    if (g.factor(i).kind == FactorKind::Circle) return i;
  throw InputError("sampler: no circle factor");
}

// map each group factor to its row in Q (dual lattice order: Real block in
// factor order, then circle-dual Integers block in factor order)
std::vector<Eigen::Index> cover_rows(const LcaGroup& g) {
  std::vector<Eigen::Index> rows(g.num_factors());
  Eigen::Index r = 0, c = static_cast<Eigen::Index>(g.real_dims());
  for (std::size_t i = 0; i < g.num_factors(); ++i) {
    switch (g.factor(i).kind) {
      case FactorKind::Real: rows[i] = r++; break;
      case FactorKind::Circle: rows[i] = c++; break;
      default: throw InputError("sampler: group must have Real and Circle factors only");
    }
  }
  return rows;
}

// unnormalized wrapped-normal density sum_k exp(-(t + 2 pi k)^2 / (2 s2))
double wrapped_density(double t, double s2) {
  const double s = std::sqrt(s2);
  const int cutoff = 3 + static_cast<int>(std::ceil((std::abs(t) + 12.0 * s) / kTwoPi));
  double acc = 0.0;
  for (int k = -cutoff; k <= cutoff; ++k) {
    const double z = t + kTwoPi * k;
    acc += std::exp(-0.5 * z * z / s2);
  }
  return acc;
}

struct GaussianDraw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd sqrt_cov;  // symmetric square root of 2Q

  Eigen::VectorXd draw(Rng& rng) const {
    Eigen::VectorXd g(mean.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
    return mean + sqrt_cov * g;
  }
};

GaussianDraw make_gaussian(const CharFn& target, const std::vector<Eigen::Index>& rows) {
  const LcaGroup& g = target.domain();
  const Eigen::Index dim = static_cast<Eigen::Index>(g.num_factors());
  GaussianDraw gd;
  gd.mean.resize(dim);
  for (std::size_t i = 0; i < g.num_factors(); ++i)
    gd.mean[static_cast<Eigen::Index>(i)] = target.shift().x(i);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  const Eigen::MatrixXd& q = target.Q();
  for (std::size_t i = 0; i < g.num_factors(); ++i)
    for (std::size_t j = 0; j < g.num_factors(); ++j)
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          2.0 * q(rows[i], rows[j]);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw MathError("sampler: covariance eigendecomposition failed");
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  gd.sqrt_cov = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return gd;
}

Element to_element(const LcaGroup& g, const Eigen::VectorXd& z) {
  Element e(g);
  for (std::size_t i = 0; i < g.num_factors(); ++i)
    e.set_x(i, z[static_cast<Eigen::Index>(i)]);  // circle coords wrap
  return e;
}

// conditional law of coordinate k given the others, for covariance cov
struct CircleConditional {
  Eigen::Index k = 0;
  double var = 0.0;            // conditional variance
  Eigen::VectorXd coef;        // regression coefficients on the other coords
  Eigen::VectorXd other_mean;
  double k_mean = 0.0;

  double mean_given(const Eigen::VectorXd& z) const {
    double m = k_mean;
    Eigen::Index j = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (i == k) continue;
      m += coef[j] * (z[i] - other_mean[j]);
      ++j;
    }
    return m;
  }
};

CircleConditional make_conditional(const Eigen::VectorXd& mean,
                                   const Eigen::MatrixXd& cov, Eigen::Index k) {
  CircleConditional c;
  c.k = k;
  c.k_mean = mean[k];
  const Eigen::Index d = cov.rows();
  if (d == 1) {
    c.var = cov(0, 0);
    c.coef.resize(0);
    c.other_mean.resize(0);
  } else {
    Eigen::MatrixXd rr(d - 1, d - 1);
    Eigen::VectorXd rk(d - 1);
    c.other_mean.resize(d - 1);
    Eigen::Index a = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == k) continue;
      rk[a] = cov(i, k);
      c.other_mean[a] = mean[i];
      Eigen::Index b = 0;
      for (Eigen::Index j = 0; j < d; ++j) {
        if (j == k) continue;
        rr(a, b++) = cov(i, j);
      }
      ++a;
    }
    // pseudo-inverse solve tolerates singular real marginals
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(rr);
    c.coef = cod.solve(rk);
    c.var = cov(k, k) - rk.dot(c.coef);
  }
  if (c.var < 1e-12)
    throw MathError("sampler: circle coordinate is conditionally degenerate");
  return c;
}

}  // namespace

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = kTwoPi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

SampleBatch sample(const Sampler& sampler, std::size_t count) {
  const CharFn& target = sampler.target;
  if (!target.is_closed())
    throw InputError("sampler: target must be a closed-form characteristic function");
  const LcaGroup& g = target.domain();
  const std::vector<Eigen::Index> rows = cover_rows(g);  // rejects other factor kinds

  const PdReport pd = validate_positive_definite(target);
  if (pd.violated)
    throw MathError("sampler: target is not a valid characteristic function "
                    "(min density " + std::to_string(pd.min_density) + ")");

  const bool has_pi = target.pi().has_value();
  if (has_pi && sampler.method != SampleMethod::RejectionMixture)
    throw InputError("sampler: signed two-point components need the "
                     "rejection-mixture method");

  const GaussianDraw gauss = make_gaussian(target, rows);
  Rng rng(sampler.seed);

  SampleBatch batch;
  batch.samples.reserve(count);

  if (!has_pi) {
    for (std::size_t i = 0; i < count; ++i)
      batch.samples.push_back(to_element(g, gauss.draw(rng)));
    batch.n_proposals = count;
    batch.acceptance_rate = 1.0;
    return batch;
  }

  const std::size_t ci = circle_factor_index(g);
  const Eigen::Index ck = static_cast<Eigen::Index>(ci);
  const double c = target.pi_coeff();
  const double m0 = 0.5 * (1.0 + std::exp(2.0 * c));
  const double mpi = 0.5 * (1.0 - std::exp(2.0 * c));

  if (mpi >= 0.0) {
    // both masses nonnegative: draw the shift directly
    for (std::size_t i = 0; i < count; ++i) {
      Eigen::VectorXd z = gauss.draw(rng);
      if (rng.uniform() < mpi) z[ck] += std::numbers::pi;
      batch.samples.push_back(to_element(g, z));
    }
    batch.n_proposals = count;
    batch.acceptance_rate = 1.0;
    return batch;
  }

  // negative mass at pi: the target density is m0 g(x, th) + mpi g(x, th - pi)
  // <= m0 g(x, th), so propose from the Gaussian and accept with probability
  // 1 + (mpi/m0) w(th - pi - m(x)) / w(th - m(x)) using the conditional
  // wrapped-normal density of the circle coordinate given the rest.
  Eigen::MatrixXd cov = gauss.sqrt_cov * gauss.sqrt_cov;
  const CircleConditional cond = make_conditional(gauss.mean, cov, ck);
  const double ratio = mpi / m0;  // negative
  std::uint64_t proposals = 0;
  const std::uint64_t max_proposals = 1000 * std::uint64_t(count) + 1000000;
  while (batch.samples.size() < count) {
    if (++proposals > max_proposals)
      throw MathError("sampler: rejection loop exceeded its proposal budget");
    Eigen::VectorXd z = gauss.draw(rng);
    const double t = z[ck] - cond.mean_given(z);
    const double w0 = wrapped_density(t, cond.var);
    const double wpi = wrapped_density(t - std::numbers::pi, cond.var);
    // clamp guards the validator's -1e-9 density slack
    const double accept = std::clamp(1.0 + ratio * wpi / w0, 0.0, 1.0);
    if (rng.uniform() < accept) batch.samples.push_back(to_element(g, z));
  }
  batch.n_proposals = proposals;
  batch.acceptance_rate = double(count) / double(proposals);
  return batch;
}

IndependenceReport independence_test(const Sampler& mu1, const Sampler& mu2,
                                     const Automorphism& delta, std::size_t n_samples,
                                     std::vector<Element> frequencies,
                                     double threshold) {
  if (n_samples < 1000)
    throw InputError("independence test: need at least 1000 samples");
  const LcaGroup& g = mu1.target.domain();
  if (!(mu2.target.domain() == g))
    throw InputError("independence test: samplers live on different groups");
  delta.validate();
  if (!(delta.group == g))
    throw InputError("independence test: delta group mismatch");

  const LcaGroup y = g.dual();
  if (frequencies.empty()) {
    // per-axis defaults: {-2..2} on Real axes, {-4..4} on circle-dual axes
    std::vector<std::vector<double>> axes;
    for (const auto& f : y.factors()) {
      std::vector<double> vals;
      const int r = f.kind == FactorKind::Real ? 2 : 4;
      for (int v = -r; v <= r; ++v) vals.push_back(v);
      axes.push_back(std::move(vals));
    }
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size();
    if (total > 256)
      throw InputError("independence test: default frequency grid too large; "
                       "pass an explicit list");
    frequencies.assign(total, Element(y));
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
      Element e(y);
      for (std::size_t i = 0; i < axes.size(); ++i) {
        const double v = axes[i][idx[i]];
        if (y.factor(i).kind == FactorKind::Real)
          e.set_x(i, v);
        else
          e.set_k(i, static_cast<std::int64_t>(v));
      }
      frequencies[n] = e;
      for (std::size_t i = axes.size(); i-- > 0;) {
        if (++idx[i] < axes[i].size()) break;
        idx[i] = 0;
      }
    }
  }
  for (const auto& f : frequencies)
    if (!(f.group() == y))
      throw InputError("independence test: frequency not in the dual group");
  if (frequencies.size() > 256)
    throw InputError("independence test: more than 256 frequencies");

  Sampler s1 = mu1;
  Sampler s2 = mu2;
  if (s1.seed == s2.seed) {
    s2.seed = splitmix64(s2.seed);
    log_info("independence test: derived a fresh seed for the second stream");
  }
  const SampleBatch b1 = sample(s1, n_samples);
  const SampleBatch b2 = sample(s2, n_samples);

  const std::size_t nf = frequencies.size();
  std::vector<std::complex<double>> m1(nf, 0.0), m2(nf, 0.0), joint(nf * nf, 0.0);
  std::vector<std::complex<double>> c1(nf), c2(nf);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Element l1 = b1.samples[i] + b2.samples[i];
    const Element l2 = b1.samples[i] + delta.apply(b2.samples[i]);
    for (std::size_t a = 0; a < nf; ++a) {
      c1[a] = pair(l1, frequencies[a]);
      c2[a] = pair(l2, frequencies[a]);
      m1[a] += c1[a];
      m2[a] += c2[a];
    }
    for (std::size_t a = 0; a < nf; ++a)
      for (std::size_t b = 0; b < nf; ++b) joint[a * nf + b] += c1[a] * c2[b];
  }

  IndependenceReport rep;
  rep.n_samples = n_samples;
  rep.threshold = threshold > 0 ? threshold : 5.0 / std::sqrt(double(n_samples));
  const double inv = 1.0 / double(n_samples);
  for (std::size_t a = 0; a < nf; ++a)
    for (std::size_t b = 0; b < nf; ++b) {
      const double d = std::abs(joint[a * nf + b] * inv - m1[a] * inv * m2[b] * inv);
      if (d > rep.statistic) {
        rep.statistic = d;
        rep.worst_u = frequencies[a].lattice_coords();
        rep.worst_v = frequencies[b].lattice_coords();
      }
    }
  rep.consistent = rep.statistic <= rep.threshold;
  return rep;
}

}  // namespace darmois
