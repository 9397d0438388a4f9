#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "darmois/automorphism.hpp"
#include "darmois/charfn.hpp"
#include "darmois/group.hpp"

namespace darmois {

// Deterministic random stream. Uniforms are built from the top 53 bits of
// mt19937_64 and normals by Box-Muller, so identical seeds give bit-identical
// samples on every platform (std::normal_distribution does not promise that).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }
  double uniform() {  // strictly inside (0, 1)
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  }
  double normal();

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);  // seed derivation

enum class SampleMethod { ExactGaussian, WrappedGaussian, RejectionMixture };

// Draws from a closed-form characteristic function on a group with Real and
// Circle factors only. exact-gaussian and wrapped-gaussian both sample the
// covering Gaussian (covariance 2Q) and wrap circle coordinates; they require
// a pure Gaussian target. rejection-mixture additionally handles the signed
// two-point component by proposing from the Gaussian and thinning, exact up
// to the wrapped-density tail cutoff (relative error < 1e-60).
struct Sampler {
  CharFn target;
  std::uint64_t seed = 424242;
  SampleMethod method = SampleMethod::ExactGaussian;
};

struct SampleBatch {
  std::vector<Element> samples;
  double acceptance_rate = 1.0;
  std::uint64_t n_proposals = 0;
};

SampleBatch sample(const Sampler& sampler, std::size_t count);

struct IndependenceReport {
  double statistic = 0.0;
  std::size_t n_samples = 0;
  double threshold = 0.0;
  bool consistent = false;
  std::vector<double> worst_u, worst_v;  // lattice coordinates of the arg max
  std::string shard_desc = "single-stream";
};

// Draws xi_1 from mu1 and xi_2 from mu2 (reseeding mu2's stream when both
// seeds coincide), forms L1 = xi_1 + xi_2 and L2 = xi_1 + delta xi_2, and
// compares the empirical transform of the joint law against the product of
// the marginal transforms:
//   statistic = max over frequency pairs (u, v) of
//               |E[(L1,u)(L2,v)] - E[(L1,u)] E[(L2,v)]|.
// An empty frequency list defaults to per-axis ranges {-2..2} on Real and
// {-4..4} on circle-dual axes. threshold <= 0 selects 5/sqrt(n_samples).
IndependenceReport independence_test(const Sampler& mu1, const Sampler& mu2,
                                     const Automorphism& delta, std::size_t n_samples,
                                     std::vector<Element> frequencies = {},
                                     double threshold = 0.0);

}  // namespace darmois
