#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "darmois/automorphism.hpp"
#include "darmois/charfn.hpp"
#include "darmois/sd.hpp"
#include "darmois/subgroup.hpp"

namespace darmois {

// Parameters of a distribution pair on X = R^a x T:
//   mu_j = shift(x_j) * Gaussian(Q_j) * signed two-point component (+kappa
//   for j = 1, -kappa for j = 2).
// The pair is meant to satisfy the functional equation with coefficients
// (I, I; I, delta).
struct PairParams {
  int a = 0;
  Eigen::MatrixXd Q1, Q2;  // (a+1) x (a+1) over (real coords, circle-dual coord)
  double kappa = 0.0;
  Element x1, x2;          // shifts in X
  Automorphism delta;      // automorphism of X

  LcaGroup group() const;  // R^a x T, reals first
  void validate() const;
};

LcaGroup pair_group(int a);

struct PdRejection : MathError {
  PdRejection(int component_, PdReport report_)
      : MathError("component " + std::to_string(component_) +
                  " is not a valid characteristic function (min density " +
                  std::to_string(report_.min_density) + ")"),
        component(component_),
        report(report_) {}
  int component;
  PdReport report;
};

struct ConstructedPair {
  CharFn mu1, mu2;
  PdReport pd1, pd2;
  SdReport verification;
};

// Builds the pair, validates both components as characteristic functions
// (PdRejection on failure), and verifies the functional equation on the grid
// (MathError on failure).
ConstructedPair construct_pair(const PairParams& params, double tolerance = 1e-9,
                               const GridSpec& spec = {});

// Structural reduction data for the coefficient automorphism delta on X:
// the adjoint eps on Y = dual(X), the kernel L = Ker(I - eps) restricted to
// the real subspace, the circle action case, and the image subgroup
// H = (I - eps)Y (equal to Y^(2) when the circle is inverted and L = {0}).
struct ReductionTrace {
  int circle_case = 0;  // +1: identity on the circle, -1: inversion, 0: no circle
  bool L_trivial = true;
  int L_dim = 0;
  Eigen::MatrixXd L_basis;  // columns span L (real coordinates)
  std::string L_desc;
  std::string H_desc;
  std::optional<Subgroup> H;  // set when H is representable (Y^(2) case)
  std::vector<std::string> steps;
};

ReductionTrace reduce(const LcaGroup& x_group, const Automorphism& delta);

struct CharacterizationReport {
  bool accepted = false;
  std::string reason;  // empty when accepted
  PdReport pd1, pd2;
  SdReport equation;
};

// Checks that (mu1, mu2) is a pair of the characterized family for delta:
// valid characteristic functions, opposite signed components (zero when the
// circle is fixed), matching circle-coordinate quadratic coefficients under
// inversion, and the functional equation within tolerance.
CharacterizationReport verify_characterization(const CharFn& mu1, const CharFn& mu2,
                                               const Automorphism& delta,
                                               double tolerance = 1e-9,
                                               const GridSpec& spec = {});

}  // namespace darmois
