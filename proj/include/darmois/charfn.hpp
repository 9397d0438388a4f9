#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "darmois/grid.hpp"
#include "darmois/group.hpp"

namespace darmois {

// Signed two-point component supported on {0, pi} of the circle factor.
// Component 1 multiplies the transform by exp{+kappa(1-(-1)^n)}, component 2
// by exp{-kappa(1-(-1)^n)}; masses are (1 + e^{2k})/2 and (1 - e^{2k})/2 with
// k = +-kappa, so one mass is negative whenever kappa != 0.
struct SignedPi {
  double kappa = 0.0;
  int which = 1;  // 1 or 2
};

struct PdReport {
  double min_density = 0.0;
  int grid_size = 0;
  bool violated = false;
  // diagnostics; the verdict is determined by min_density alone
  double max_abs = 0.0;
  double unit_defect = 0.0;        // |f(0) - 1|
  double hermitian_defect = 0.0;   // max |f(-y) - conj f(y)|
  double increment_margin = 0.0;   // worst violation of |f(u)-f(v)|^2 <= 2(1 - Re f(u-v))
};

struct PdOptions {
  int dual_cutoff = 64;      // circle-factor series truncated to |n| <= dual_cutoff
  int density_points = 256;  // reconstruction points per compact factor
  int random_pairs = 500;
  std::uint64_t seed = 424242;
};

// Characteristic function on dual(X) of a (possibly signed) measure on X.
// Closed form: character of the shift times a Gaussian exponential in the
// dual lattice coordinates times an optional signed two-point factor.
class CharFn {
 public:
  static CharFn closed(const LcaGroup& x_group, const Element& shift,
                       const Eigen::MatrixXd& Q, std::optional<SignedPi> pi);
  static CharFn tabulated(std::shared_ptr<const DualLattice> lattice,
                          std::vector<std::complex<double>> values);

  const LcaGroup& domain() const { return x_group_; }  // X
  LcaGroup dual_domain() const { return x_group_.dual(); }

  bool is_closed() const { return closed_; }
  std::complex<double> eval(const Element& y) const;

  // Exactly the transform of the unit point mass: zero shift, zero Q, no
  // signed factor (parameter-level test, no tolerance).
  bool is_identity() const;

  // closed-form accessors (InputError on tabulated functions)
  const Element& shift() const;
  const Eigen::MatrixXd& Q() const;
  const std::optional<SignedPi>& pi() const;
  double pi_coeff() const;        // +kappa for component 1, -kappa for 2, 0 if absent
  std::size_t pi_axis() const;    // position of the parity coordinate among
                                  // the dual lattice coordinates
  // tabulated accessors
  std::shared_ptr<const DualLattice> lattice_ptr() const;
  const std::vector<std::complex<double>>& values() const;

 private:
  bool closed_ = true;
  LcaGroup x_group_;
  // closed
  Element shift_;
  Eigen::MatrixXd q_;
  std::optional<SignedPi> pi_;
  std::size_t pi_axis_ = 0;
  // tabulated
  std::shared_ptr<const DualLattice> lat_;
  std::vector<std::complex<double>> vals_;
};

// Gaussian with shift x0 and PSD quadratic form Q over the dual lattice
// coordinates (Real block of dual(X) first, then Integers block).
CharFn gaussian_charfn(const LcaGroup& x_group, const Element& shift,
                       const Eigen::MatrixXd& Q);

// Signed two-point component on the circle factor of x_group.
CharFn signed_pi_charfn(const LcaGroup& x_group, double kappa, int which);

CharFn convolve(const CharFn& f, const CharFn& g);
CharFn reflect(const CharFn& f);      // transform of the reflected measure: y -> f(-y)
CharFn symmetrize(const CharFn& f);   // f * reflect(f), i.e. |f|^2

// Necessary-condition validator: reconstructs densities on compact factors
// (Fejer-weighted Fourier series on circles — a nonnegative kernel, so
// genuine distributions are never flagged — exact inverse DFT on cyclic factors,
// quadrature on real axes when no compact factor exists) and spot-checks the
// increment inequality on random dual pairs. verdict: min_density < -1e-9.
PdReport validate_positive_definite(const CharFn& f, const PdOptions& opts = {});

}  // namespace darmois
