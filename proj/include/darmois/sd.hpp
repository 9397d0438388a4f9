#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "darmois/automorphism.hpp"
#include "darmois/charfn.hpp"
#include "darmois/grid.hpp"
#include "darmois/group.hpp"

namespace darmois {

// One instance of the functional equation
//   prod_j f_j(adj(alpha_j) u + adj(beta_j) v) =
//   prod_j f_j(adj(alpha_j) u) * prod_j f_j(adj(beta_j) v)
// over pairs (u, v) in dual(X)^2. alphas/betas act on X, their adjoints on
// the dual. Empty alphas/betas default to identity coefficients.
struct SdInstance {
  LcaGroup group;  // X
  std::vector<CharFn> components;
  std::vector<Automorphism> alphas;
  std::vector<Automorphism> betas;
};

struct GridSpec {
  std::int64_t int_radius = 32;
  std::int64_t real_points = 33;
  double real_radius = 8.0;
};

struct SdReport {
  double max_residual = 0.0;
  double mean_residual = 0.0;
  std::size_t n_points = 0;   // lattice points per argument
  std::size_t n_pairs = 0;    // (u, v) pairs evaluated
  std::size_t n_skipped = 0;  // pairs whose evaluation left a tabulated domain
  std::string grid_desc;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<double> argmax_u, argmax_v;  // lattice coordinates of the worst pair
};

DualLattice instance_lattice(const SdInstance& inst, const GridSpec& spec);

// row_max, when given, receives max-over-v residual per lattice point u
// (quiet NaN for points with no evaluable pair).
SdReport sd_residual(const SdInstance& inst, const DualLattice& lattice,
                     double tolerance, int threads = 1,
                     std::vector<double>* row_max = nullptr);
SdReport sd_residual(const SdInstance& inst, const GridSpec& spec, double tolerance,
                     int threads = 1);

// residual of one (u, v) pair
double sd_residual_at(const SdInstance& inst, const Element& u, const Element& v);

// Membership of u in the image subgroup (eps - I) dual(X), for an
// automorphism eps of dual(X).
bool in_image_of_eps_minus_id(const Automorphism& eps, const Element& u,
                              double tol = 1e-9);

// Residual of the restricted multiplicative parallelogram identity
//   f(u+v) f(u-v) = f(u)^2 f(v) f(-v)   for u in (eps - I) dual(X)
// over lattice pairs. Pairs that leave a tabulated domain are skipped and
// counted.
struct ParallelogramReport {
  double max_residual = 0.0;
  double mean_residual = 0.0;
  std::size_t n_admissible_u = 0;
  std::size_t n_pairs = 0;
  std::size_t n_skipped = 0;
  double tolerance = 0.0;
  bool pass = false;
};

ParallelogramReport parallelogram_residual(const CharFn& f, const Automorphism& eps,
                                           const DualLattice& lattice, double tolerance);

// max |Delta_{2k} Delta_h^2 psi| over the lattice for 1 <= |h|, |k| <=
// shift_bound (0 picks lattice_radius / 4). Shifts run along every
// non-cyclic axis; coverage reports the fraction of requested shift pairs
// that fit inside the grid.
struct DifferenceReport {
  double max_residual = 0.0;
  std::size_t n_tuples = 0;
  double coverage = 1.0;
  double tolerance = 0.0;
  bool pass = false;
};

DifferenceReport third_difference_residual(const RealGrid& psi,
                                           std::int64_t shift_bound, double tolerance);

// Decomposition of an even function psi with psi(0) = 0 on a lattice with one
// Integers axis: psi = <Q l(y), l(y)> + c on the cosets of the even
// subgroup, with c = 0 on the even coset and c = odd_constant on the odd one.
struct CosetDecomposition {
  Eigen::MatrixXd Q;
  double even_constant = 0.0;  // pinned to zero by construction
  double odd_constant = 0.0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

CosetDecomposition coset_decompose(const RealGrid& psi, double tolerance);

// Least-squares tables P, Q with psi1(u + v) + psi2(u + eps v) = P(u) + Q(v)
// over all lattice pairs whose evaluation points stay on the lattice. The
// one-dimensional gauge freedom is fixed by P(0) = psi1(0) + psi2(0).
struct PexiderFit {
  std::vector<double> P, Q;  // indexed like the lattice
  double max_residual = 0.0;
  double mean_residual = 0.0;
  std::size_t n_equations = 0;
  double tolerance = 0.0;
  bool pass = false;
};

PexiderFit pexider_fit(const RealGrid& psi1, const RealGrid& psi2,
                       const Automorphism& eps, double tolerance,
                       std::size_t max_equations = 10000,
                       std::uint64_t seed = 424242);

// Q with phi(y) = <Q l(y), l(y)> on the lattice; requires phi to satisfy the
// parallelogram identity phi(u+v) + phi(u-v) = 2 phi(u) + 2 phi(v) within
// quad_tol on lattice pairs.
Eigen::MatrixXd extract_quadratic_form(const RealGrid& phi, double quad_tol = 1e-9);

}  // namespace darmois
