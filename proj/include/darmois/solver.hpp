#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "darmois/automorphism.hpp"
#include "darmois/group.hpp"

namespace darmois {

enum class SearchMode { Grid, Opt };

// Brute-force search on a finite group X (Cyclic factors only, order <= 64):
// find pairs of probability vectors (p1, p2) with non-vanishing transforms
// satisfying
//   f1(u+v) f2(u + eps v) = f1(u) f2(u) f1(v) f2(eps v)
// for all (u, v) in dual(X)^2, where eps is the adjoint of delta.
struct FiniteInstance {
  LcaGroup group;
  Automorphism delta;
  double tolerance = 1e-6;
  SearchMode mode = SearchMode::Grid;
  double grid_step = 0.05;      // Grid: simplex mesh of width grid_step
  int restarts = 200;           // Opt: number of random starts
  int max_iters = 2000;         // Opt: iteration cap per start
  std::uint64_t seed = 424242;  // Opt: restart stream
  double nonvanish_eps = 1e-6;  // admissibility floor for min |f_j|
  double dedup_eps = 1e-6;      // translation-orbit deduplication tolerance

  void validate() const;  // throws InputError
};

enum class SolutionClass { Degenerate, CharacterPair, Other };

std::string to_string(SolutionClass c);

struct SolutionRecord {
  std::vector<double> p1, p2;  // indexed like FiniteTable elements
  double residual = 0.0;
  // max over components of the total variation distance to the nearest
  // point mass, 1 - max_x p_j(x)
  double distance_to_nearest_degenerate = 0.0;
  SolutionClass classification = SolutionClass::Other;
};

// Element indexing and character table of a finite group. Element i has
// mixed-radix coordinates over the Cyclic factors, last factor fastest —
// the same order DualLattice uses, so transforms can be fed to tabulated
// characteristic functions directly.
class FiniteTable {
 public:
  explicit FiniteTable(const LcaGroup& group);

  const LcaGroup& group() const { return group_; }
  std::size_t order() const { return n_; }

  Element element_at(std::size_t i) const;
  Element dual_element_at(std::size_t i) const;
  std::size_t index_of(const Element& x) const;

  std::size_t add(std::size_t i, std::size_t j) const { return add_[i * n_ + j]; }

  // index permutation of an automorphism acting on a group of this shape
  // (works for both delta on X and its adjoint on dual(X))
  std::vector<std::size_t> action(const Automorphism& a) const;

  // f[u] = sum_x p[x] (x, u) over the dual group
  std::vector<std::complex<double>> transform(const std::vector<double>& p) const;

  double min_transform_modulus(const std::vector<double>& p) const;

  // max_{u,v} |f1(u+v) f2(u + eps v) - f1(u) f2(u) f1(v) f2(eps v)|
  double pair_residual(const std::vector<std::complex<double>>& f1,
                       const std::vector<std::complex<double>>& f2,
                       const std::vector<std::size_t>& eps_perm) const;

  // q[x + g] = p[x]
  std::vector<double> translate(const std::vector<double>& p, std::size_t g) const;

  // translate with the largest mass at index 0, lexicographically greatest
  // among ties; solutions are compared modulo independent translations
  std::vector<double> canonicalize(const std::vector<double>& p) const;

 private:
  LcaGroup group_;
  LcaGroup dual_;
  std::size_t n_ = 1;
  std::vector<std::int64_t> radix_;
  std::vector<std::size_t> add_;
  std::vector<std::complex<double>> chi_;  // chi_[u * n_ + x] = (x, u)
};

SolutionClass classify(const FiniteInstance& inst, const FiniteTable& table,
                       const std::vector<double>& p1, const std::vector<double>& p2);

std::vector<SolutionRecord> solve(const FiniteInstance& inst);

}  // namespace darmois
