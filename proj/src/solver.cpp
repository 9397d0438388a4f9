#include "darmois/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "darmois/errors.hpp"
#include "darmois/log.hpp"
#include "darmois/sd.hpp"

namespace darmois {
namespace {

constexpr double kMaxGridPairs = 1e7;

// compositions of m into n nonnegative parts
double composition_count(std::int64_t m, std::size_t n) {
  if (n == 0) return m == 0 ? 1.0 : 0.0;
  return std::exp(std::lgamma(double(m + n)) - std::lgamma(double(m + 1)) -
                  std::lgamma(double(n)));
}

void for_each_composition(std::int64_t total, std::size_t parts,
                          const std::function<void(const std::vector<std::int64_t>&)>& fn) {
  std::vector<std::int64_t> c(parts, 0);
  std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i,
                                                           std::int64_t left) {
    if (i + 1 == parts) {
      c[i] = left;
      fn(c);
      return;
    }
    for (std::int64_t v = 0; v <= left; ++v) {
      c[i] = v;
      rec(i + 1, left - v);
    }
  };
  if (parts == 0) return;
  rec(0, total);
}

// Euclidean projection onto the probability simplex
void project_simplex(std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> u(y);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, lambda = 0.0;
  std::size_t rho = 0;
  for (std::size_t k = 0; k < n; ++k) {
    cum += u[k];
    const double t = (1.0 - cum) / double(k + 1);
    if (u[k] + t > 0.0) {
      rho = k + 1;
      lambda = t;
    }
  }
  if (rho == 0) {  // all mass collapsed; fall back to uniform
    std::fill(y.begin(), y.end(), 1.0 / double(n));
    return;
  }
  for (auto& v : y) v = std::max(v + lambda, 0.0);
}

struct Objective {
  const FiniteTable& table;
  const std::vector<std::size_t>& eps;

  // summed squared residual over all (u, v)
  double value(const std::vector<std::complex<double>>& f1,
               const std::vector<std::complex<double>>& f2) const {
    const std::size_t n = table.order();
    double s = 0.0;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t d = eps[v];
        const std::complex<double> F =
            f1[table.add(u, v)] * f2[table.add(u, d)] - f1[u] * f2[u] * f1[v] * f2[d];
        s += std::norm(F);
      }
    return s;
  }

  // gradient with respect to (p1, p2), accumulated per group element and then
  // pushed through the character table (the transform is linear in p)
  void gradient(const std::vector<double>& p1, const std::vector<double>& p2,
                std::vector<double>& g1, std::vector<double>& g2, double& value_out,
                std::vector<std::complex<double>>& f1,
                std::vector<std::complex<double>>& f2) const {
    const std::size_t n = table.order();
    f1 = table.transform(p1);
    f2 = table.transform(p2);
    std::vector<std::complex<double>> a1(n), b1(n), c1(n), a2(n), b2(n), c2(n);
    double s = 0.0;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t d = eps[v];
        const std::size_t iuv = table.add(u, v);
        const std::size_t iud = table.add(u, d);
        const std::complex<double> F = f1[iuv] * f2[iud] - f1[u] * f2[u] * f1[v] * f2[d];
        s += std::norm(F);
        const std::complex<double> cF = std::conj(F);
        a1[iuv] += cF * f2[iud];
        b1[u] += cF * f2[u] * f1[v] * f2[d];
        c1[v] += cF * f1[u] * f2[u] * f2[d];
        a2[iud] += cF * f1[iuv];
        b2[u] += cF * f1[u] * f1[v] * f2[d];
        c2[d] += cF * f1[u] * f2[u] * f1[v];
      }
    value_out = s;
    g1.assign(n, 0.0);
    g2.assign(n, 0.0);
    // chi_[w * n + x] is (x, w); d f_j[w] / d p_j[x] = (x, w)
    for (std::size_t x = 0; x < n; ++x) {
      std::complex<double> acc1 = 0.0, acc2 = 0.0;
      for (std::size_t w = 0; w < n; ++w) {
        const std::complex<double> chi =
            pair(table.element_at(x), table.dual_element_at(w));
        acc1 += (a1[w] - b1[w] - c1[w]) * chi;
        acc2 += (a2[w] - b2[w] - c2[w]) * chi;
      }
      g1[x] = 2.0 * acc1.real();
      g2[x] = 2.0 * acc2.real();
    }
  }
};

}  // namespace

void FiniteInstance::validate() const {
  if (!group.is_finite())
    throw InputError("finite solver: group must have Cyclic factors only");
  if (group.order() > 64) throw InputError("finite solver: group order exceeds 64");
  delta.validate();
  if (!(delta.group == group)) throw InputError("finite solver: delta group mismatch");
  if (!(tolerance > 0)) throw InputError("finite solver: tolerance must be positive");
  if (!(grid_step > 0 && grid_step <= 1))
    throw InputError("finite solver: grid_step must be in (0, 1]");
  if (restarts < 1 || max_iters < 1)
    throw InputError("finite solver: restarts and max_iters must be at least 1");
  if (!(nonvanish_eps > 0) || !(dedup_eps > 0))
    throw InputError("finite solver: nonvanish_eps and dedup_eps must be positive");
}

std::string to_string(SolutionClass c) {
  switch (c) {
    case SolutionClass::Degenerate: return "degenerate";
    case SolutionClass::CharacterPair: return "character-pair";
    case SolutionClass::Other: return "other";
  }
  return "other";
}

FiniteTable::FiniteTable(const LcaGroup& group) : group_(group), dual_(group.dual()) {
  if (!group_.is_finite())
    throw InputError("finite table: group must have Cyclic factors only");
  n_ = std::size_t(group_.order());
  radix_.reserve(group_.num_factors());
  for (const auto& f : group_.factors()) radix_.push_back(f.n);
  add_.resize(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      add_[i * n_ + j] = index_of(element_at(i) + element_at(j));
  chi_.resize(n_ * n_);
  for (std::size_t u = 0; u < n_; ++u)
    for (std::size_t x = 0; x < n_; ++x)
      chi_[u * n_ + x] = pair(element_at(x), dual_element_at(u));
}

Element FiniteTable::element_at(std::size_t i) const {
  Element e(group_);
  for (std::size_t j = radix_.size(); j-- > 0;) {
    e.set_k(j, std::int64_t(i) % radix_[j]);
    i /= std::size_t(radix_[j]);
  }
  return e;
}

Element FiniteTable::dual_element_at(std::size_t i) const {
  Element e(dual_);
  for (std::size_t j = radix_.size(); j-- > 0;) {
    e.set_k(j, std::int64_t(i) % radix_[j]);
    i /= std::size_t(radix_[j]);
  }
  return e;
}

std::size_t FiniteTable::index_of(const Element& x) const {
  std::size_t idx = 0;
  for (std::size_t j = 0; j < radix_.size(); ++j)
    idx = idx * std::size_t(radix_[j]) + std::size_t(x.k(j));
  return idx;
}

std::vector<std::size_t> FiniteTable::action(const Automorphism& a) const {
  if (a.group.num_factors() != radix_.size())
    throw InputError("finite table: automorphism shape mismatch");
  for (std::size_t j = 0; j < radix_.size(); ++j)
    if (a.group.factor(j).kind != FactorKind::Cyclic || a.group.factor(j).n != radix_[j])
      throw InputError("finite table: automorphism shape mismatch");
  std::vector<std::size_t> perm(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    Element e(a.group);
    std::size_t rem = i;
    for (std::size_t j = radix_.size(); j-- > 0;) {
      e.set_k(j, std::int64_t(rem) % radix_[j]);
      rem /= std::size_t(radix_[j]);
    }
    const Element img = a.apply(e);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < radix_.size(); ++j)
      idx = idx * std::size_t(radix_[j]) + std::size_t(img.k(j));
    perm[i] = idx;
  }
  return perm;
}

std::vector<std::complex<double>> FiniteTable::transform(
    const std::vector<double>& p) const {
  if (p.size() != n_) throw InputError("finite table: probability vector size mismatch");
  std::vector<std::complex<double>> f(n_, 0.0);
  for (std::size_t u = 0; u < n_; ++u) {
    std::complex<double> acc = 0.0;
    const std::complex<double>* row = &chi_[u * n_];
    for (std::size_t x = 0; x < n_; ++x) acc += row[x] * p[x];
    f[u] = acc;
  }
  return f;
}

double FiniteTable::min_transform_modulus(const std::vector<double>& p) const {
  const auto f = transform(p);
  double m = std::abs(f[0]);
  for (const auto& v : f) m = std::min(m, std::abs(v));
  return m;
}

double FiniteTable::pair_residual(const std::vector<std::complex<double>>& f1,
                                  const std::vector<std::complex<double>>& f2,
                                  const std::vector<std::size_t>& eps_perm) const {
  double worst = 0.0;
  for (std::size_t u = 0; u < n_; ++u)
    for (std::size_t v = 0; v < n_; ++v) {
      const std::size_t d = eps_perm[v];
      const std::complex<double> F =
          f1[add(u, v)] * f2[add(u, d)] - f1[u] * f2[u] * f1[v] * f2[d];
      worst = std::max(worst, std::abs(F));
    }
  return worst;
}

std::vector<double> FiniteTable::translate(const std::vector<double>& p,
                                           std::size_t g) const {
  std::vector<double> q(n_);
  for (std::size_t x = 0; x < n_; ++x) q[add(x, g)] = p[x];
  return q;
}

std::vector<double> FiniteTable::canonicalize(const std::vector<double>& p) const {
  const double maxmass = *std::max_element(p.begin(), p.end());
  std::vector<double> best;
  for (std::size_t g = 0; g < n_; ++g) {
    std::vector<double> q = translate(p, g);
    if (q[0] < maxmass - 1e-15) continue;
    if (best.empty() || std::lexicographical_compare(best.begin(), best.end(),
                                                     q.begin(), q.end()))
      best = std::move(q);
  }
  return best;
}

SolutionClass classify(const FiniteInstance& inst, const FiniteTable& table,
                       const std::vector<double>& p1, const std::vector<double>& p2) {
  const double scale = inst.mode == SearchMode::Grid ? inst.grid_step : inst.tolerance;
  const double d1 = 1.0 - *std::max_element(p1.begin(), p1.end());
  const double d2 = 1.0 - *std::max_element(p2.begin(), p2.end());
  if (std::max(d1, d2) <= 10.0 * scale) return SolutionClass::Degenerate;
  bool unimodular = true;
  for (const auto* p : {&p1, &p2}) {
    for (const auto& v : table.transform(*p))
      if (std::abs(std::abs(v) - 1.0) > 1e-9) {
        unimodular = false;
        break;
      }
    if (!unimodular) break;
  }
  return unimodular ? SolutionClass::CharacterPair : SolutionClass::Other;
}

namespace {

struct RawSolution {
  std::vector<double> p1, p2;
  double residual = 0.0;
};

std::vector<RawSolution> solve_grid(const FiniteInstance& inst, const FiniteTable& table,
                                    const std::vector<std::size_t>& eps) {
  const std::size_t n = table.order();
  const std::int64_t m = std::llround(1.0 / inst.grid_step);
  if (m < 1) throw InputError("finite solver: grid_step yields an empty mesh");
  const double count = composition_count(m, n);
  if (count * count > kMaxGridPairs)
    throw InputError(
        "finite solver: simplex grid has " + std::to_string(std::llround(count)) +
        " candidates; the pair scan would exceed the budget — use opt mode");

  struct Candidate {
    std::vector<double> p;
    std::vector<std::complex<double>> f;
  };
  std::vector<Candidate> cands;
  for_each_composition(m, n, [&](const std::vector<std::int64_t>& c) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = double(c[i]) / double(m);
    auto f = table.transform(p);
    double minmod = std::abs(f[0]);
    for (const auto& v : f) minmod = std::min(minmod, std::abs(v));
    if (minmod > inst.nonvanish_eps) cands.push_back({std::move(p), std::move(f)});
  });
  log_info("finite solver: " + std::to_string(cands.size()) +
           " non-vanishing grid candidates");

  std::vector<RawSolution> out;
  for (const auto& c1 : cands)
    for (const auto& c2 : cands) {
      const double r = table.pair_residual(c1.f, c2.f, eps);
      if (r <= inst.tolerance) out.push_back({c1.p, c2.p, r});
    }
  return out;
}

std::vector<RawSolution> solve_opt(const FiniteInstance& inst, const FiniteTable& table,
                                   const std::vector<std::size_t>& eps) {
  const std::size_t n = table.order();
  const Objective obj{table, eps};
  std::mt19937_64 rng(inst.seed);
  auto dirichlet = [&] {
    std::vector<double> p(n);
    double sum = 0.0;
    for (auto& v : p) {
      const double u = (double(rng() >> 11) + 0.5) * 0x1p-53;
      v = -std::log(u);
      sum += v;
    }
    for (auto& v : p) v /= sum;
    return p;
  };

  std::vector<RawSolution> out;
  for (int r = 0; r < inst.restarts; ++r) {
    std::vector<double> p1 = dirichlet(), p2 = dirichlet();
    std::vector<double> g1, g2;
    std::vector<std::complex<double>> f1, f2;
    double s = 0.0;
    double step = 1.0;
    for (int it = 0; it < inst.max_iters; ++it) {
      obj.gradient(p1, p2, g1, g2, s, f1, f2);
      if (s <= 1e-26) break;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        std::vector<double> q1(n), q2(n);
        for (std::size_t i = 0; i < n; ++i) q1[i] = p1[i] - step * g1[i];
        for (std::size_t i = 0; i < n; ++i) q2[i] = p2[i] - step * g2[i];
        project_simplex(q1);
        project_simplex(q2);
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          move += (q1[i] - p1[i]) * (q1[i] - p1[i]) + (q2[i] - p2[i]) * (q2[i] - p2[i]);
        const auto h1 = table.transform(q1);
        const auto h2 = table.transform(q2);
        const double sq = obj.value(h1, h2);
        if (sq <= s - 1e-4 * move / std::max(step, 1e-300)) {
          p1.swap(q1);
          p2.swap(q2);
          s = sq;
          step = std::min(step * 2.0, 1e9);
          accepted = move > 1e-32;
          break;
        }
        step *= 0.5;
        if (step < 1e-18) break;
      }
      if (!accepted) break;  // stationary (vertex or KKT point)
    }
    const auto h1 = table.transform(p1);
    const auto h2 = table.transform(p2);
    const double resid = table.pair_residual(h1, h2, eps);
    double minmod = std::abs(h1[0]);
    for (const auto& v : h1) minmod = std::min(minmod, std::abs(v));
    for (const auto& v : h2) minmod = std::min(minmod, std::abs(v));
    if (resid <= inst.tolerance && minmod > inst.nonvanish_eps)
      out.push_back({std::move(p1), std::move(p2), resid});
  }
  return out;
}

// defensive cross-check: every record must pass the general-purpose residual
// evaluator on tabulated transforms over the full finite dual
void reverify(const FiniteInstance& inst, const FiniteTable& table,
              const RawSolution& sol) {
  auto lat = std::make_shared<DualLattice>(
      DualLattice::symmetric(inst.group.dual(), 0));
  if (lat->size() != table.order())
    throw MathError("finite solver: dual lattice does not cover the group");
  SdInstance si;
  si.group = inst.group;
  si.components = {CharFn::tabulated(lat, table.transform(sol.p1)),
                   CharFn::tabulated(lat, table.transform(sol.p2))};
  si.betas = {Automorphism::identity(inst.group), inst.delta};
  const SdReport rep = sd_residual(si, *lat, inst.tolerance);
  if (!rep.pass)
    throw MathError("finite solver: record failed re-verification (residual " +
                    std::to_string(rep.max_residual) + ")");
}

}  // namespace

std::vector<SolutionRecord> solve(const FiniteInstance& inst) {
  inst.validate();
  const FiniteTable table(inst.group);
  const Automorphism eps_auto = inst.delta.adjoint();
  const std::vector<std::size_t> eps = table.action(eps_auto);

  std::vector<RawSolution> raw = inst.mode == SearchMode::Grid
                                     ? solve_grid(inst, table, eps)
                                     : solve_opt(inst, table, eps);

  // canonicalize over independent translations, deduplicate, keep best residual
  std::vector<RawSolution> unique;
  for (auto& r : raw) {
    r.p1 = table.canonicalize(r.p1);
    r.p2 = table.canonicalize(r.p2);
    bool merged = false;
    for (auto& u : unique) {
      double d = 0.0;
      for (std::size_t i = 0; i < r.p1.size(); ++i) {
        d = std::max(d, std::abs(u.p1[i] - r.p1[i]));
        d = std::max(d, std::abs(u.p2[i] - r.p2[i]));
      }
      if (d <= inst.dedup_eps) {
        if (r.residual < u.residual) u = r;
        merged = true;
        break;
      }
    }
    if (!merged) unique.push_back(std::move(r));
  }

  std::sort(unique.begin(), unique.end(), [](const RawSolution& a, const RawSolution& b) {
    if (a.residual != b.residual) return a.residual < b.residual;
    if (a.p1 != b.p1) return a.p1 < b.p1;
    return a.p2 < b.p2;
  });

  std::vector<SolutionRecord> records;
  records.reserve(unique.size());
  for (const auto& u : unique) {
    reverify(inst, table, u);
    SolutionRecord rec;
    rec.p1 = u.p1;
    rec.p2 = u.p2;
    rec.residual = u.residual;
    const double d1 = 1.0 - *std::max_element(u.p1.begin(), u.p1.end());
    const double d2 = 1.0 - *std::max_element(u.p2.begin(), u.p2.end());
    rec.distance_to_nearest_degenerate = std::max(d1, d2);
    rec.classification = classify(inst, table, u.p1, u.p2);
    records.push_back(std::move(rec));
  }
  log_info("finite solver: " + std::to_string(records.size()) +
           " records after deduplication");
  return records;
}

}  // namespace darmois
