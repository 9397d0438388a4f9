#include "darmois/sd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "darmois/errors.hpp"
#include "darmois/log.hpp"

namespace darmois {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxPackedDim = 16;

std::int64_t mod_reduce(std::int64_t v, std::int64_t n) {
  std::int64_t r = v % n;
  return r < 0 ? r + n : r;
}

// Structure-of-arrays layout of lattice points (optionally pushed through an
// automorphism of the dual group): Real, Integers, Cyclic and Circle blocks
// in factor order.
struct Packed {
  std::size_t n = 0;
  int a = 0, m = 0, c = 0, t = 0;
  std::vector<double> re;
  std::vector<std::int64_t> zi;
  std::vector<std::int64_t> cy;
  std::vector<double> th;
  std::vector<std::int64_t> mods;  // cyclic moduli

  static Packed from(const DualLattice& lat, const Automorphism* map) {
    const LcaGroup& g = lat.group();
    Packed p;
    p.n = lat.size();
    for (const Factor& f : g.factors()) {
      switch (f.kind) {
        case FactorKind::Real: ++p.a; break;
        case FactorKind::Integers: ++p.m; break;
        case FactorKind::Cyclic:
          ++p.c;
          p.mods.push_back(f.n);
          break;
        case FactorKind::Circle: ++p.t; break;
      }
    }
    if (p.a + p.m > kMaxPackedDim)
      throw InputError("lattice has too many continuous/integer axes");
    p.re.resize(p.n * p.a);
    p.zi.resize(p.n * p.m);
    p.cy.resize(p.n * p.c);
    p.th.resize(p.n * p.t);
    for (std::size_t i = 0; i < p.n; ++i) {
      Element e = lat.element_at(i);
      if (map) e = map->apply(e);
      int rd = 0, md = 0, cd = 0, td = 0;
      for (std::size_t fi = 0; fi < g.num_factors(); ++fi) {
        switch (g.factor(fi).kind) {
          case FactorKind::Real: p.re[i * p.a + rd++] = e.x(fi); break;
          case FactorKind::Integers: p.zi[i * p.m + md++] = e.k(fi); break;
          case FactorKind::Cyclic: p.cy[i * p.c + cd++] = e.k(fi); break;
          case FactorKind::Circle: p.th[i * p.t + td++] = e.x(fi); break;
        }
      }
    }
    return p;
  }
};

// Flat evaluator over packed coordinates; closed forms take the fast path,
// tabulated functions do a lattice lookup and report domain misses.
struct FastEval {
  bool closed = true;
  int a = 0, m = 0, c = 0, t = 0;
  // closed: phase coefficients and quadratic form
  std::vector<double> pr, pzi, pth;
  std::vector<std::vector<double>> cyc_phase;
  std::vector<double> qflat;
  int qdim = 0;
  double picoef2 = 0.0;
  int piaxis = -1;  // index into the zi block
  // tabulated
  const DualLattice* lat = nullptr;
  const std::complex<double>* vals = nullptr;

  static FastEval from(const CharFn& f, const LcaGroup& y_group) {
    FastEval ev;
    for (const Factor& fac : y_group.factors()) {
      switch (fac.kind) {
        case FactorKind::Real: ++ev.a; break;
        case FactorKind::Integers: ++ev.m; break;
        case FactorKind::Cyclic: ++ev.c; break;
        case FactorKind::Circle: ++ev.t; break;
      }
    }
    if (!f.is_closed()) {
      ev.closed = false;
      ev.lat = f.lattice_ptr().get();
      ev.vals = f.values().data();
      return ev;
    }
    ev.pr.assign(ev.a, 0.0);
    ev.pzi.assign(ev.m, 0.0);
    ev.pth.assign(ev.t, 0.0);
    const LcaGroup& x_group = f.domain();
    const Element& x0 = f.shift();
    int rd = 0, md = 0, td = 0;
    for (std::size_t i = 0; i < x_group.num_factors(); ++i) {
      switch (x_group.factor(i).kind) {
        case FactorKind::Real: ev.pr[rd++] = x0.x(i); break;
        case FactorKind::Circle: ev.pzi[md++] = x0.x(i); break;
        case FactorKind::Integers: ev.pth[td++] = static_cast<double>(x0.k(i)); break;
        case FactorKind::Cyclic: {
          const std::int64_t n = x_group.factor(i).n;
          std::vector<double> tab(static_cast<std::size_t>(n));
          for (std::int64_t k = 0; k < n; ++k)
            tab[static_cast<std::size_t>(k)] =
                kTwoPi * static_cast<double>(mod_reduce(x0.k(i) * k, n)) /
                static_cast<double>(n);
          ev.cyc_phase.push_back(std::move(tab));
          break;
        }
      }
    }
    ev.qdim = ev.a + ev.m;
    ev.qflat.assign(static_cast<std::size_t>(ev.qdim) * ev.qdim, 0.0);
    for (int i = 0; i < ev.qdim; ++i)
      for (int j = 0; j < ev.qdim; ++j)
        ev.qflat[static_cast<std::size_t>(i) * ev.qdim + j] = f.Q()(i, j);
    if (f.pi()) {
      ev.piaxis = static_cast<int>(f.pi_axis()) - ev.a;
      ev.picoef2 = 2.0 * f.pi_coeff();
    }
    return ev;
  }

  bool eval(const double* re, const std::int64_t* zi, const std::int64_t* cy,
            const double* th, std::complex<double>& out) const {
    if (closed) {
      double phase = 0;
      for (int d = 0; d < a; ++d) phase += pr[d] * re[d];
      for (int j = 0; j < m; ++j) phase += pzi[j] * static_cast<double>(zi[j]);
      for (int u = 0; u < t; ++u) phase += pth[u] * th[u];
      for (int i = 0; i < c; ++i)
        phase += cyc_phase[i][static_cast<std::size_t>(cy[i])];
      double ell[kMaxPackedDim];
      for (int i = 0; i < a; ++i) ell[i] = re[i];
      for (int j = 0; j < m; ++j) ell[a + j] = static_cast<double>(zi[j]);
      double qf = 0;
      for (int i = 0; i < qdim; ++i) {
        double row = 0;
        for (int j = 0; j < qdim; ++j) row += qflat[static_cast<std::size_t>(i) * qdim + j] * ell[j];
        qf += row * ell[i];
      }
      double arg = -qf;
      if (piaxis >= 0 && (zi[piaxis] & 1) != 0) arg += picoef2;
      const double mod = std::exp(arg);
      out = {mod * std::cos(phase), mod * std::sin(phase)};
      return true;
    }
    // tabulated lookup
    std::size_t flat = 0;
    int rd = 0, md = 0, cd = 0;
    const auto& axes = lat->axes();
    std::size_t stride = lat->size();
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const LatticeAxis& ax = axes[i];
      stride /= static_cast<std::size_t>(ax.extent());
      std::int64_t idx = 0;
      switch (ax.kind) {
        case FactorKind::Real: {
          const double raw = re[rd++] / ax.step;
          idx = std::llround(raw);
          if (std::abs(raw - static_cast<double>(idx)) * ax.step > 1e-9) return false;
          break;
        }
        case FactorKind::Integers: idx = zi[md++]; break;
        case FactorKind::Cyclic: idx = mod_reduce(cy[cd++], ax.modulus); break;
        case FactorKind::Circle: return false;
      }
      if (idx < ax.lo || idx > ax.hi) return false;
      flat += stride * static_cast<std::size_t>(idx - ax.lo);
    }
    out = vals[flat];
    return true;
  }
};

std::string lattice_desc(const DualLattice& lat) {
  std::ostringstream os;
  const auto& axes = lat.axes();
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (i) os << " x ";
    const LatticeAxis& ax = axes[i];
    switch (ax.kind) {
      case FactorKind::Real:
        os << "R[" << static_cast<double>(ax.lo) * ax.step << ","
           << static_cast<double>(ax.hi) * ax.step << "]/" << ax.extent();
        break;
      case FactorKind::Integers:
        os << "Z[" << ax.lo << "," << ax.hi << "]";
        break;
      case FactorKind::Cyclic: os << "Z(" << ax.modulus << ")"; break;
      case FactorKind::Circle: break;
    }
  }
  return os.str();
}

std::vector<double> coords_of(const DualLattice& lat, std::size_t flat) {
  const Element e = lat.element_at(flat);
  std::vector<double> out;
  for (std::size_t i = 0; i < lat.group().num_factors(); ++i) {
    switch (lat.group().factor(i).kind) {
      case FactorKind::Real:
      case FactorKind::Circle: out.push_back(e.x(i)); break;
      case FactorKind::Integers:
      case FactorKind::Cyclic: out.push_back(static_cast<double>(e.k(i))); break;
    }
  }
  return out;
}

void validate_instance(const SdInstance& inst) {
  if (inst.components.size() < 2)
    throw InputError("instance needs at least two components");
  for (const CharFn& f : inst.components)
    if (f.domain() != inst.group)
      throw InputError("instance component lives on the wrong group");
  auto check_coeffs = [&](const std::vector<Automorphism>& as, const char* name) {
    if (as.empty()) return;
    if (as.size() != inst.components.size())
      throw InputError(std::string("instance: ") + name +
                       " count does not match components");
    for (const Automorphism& a : as) {
      if (a.group != inst.group)
        throw InputError(std::string("instance: ") + name +
                         " acts on the wrong group");
      a.validate();
    }
  };
  check_coeffs(inst.alphas, "alpha coefficients");
  check_coeffs(inst.betas, "beta coefficients");
}

}  // namespace

DualLattice instance_lattice(const SdInstance& inst, const GridSpec& spec) {
  const LcaGroup y = inst.group.dual();
  return DualLattice::symmetric(y, spec.int_radius, spec.real_points, spec.real_radius);
}

SdReport sd_residual(const SdInstance& inst, const DualLattice& lattice,
                     double tolerance, int threads, std::vector<double>* row_max) {
  validate_instance(inst);
  const LcaGroup y_group = inst.group.dual();
  if (lattice.group() != y_group)
    throw InputError("sd_residual: lattice must live on the dual group");

  const std::size_t n_comp = inst.components.size();
  const Automorphism ident = Automorphism::identity(inst.group);
  std::vector<Automorphism> adj_a, adj_b;
  for (std::size_t j = 0; j < n_comp; ++j) {
    adj_a.push_back((inst.alphas.empty() ? ident : inst.alphas[j]).adjoint());
    adj_b.push_back((inst.betas.empty() ? ident : inst.betas[j]).adjoint());
  }

  std::vector<FastEval> evals;
  for (const CharFn& f : inst.components) evals.push_back(FastEval::from(f, y_group));

  // transformed point tables per component
  std::vector<Packed> au, bv;
  for (std::size_t j = 0; j < n_comp; ++j) {
    au.push_back(Packed::from(lattice, &adj_a[j]));
    bv.push_back(Packed::from(lattice, &adj_b[j]));
  }
  const Packed& shape = au[0];
  const std::size_t npts = shape.n;
  const int a = shape.a, m = shape.m, c = shape.c, t = shape.t;

  // marginal products P(u) = prod_j f_j(adj(alpha_j) u), R(v) likewise
  std::vector<std::complex<double>> pu(npts), rv(npts);
  std::vector<char> pu_ok(npts, 1), rv_ok(npts, 1);
  for (std::size_t i = 0; i < npts; ++i) {
    std::complex<double> acc_p = 1.0, acc_r = 1.0, v;
    for (std::size_t j = 0; j < n_comp; ++j) {
      const Packed& pa = au[j];
      if (evals[j].eval(&pa.re[i * a], &pa.zi[i * m], &pa.cy[i * c], &pa.th[i * t], v))
        acc_p *= v;
      else
        pu_ok[i] = 0;
      const Packed& pb = bv[j];
      if (evals[j].eval(&pb.re[i * a], &pb.zi[i * m], &pb.cy[i * c], &pb.th[i * t], v))
        acc_r *= v;
      else
        rv_ok[i] = 0;
    }
    pu[i] = acc_p;
    rv[i] = acc_r;
  }

  // All-closed fast path. Phases are additive in the argument and the
  // marginal factors come out exactly:
  //   prod_j f_j(p_i + q_k) = P(u_i) R(v_k) exp(S_ik),
  //   S_ik = sum_j [ -2 <Q_j l(p_i), l(q_k)> - 2 c_j odd_j(p_i) odd_j(q_k) ],
  // with p_i = adj(alpha_j) u_i, q_k = adj(beta_j) v_k and c_j the signed
  // two-point exponent. The per-pair residual is then |P R| |expm1(S)| —
  // the same quantity as the generic path, at one expm1 per pair.
  bool all_closed = true;
  for (const FastEval& ev : evals) all_closed = all_closed && ev.closed;

  const int qdim = a + m;
  std::vector<std::vector<double>> wa(n_comp), lb(n_comp);
  std::vector<std::vector<unsigned char>> odd_a(n_comp), odd_b(n_comp);
  std::vector<double> abs_p, abs_r;
  if (all_closed) {
    abs_p.resize(npts);
    abs_r.resize(npts);
    for (std::size_t i = 0; i < npts; ++i) {
      abs_p[i] = std::abs(pu[i]);
      abs_r[i] = std::abs(rv[i]);
    }
    for (std::size_t j = 0; j < n_comp; ++j) {
      const FastEval& ev = evals[j];
      wa[j].resize(npts * static_cast<std::size_t>(qdim));
      lb[j].resize(npts * static_cast<std::size_t>(qdim));
      if (ev.piaxis >= 0) {
        odd_a[j].assign(npts, 0);
        odd_b[j].assign(npts, 0);
      }
      const Packed& pa = au[j];
      const Packed& pb = bv[j];
      for (std::size_t i = 0; i < npts; ++i) {
        double ea[kMaxPackedDim], eb[kMaxPackedDim];
        for (int d = 0; d < a; ++d) {
          ea[d] = pa.re[i * a + d];
          eb[d] = pb.re[i * a + d];
        }
        for (int d = 0; d < m; ++d) {
          ea[a + d] = static_cast<double>(pa.zi[i * m + d]);
          eb[a + d] = static_cast<double>(pb.zi[i * m + d]);
        }
        for (int r = 0; r < qdim; ++r) {
          double acc = 0.0;
          for (int d = 0; d < qdim; ++d)
            acc += ev.qflat[static_cast<std::size_t>(r) * qdim + d] * ea[d];
          wa[j][i * qdim + r] = acc;
        }
        for (int d = 0; d < qdim; ++d) lb[j][i * qdim + d] = eb[d];
        if (ev.piaxis >= 0) {
          odd_a[j][i] = static_cast<unsigned char>(pa.zi[i * m + ev.piaxis] & 1);
          odd_b[j][i] = static_cast<unsigned char>(pb.zi[i * m + ev.piaxis] & 1);
        }
      }
    }
  }

  struct Row {
    double max = -1.0;
    double sum = 0.0;
    std::size_t cnt = 0, skip = 0, argmax_v = 0;
  };
  std::vector<Row> rows(npts);

  auto run_rows = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> wre(static_cast<std::size_t>(a));
    std::vector<std::int64_t> wzi(static_cast<std::size_t>(m));
    std::vector<std::int64_t> wcy(static_cast<std::size_t>(c));
    std::vector<double> wth(static_cast<std::size_t>(t));
    for (std::size_t i = lo; i < hi; ++i) {
      Row& row = rows[i];
      if (!pu_ok[i]) {
        row.skip += npts;
        continue;
      }
      for (std::size_t k = 0; k < npts; ++k) {
        if (!rv_ok[k]) {
          ++row.skip;
          continue;
        }
        std::complex<double> lhs = 1.0, v;
        bool ok = true;
        for (std::size_t j = 0; j < n_comp && ok; ++j) {
          const Packed& pa = au[j];
          const Packed& pb = bv[j];
          for (int d = 0; d < a; ++d) wre[d] = pa.re[i * a + d] + pb.re[k * a + d];
          for (int d = 0; d < m; ++d) wzi[d] = pa.zi[i * m + d] + pb.zi[k * m + d];
          for (int d = 0; d < c; ++d) {
            std::int64_t s = pa.cy[i * c + d] + pb.cy[k * c + d];
            const std::int64_t mod = shape.mods[d];
            wcy[d] = s >= mod ? s - mod : s;
          }
          for (int d = 0; d < t; ++d)
            wth[d] = normalize_angle(pa.th[i * t + d] + pb.th[k * t + d]);
          ok = evals[j].eval(wre.data(), wzi.data(), wcy.data(), wth.data(), v);
          if (ok) lhs *= v;
        }
        if (!ok) {
          ++row.skip;
          continue;
        }
        const double r = std::abs(lhs - pu[i] * rv[k]);
        row.sum += r;
        ++row.cnt;
        if (r > row.max) {
          row.max = r;
          row.argmax_v = k;
        }
      }
    }
  };

  auto run_rows_fast = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Row& row = rows[i];
      for (std::size_t k = 0; k < npts; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_comp; ++j) {
          const double* w = &wa[j][i * static_cast<std::size_t>(qdim)];
          const double* e = &lb[j][k * static_cast<std::size_t>(qdim)];
          double dot = 0.0;
          for (int d = 0; d < qdim; ++d) dot += w[d] * e[d];
          s -= 2.0 * dot;
          if (evals[j].piaxis >= 0 && odd_a[j][i] && odd_b[j][k])
            s -= 2.0 * evals[j].picoef2;
        }
        const double r = abs_p[i] * abs_r[k] * std::abs(std::expm1(s));
        row.sum += r;
        ++row.cnt;
        if (r > row.max) {
          row.max = r;
          row.argmax_v = k;
        }
      }
    }
  };

  auto run_chunk = [&](std::size_t lo, std::size_t hi) {
    if (all_closed)
      run_rows_fast(lo, hi);
    else
      run_rows(lo, hi);
  };

  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(npts)));
  if (nthreads == 1) {
    run_chunk(0, npts);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (npts + nthreads - 1) / nthreads;
    for (int w = 0; w < nthreads; ++w) {
      const std::size_t lo = std::min(npts, static_cast<std::size_t>(w) * chunk);
      const std::size_t hi = std::min(npts, lo + chunk);
      if (lo < hi) pool.emplace_back(run_chunk, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  SdReport rep;
  rep.n_points = npts;
  rep.grid_desc = lattice_desc(lattice);
  rep.tolerance = tolerance;
  double sum = 0.0;
  std::size_t argmax_u = 0;
  for (std::size_t i = 0; i < npts; ++i) {
    const Row& row = rows[i];
    sum += row.sum;
    rep.n_pairs += row.cnt;
    rep.n_skipped += row.skip;
    if (row.max > rep.max_residual) {
      rep.max_residual = row.max;
      argmax_u = i;
    }
  }
  if (rep.n_pairs == 0)
    throw InputError("sd_residual: no evaluable pairs on this lattice");
  if (row_max) {
    row_max->assign(npts, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < npts; ++i)
      if (rows[i].cnt > 0) (*row_max)[i] = rows[i].max;
  }
  rep.mean_residual = sum / static_cast<double>(rep.n_pairs);
  rep.argmax_u = coords_of(lattice, argmax_u);
  rep.argmax_v = coords_of(lattice, rows[argmax_u].argmax_v);
  rep.pass = rep.max_residual <= tolerance;
  return rep;
}

SdReport sd_residual(const SdInstance& inst, const GridSpec& spec, double tolerance,
                     int threads) {
  return sd_residual(inst, instance_lattice(inst, spec), tolerance, threads);
}

double sd_residual_at(const SdInstance& inst, const Element& u, const Element& v) {
  validate_instance(inst);
  const std::size_t n_comp = inst.components.size();
  const Automorphism ident = Automorphism::identity(inst.group);
  std::complex<double> lhs = 1.0, pu = 1.0, rv = 1.0;
  for (std::size_t j = 0; j < n_comp; ++j) {
    const Element audot = (inst.alphas.empty() ? ident : inst.alphas[j]).adjoint().apply(u);
    const Element bvdot = (inst.betas.empty() ? ident : inst.betas[j]).adjoint().apply(v);
    lhs *= inst.components[j].eval(audot + bvdot);
    pu *= inst.components[j].eval(audot);
    rv *= inst.components[j].eval(bvdot);
  }
  return std::abs(lhs - pu * rv);
}

bool in_image_of_eps_minus_id(const Automorphism& eps, const Element& u, double tol) {
  if (u.group() != eps.group)
    throw InputError("image membership: element lives in the wrong group");
  eps.validate();
  const LcaGroup& g = eps.group;
  const auto b = static_cast<Eigen::Index>(g.real_dims());

  Eigen::VectorXd rhs(b);
  {
    Eigen::Index d = 0;
    for (std::size_t i = 0; i < g.num_factors(); ++i)
      if (g.factor(i).kind == FactorKind::Real) rhs(d++) = u.x(i);
  }

  std::size_t ci = 0;  // cross/sign position
  std::size_t cyc = 0;
  for (std::size_t i = 0; i < g.num_factors(); ++i) {
    const Factor& f = g.factor(i);
    switch (f.kind) {
      case FactorKind::Real: break;
      case FactorKind::Integers: {
        const int sign = eps.signs[ci];
        if (sign == -1) {
          if (u.k(i) % 2 != 0) return false;
          // (eps - I) maps (s, n) to ((A-I)s + n v, -2n): n = -u/2
          const double nj = -static_cast<double>(u.k(i)) / 2.0;
          rhs -= nj * eps.cross[ci];
        } else {
          if (u.k(i) != 0) return false;
          // free integer coordinate pinned to zero
        }
        ++ci;
        break;
      }
      case FactorKind::Circle: {
        const int sign = eps.signs[ci];
        if (sign == 1 && eps.cross[ci].isZero(0.0)) {
          const double th = normalize_angle(u.x(i));
          if (std::min(th, kTwoPi - th) > tol) return false;
        }
        // sign -1 doubles the angle and is onto; nonzero cross terms sweep
        // the circle as the real part varies
        ++ci;
        break;
      }
      case FactorKind::Cyclic: {
        const std::int64_t n = f.n;
        const std::int64_t w = mod_reduce(eps.units[cyc] - 1, n);
        const std::int64_t gcd = std::gcd(w, n);
        if (mod_reduce(u.k(i), n) % (gcd == 0 ? n : gcd) != 0) return false;
        ++cyc;
        break;
      }
    }
  }

  if (b == 0) return true;
  const Eigen::MatrixXd amini = eps.alpha - Eigen::MatrixXd::Identity(b, b);
  const Eigen::VectorXd sol = amini.colPivHouseholderQr().solve(rhs);
  const double resid = (amini * sol - rhs).cwiseAbs().maxCoeff();
  return resid <= tol * std::max(1.0, rhs.cwiseAbs().maxCoeff());
}

ParallelogramReport parallelogram_residual(const CharFn& f, const Automorphism& eps,
                                           const DualLattice& lattice,
                                           double tolerance) {
  const LcaGroup y_group = f.dual_domain();
  if (eps.group != y_group)
    throw InputError("parallelogram residual: automorphism must act on the dual group");
  if (lattice.group() != y_group)
    throw InputError("parallelogram residual: lattice must live on the dual group");

  ParallelogramReport rep;
  rep.tolerance = tolerance;
  double sum = 0.0;

  auto try_eval = [&](const Element& y, std::complex<double>& out) {
    if (f.is_closed()) {
      out = f.eval(y);
      return true;
    }
    auto idx = f.lattice_ptr()->flat_index(y);
    if (!idx) return false;
    out = f.values()[*idx];
    return true;
  };

  for (std::size_t iu = 0; iu < lattice.size(); ++iu) {
    const Element u = lattice.element_at(iu);
    if (!in_image_of_eps_minus_id(eps, u)) continue;
    ++rep.n_admissible_u;
    for (std::size_t iv = 0; iv < lattice.size(); ++iv) {
      const Element v = lattice.element_at(iv);
      std::complex<double> fupv, fumv, fu, fv, fmv;
      if (!try_eval(u + v, fupv) || !try_eval(u - v, fumv) || !try_eval(u, fu) ||
          !try_eval(v, fv) || !try_eval(-v, fmv)) {
        ++rep.n_skipped;
        continue;
      }
      const double r = std::abs(fupv * fumv - fu * fu * fv * fmv);
      sum += r;
      ++rep.n_pairs;
      rep.max_residual = std::max(rep.max_residual, r);
    }
  }
  if (rep.n_admissible_u == 0)
    throw MathError("parallelogram residual: no admissible shifts on the grid");
  if (rep.n_pairs == 0)
    throw InputError("parallelogram residual: no evaluable pairs on the grid");
  rep.mean_residual = sum / static_cast<double>(rep.n_pairs);
  rep.pass = rep.max_residual <= tolerance;
  return rep;
}

DifferenceReport third_difference_residual(const RealGrid& psi,
                                           std::int64_t shift_bound,
                                           double tolerance) {
  const DualLattice& lat = psi.lattice();
  const LcaGroup& g = lat.group();
  std::vector<std::size_t> shift_axes;
  for (std::size_t i = 0; i < lat.axes().size(); ++i)
    if (lat.axes()[i].kind != FactorKind::Cyclic) shift_axes.push_back(i);
  if (shift_axes.empty())
    throw InputError("difference residual: no non-cyclic axis to shift along");

  if (shift_bound <= 0) {
    std::int64_t radius = std::numeric_limits<std::int64_t>::max();
    for (std::size_t i : shift_axes)
      radius = std::min(radius, (lat.axes()[i].extent() - 1) / 2);
    shift_bound = std::max<std::int64_t>(1, radius / 4);
  }

  auto axis_step = [&](std::size_t axis, std::int64_t mult) {
    Element h = Element::zero(g);
    if (lat.axes()[axis].kind == FactorKind::Real)
      h.set_x(axis, static_cast<double>(mult) * lat.axes()[axis].step);
    else
      h.set_k(axis, mult);
    return h;
  };

  DifferenceReport rep;
  rep.tolerance = tolerance;
  std::size_t requested = 0, evaluated = 0;
  for (std::size_t ah : shift_axes) {
    for (std::size_t ak : shift_axes) {
      for (std::int64_t hm = 1; hm <= shift_bound; ++hm) {
        for (std::int64_t km = 1; km <= shift_bound; ++km) {
          ++requested;
          try {
            const Element h = axis_step(ah, hm);
            const Element k2 = axis_step(ak, 2 * km);
            RealGrid d1 = finite_difference(psi, h);
            RealGrid d2 = finite_difference(d1, h);
            RealGrid d3 = finite_difference(d2, k2);
            for (std::size_t i = 0; i < d3.size(); ++i)
              rep.max_residual = std::max(rep.max_residual, std::abs(d3.at(i)));
            rep.n_tuples += d3.size();
            ++evaluated;
          } catch (const InputError&) {
            // shift pair does not fit the grid
          }
        }
      }
    }
  }
  if (evaluated == 0)
    throw InputError("difference residual: no shift pair fits the grid");
  rep.coverage = static_cast<double>(evaluated) / static_cast<double>(requested);
  rep.pass = rep.max_residual <= tolerance;
  return rep;
}

CosetDecomposition coset_decompose(const RealGrid& psi, double tolerance) {
  const DualLattice& lat = psi.lattice();
  const LcaGroup& g = lat.group();
  if (g.integer_dims() != 1)
    throw InputError("coset decomposition: exactly one Integers axis required");
  if (g.cyclic_dims() > 0 || g.circle_dims() > 0)
    throw InputError("coset decomposition: only Real and Integers axes supported");

  std::size_t int_axis = 0;
  for (std::size_t i = 0; i < g.num_factors(); ++i)
    if (g.factor(i).kind == FactorKind::Integers) int_axis = i;

  // preconditions: psi(0) = 0, psi even, third differences vanish
  const Element zero = Element::zero(g);
  auto zero_idx = lat.flat_index(zero);
  if (!zero_idx) throw InputError("coset decomposition: lattice must contain 0");
  const double pre_tol = std::max(tolerance, 1e-9);
  if (std::abs(psi.at(*zero_idx)) > pre_tol)
    throw MathError("coset decomposition: psi(0) != 0");
  for (std::size_t i = 0; i < lat.size(); ++i) {
    auto ni = lat.flat_index(-lat.element_at(i));
    if (!ni) throw InputError("coset decomposition: lattice must be symmetric");
    if (std::abs(psi.at(i) - psi.at(*ni)) > pre_tol)
      throw MathError("coset decomposition: psi is not even");
  }
  const DifferenceReport diff = third_difference_residual(psi, 0, pre_tol);
  if (!diff.pass)
    throw MathError("coset decomposition: psi fails the difference cancellation check");

  // least squares for psi(y) = <Q l(y), l(y)> + c_odd [n odd]
  const std::size_t dim = g.lattice_dims();
  const std::size_t nq = dim * (dim + 1) / 2;
  Eigen::MatrixXd design(lat.size(), nq + 1);
  Eigen::VectorXd target(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const Element y = lat.element_at(i);
    const std::vector<double> ell = y.lattice_coords();
    std::size_t col = 0;
    for (std::size_t p = 0; p < dim; ++p)
      for (std::size_t q = p; q < dim; ++q)
        design(i, col++) = (p == q) ? ell[p] * ell[p] : 2.0 * ell[p] * ell[q];
    design(i, nq) = (y.k(int_axis) % 2 != 0) ? 1.0 : 0.0;
    target(i) = psi.at(i);
  }
  const Eigen::VectorXd sol = design.colPivHouseholderQr().solve(target);

  CosetDecomposition out;
  out.tolerance = tolerance;
  out.Q = Eigen::MatrixXd::Zero(dim, dim);
  std::size_t col = 0;
  for (std::size_t p = 0; p < dim; ++p)
    for (std::size_t q = p; q < dim; ++q) {
      out.Q(p, q) = sol(col);
      out.Q(q, p) = sol(col);
      ++col;
    }
  out.odd_constant = sol(nq);
  const Eigen::VectorXd resid = design * sol - target;
  out.max_residual = resid.cwiseAbs().maxCoeff();
  out.pass = out.max_residual <= tolerance;
  if (!out.pass)
    throw MathError("coset decomposition: fit residual above tolerance");
  return out;
}

PexiderFit pexider_fit(const RealGrid& psi1, const RealGrid& psi2,
                       const Automorphism& eps, double tolerance,
                       std::size_t max_equations, std::uint64_t seed) {
  const DualLattice& lat = psi1.lattice();
  if (!(psi2.lattice() == lat))
    throw InputError("pexider fit: both functions need the same lattice");
  if (eps.group != lat.group())
    throw InputError("pexider fit: automorphism must act on the lattice group");
  const std::size_t L = lat.size();
  if (2 * L > 400)
    throw InputError("pexider fit: lattice too large for a dense fit");

  // admissible equations: u + v and u + eps(v) on the lattice
  struct Eq {
    std::size_t iu, iv;
    double rhs;
  };
  std::vector<Eq> eqs;
  for (std::size_t iu = 0; iu < L; ++iu) {
    const Element u = lat.element_at(iu);
    for (std::size_t iv = 0; iv < L; ++iv) {
      const Element v = lat.element_at(iv);
      auto i1 = lat.flat_index(u + v);
      if (!i1) continue;
      auto i2 = lat.flat_index(u + eps.apply(v));
      if (!i2) continue;
      eqs.push_back({iu, iv, psi1.at(*i1) + psi2.at(*i2)});
    }
  }
  if (eqs.empty()) throw InputError("pexider fit: no admissible pairs on the lattice");

  std::vector<std::size_t> pick(eqs.size());
  std::iota(pick.begin(), pick.end(), 0);
  if (eqs.size() > max_equations) {
    std::mt19937_64 gen(seed);
    std::shuffle(pick.begin(), pick.end(), gen);
    pick.resize(max_equations);
    std::sort(pick.begin(), pick.end());
  }

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(pick.size(), 2 * L);
  Eigen::VectorXd target(pick.size());
  for (std::size_t r = 0; r < pick.size(); ++r) {
    const Eq& e = eqs[pick[r]];
    design(r, e.iu) = 1.0;
    design(r, L + e.iv) = 1.0;
    target(r) = e.rhs;
  }
  Eigen::VectorXd sol = design.colPivHouseholderQr().solve(target);

  // gauge: P(0) = psi1(0) + psi2(0)
  auto zero_idx = lat.flat_index(Element::zero(lat.group()));
  if (zero_idx) {
    const double c =
        (psi1.at(*zero_idx) + psi2.at(*zero_idx)) - sol(static_cast<Eigen::Index>(*zero_idx));
    for (std::size_t i = 0; i < L; ++i) sol(static_cast<Eigen::Index>(i)) += c;
    for (std::size_t i = 0; i < L; ++i) sol(static_cast<Eigen::Index>(L + i)) -= c;
  }

  PexiderFit out;
  out.tolerance = tolerance;
  out.P.assign(L, 0.0);
  out.Q.assign(L, 0.0);
  for (std::size_t i = 0; i < L; ++i) {
    out.P[i] = sol(static_cast<Eigen::Index>(i));
    out.Q[i] = sol(static_cast<Eigen::Index>(L + i));
  }
  double sum = 0.0;
  for (const Eq& e : eqs) {
    const double r = std::abs(out.P[e.iu] + out.Q[e.iv] - e.rhs);
    sum += r;
    out.max_residual = std::max(out.max_residual, r);
  }
  out.n_equations = eqs.size();
  out.mean_residual = sum / static_cast<double>(eqs.size());
  out.pass = out.max_residual <= tolerance;
  return out;
}

Eigen::MatrixXd extract_quadratic_form(const RealGrid& phi, double quad_tol) {
  const DualLattice& lat = phi.lattice();
  const LcaGroup& g = lat.group();
  if (g.cyclic_dims() > 0 || g.circle_dims() > 0)
    throw InputError("quadratic extraction: only Real and Integers axes supported");
  const std::size_t dim = g.lattice_dims();
  if (dim == 0) throw InputError("quadratic extraction: no lattice coordinates");

  // parallelogram identity spot check
  const std::size_t L = lat.size();
  std::mt19937_64 gen(424242);
  const std::size_t budget = 20000;
  const bool exhaustive = L * L <= budget;
  std::size_t checked = 0;
  double worst = 0.0;
  auto check_pair = [&](std::size_t iu, std::size_t iv) {
    const Element u = lat.element_at(iu), v = lat.element_at(iv);
    auto ip = lat.flat_index(u + v), im = lat.flat_index(u - v);
    if (!ip || !im) return;
    const double r = std::abs(phi.at(*ip) + phi.at(*im) - 2 * phi.at(iu) - 2 * phi.at(iv));
    worst = std::max(worst, r);
    ++checked;
  };
  if (exhaustive) {
    for (std::size_t iu = 0; iu < L; ++iu)
      for (std::size_t iv = 0; iv < L; ++iv) check_pair(iu, iv);
  } else {
    for (std::size_t k = 0; k < budget; ++k) check_pair(gen() % L, gen() % L);
  }
  if (checked == 0)
    throw InputError("quadratic extraction: no checkable pairs on the lattice");
  if (worst > quad_tol)
    throw MathError("quadratic extraction: parallelogram identity fails on the grid");

  // polarization on unit lattice vectors (coordinate d: Real block first)
  auto unit = [&](std::size_t d) {
    Element e = Element::zero(g);
    const std::size_t nreal = g.real_dims();
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.num_factors(); ++i) {
      const FactorKind k = g.factor(i).kind;
      if (d < nreal) {
        if (k != FactorKind::Real) continue;
        if (count == d) {
          e.set_x(i, lat.axes()[i].step);
          return e;
        }
        ++count;
      } else {
        if (k != FactorKind::Integers) continue;
        if (count == d - nreal) {
          e.set_k(i, 1);
          return e;
        }
        ++count;
      }
    }
    throw InputError("quadratic extraction: bad coordinate index");
  };

  Eigen::MatrixXd q(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const Element ei = unit(i);
    const auto idx_i = lat.flat_index(ei);
    if (!idx_i) throw InputError("quadratic extraction: unit vector off the lattice");
    // phi scales with the actual lattice coordinates of the unit vector
    const std::vector<double> ci = ei.lattice_coords();
    const double si = ci[i];
    q(i, i) = phi.at(*idx_i) / (si * si);
    for (std::size_t j = i + 1; j < dim; ++j) {
      const Element ej = unit(j);
      const auto idx_j = lat.flat_index(ej);
      const auto idx_ij = lat.flat_index(ei + ej);
      if (!idx_j || !idx_ij)
        throw InputError("quadratic extraction: unit vectors off the lattice");
      const std::vector<double> cj = ej.lattice_coords();
      const double sj = cj[j];
      q(i, j) = (phi.at(*idx_ij) - phi.at(*idx_i) - phi.at(*idx_j)) / (2.0 * si * sj);
      q(j, i) = q(i, j);
    }
  }

  // reconstruction check over the whole lattice
  double recon = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    const std::vector<double> ell = lat.element_at(i).lattice_coords();
    double val = 0.0;
    for (std::size_t p = 0; p < dim; ++p)
      for (std::size_t r = 0; r < dim; ++r) val += q(p, r) * ell[p] * ell[r];
    recon = std::max(recon, std::abs(val - phi.at(i)));
  }
  if (recon > 10 * quad_tol)
    throw MathError("quadratic extraction: reconstruction residual " +
                    std::to_string(recon) + " above tolerance");
  return q;
}

}  // namespace darmois
