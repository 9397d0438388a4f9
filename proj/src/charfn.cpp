#include "darmois/charfn.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "darmois/errors.hpp"

namespace darmois {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_quadratic_shape(const LcaGroup& x_group, const Eigen::MatrixXd& Q) {
  const auto dim =
      static_cast<Eigen::Index>(x_group.real_dims() + x_group.circle_dims());
  if (Q.rows() != dim || Q.cols() != dim)
    throw InputError("quadratic form has wrong dimension for the dual lattice block");
}

void check_psd(const Eigen::MatrixXd& Q) {
  if (Q.size() == 0) return;
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InputError("quadratic form must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  if (es.eigenvalues().minCoeff() < -1e-12 * scale)
    throw InputError("quadratic form must be positive semidefinite");
}

// position of the parity coordinate (the Integers coordinate of dual(X) dual
// to X's unique circle factor) within the dual lattice coordinate block
std::size_t parity_axis(const LcaGroup& x_group) {
  if (x_group.circle_dims() != 1)
    throw InputError("signed two-point factor needs exactly one circle factor");
  return x_group.real_dims();  // Real block first, then the Integers block
}

}  // namespace

CharFn CharFn::closed(const LcaGroup& x_group, const Element& shift,
                      const Eigen::MatrixXd& Q, std::optional<SignedPi> pi) {
  if (shift.group() != x_group) throw InputError("charfn shift lives in the wrong group");
  check_quadratic_shape(x_group, Q);
  CharFn f;
  f.closed_ = true;
  f.x_group_ = x_group;
  f.shift_ = shift;
  f.q_ = Q;
  if (pi && pi->which != 1 && pi->which != 2)
    throw InputError("signed two-point component index must be 1 or 2");
  if (pi && pi->kappa == 0.0) pi.reset();
  f.pi_ = pi;
  f.pi_axis_ = pi ? parity_axis(x_group) : 0;
  return f;
}

CharFn CharFn::tabulated(std::shared_ptr<const DualLattice> lattice,
                         std::vector<std::complex<double>> values) {
  if (!lattice) throw InputError("tabulated charfn needs a lattice");
  if (values.size() != lattice->size())
    throw InputError("tabulated charfn: value count does not match lattice");
  CharFn f;
  f.closed_ = false;
  f.x_group_ = lattice->group().dual();  // lattice lives on Y = dual(X)
  f.lat_ = std::move(lattice);
  f.vals_ = std::move(values);
  return f;
}

std::complex<double> CharFn::eval(const Element& y) const {
  if (!closed_) {
    auto idx = lat_->flat_index(y);
    if (!idx) throw InputError("tabulated charfn evaluated off its lattice");
    return vals_[*idx];
  }
  if (y.group() != x_group_.dual())
    throw InputError("charfn evaluated outside the dual group");
  const double phase = pair_phase(shift_, y);
  const std::vector<double> ell = y.lattice_coords();
  double qf = 0;
  const auto dim = static_cast<std::size_t>(q_.rows());
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) qf += q_(i, j) * ell[i] * ell[j];
  double arg = -qf;
  if (pi_) {
    const auto n = static_cast<std::int64_t>(std::llround(ell[pi_axis_]));
    if (n % 2 != 0) arg += 2.0 * pi_coeff();
  }
  const double mod = std::exp(arg);
  return {mod * std::cos(phase), mod * std::sin(phase)};
}

bool CharFn::is_identity() const {
  if (!closed_ || pi_) return false;
  if (q_.size() > 0 && (q_.array() != 0.0).any()) return false;
  return shift_.approx_equal(Element::zero(x_group_), 0.0);
}

const Element& CharFn::shift() const {
  if (!closed_) throw InputError("shift() on a tabulated charfn");
  return shift_;
}
const Eigen::MatrixXd& CharFn::Q() const {
  if (!closed_) throw InputError("Q() on a tabulated charfn");
  return q_;
}
const std::optional<SignedPi>& CharFn::pi() const {
  if (!closed_) throw InputError("pi() on a tabulated charfn");
  return pi_;
}
double CharFn::pi_coeff() const {
  if (!closed_) throw InputError("pi_coeff() on a tabulated charfn");
  if (!pi_) return 0.0;
  return pi_->which == 1 ? pi_->kappa : -pi_->kappa;
}
std::size_t CharFn::pi_axis() const {
  if (!closed_) throw InputError("pi_axis() on a tabulated charfn");
  return pi_axis_;
}
std::shared_ptr<const DualLattice> CharFn::lattice_ptr() const {
  if (closed_) throw InputError("lattice_ptr() on a closed-form charfn");
  return lat_;
}
const std::vector<std::complex<double>>& CharFn::values() const {
  if (closed_) throw InputError("values() on a closed-form charfn");
  return vals_;
}

CharFn gaussian_charfn(const LcaGroup& x_group, const Element& shift,
                       const Eigen::MatrixXd& Q) {
  check_quadratic_shape(x_group, Q);
  check_psd(Q);
  return CharFn::closed(x_group, shift, Q, std::nullopt);
}

CharFn signed_pi_charfn(const LcaGroup& x_group, double kappa, int which) {
  if (which != 1 && which != 2)
    throw InputError("signed two-point component index must be 1 or 2");
  parity_axis(x_group);  // validates the circle factor
  const auto dim =
      static_cast<Eigen::Index>(x_group.real_dims() + x_group.circle_dims());
  return CharFn::closed(x_group, Element::zero(x_group),
                        Eigen::MatrixXd::Zero(dim, dim), SignedPi{kappa, which});
}

CharFn convolve(const CharFn& f, const CharFn& g) {
  if (f.domain() != g.domain())
    throw InputError("convolve: factors live on different groups");
  if (f.is_closed() && g.is_closed()) {
    const Eigen::MatrixXd q = f.Q() + g.Q();
    const double coeff = f.pi_coeff() + g.pi_coeff();
    std::optional<SignedPi> pi;
    if (coeff != 0.0) pi = SignedPi{coeff, 1};
    return CharFn::closed(f.domain(), f.shift() + g.shift(), q, pi);
  }
  if (!f.is_closed() && !g.is_closed()) {
    if (!(*f.lattice_ptr() == *g.lattice_ptr()))
      throw InputError("convolve: tabulated factors need identical lattices");
    std::vector<std::complex<double>> v(f.values());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= g.values()[i];
    return CharFn::tabulated(f.lattice_ptr(), std::move(v));
  }
  const CharFn& tab = f.is_closed() ? g : f;
  const CharFn& cls = f.is_closed() ? f : g;
  auto lat = tab.lattice_ptr();
  std::vector<std::complex<double>> v(tab.values());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= cls.eval(lat->element_at(i));
  return CharFn::tabulated(lat, std::move(v));
}

CharFn reflect(const CharFn& f) {
  if (f.is_closed()) return CharFn::closed(f.domain(), -f.shift(), f.Q(), f.pi());
  auto lat = f.lattice_ptr();
  std::vector<std::complex<double>> v(lat->size());
  for (std::size_t i = 0; i < lat->size(); ++i) {
    auto idx = lat->flat_index(-lat->element_at(i));
    if (!idx)
      throw InputError("reflect: tabulated lattice is not symmetric under negation");
    v[i] = f.values()[*idx];
  }
  return CharFn::tabulated(lat, std::move(v));
}

CharFn symmetrize(const CharFn& f) { return convolve(f, reflect(f)); }

namespace {

Element dual_axis_point(const LcaGroup& y_group, std::size_t factor, std::int64_t k,
                        double x = 0.0) {
  Element e = Element::zero(y_group);
  const FactorKind kind = y_group.factor(factor).kind;
  if (kind == FactorKind::Real || kind == FactorKind::Circle)
    e.set_x(factor, x);
  else
    e.set_k(factor, k);
  return e;
}

}  // namespace

PdReport validate_positive_definite(const CharFn& f, const PdOptions& opts) {
  const LcaGroup x_group = f.domain();
  const LcaGroup y_group = x_group.dual();

  PdReport rep;
  rep.min_density = std::numeric_limits<double>::infinity();

  const bool has_circle = x_group.circle_dims() > 0;
  const bool has_cyclic = x_group.cyclic_dims() > 0;
  if (has_circle && 2 * opts.dual_cutoff + 1 < 8)
    throw InputError("pd validation: dual grid too small (fewer than 8 points)");
  if (!has_circle && !has_cyclic && opts.density_points < 8)
    throw InputError("pd validation: density grid too small (fewer than 8 points)");

  const Element zero_y = Element::zero(y_group);
  rep.unit_defect = std::abs(f.eval(zero_y) - std::complex<double>(1.0, 0.0));

  auto track = [&rep](std::complex<double> v) {
    rep.max_abs = std::max(rep.max_abs, std::abs(v));
  };

  // Circle factors: Fejer-weighted Fourier inversion of the marginal. The
  // triangular weights make the reconstruction a convolution with a
  // nonnegative kernel, so genuine distributions can never be flagged (a
  // plain truncated series would ring negative around point masses), while
  // smooth signed densities keep their negative dips at these cutoffs.
  for (std::size_t i = 0; i < x_group.num_factors(); ++i) {
    if (x_group.factor(i).kind != FactorKind::Circle) continue;
    const int n_max = opts.dual_cutoff;
    std::vector<std::complex<double>> coef(2 * n_max + 1);
    for (int n = -n_max; n <= n_max; ++n) {
      coef[n + n_max] = f.eval(dual_axis_point(y_group, i, n));
      track(coef[n + n_max]);
      rep.hermitian_defect =
          std::max(rep.hermitian_defect,
                   std::abs(f.eval(dual_axis_point(y_group, i, -n)) -
                            std::conj(coef[n + n_max])));
    }
    rep.grid_size += 2 * n_max + 1;
    for (int m = 0; m < opts.density_points; ++m) {
      const double theta = kTwoPi * m / opts.density_points;
      std::complex<double> rho = 0;
      for (int n = -n_max; n <= n_max; ++n) {
        const double w = 1.0 - std::abs(n) / (n_max + 1.0);
        rho += w * coef[n + n_max] *
               std::complex<double>(std::cos(n * theta), -std::sin(n * theta));
      }
      rep.min_density = std::min(rep.min_density, rho.real() / kTwoPi);
    }
  }

  // cyclic factors: exact inverse DFT of the marginal
  for (std::size_t i = 0; i < x_group.num_factors(); ++i) {
    if (x_group.factor(i).kind != FactorKind::Cyclic) continue;
    const std::int64_t n = x_group.factor(i).n;
    std::vector<std::complex<double>> coef(n);
    for (std::int64_t k = 0; k < n; ++k) {
      coef[k] = f.eval(dual_axis_point(y_group, i, k));
      track(coef[k]);
    }
    rep.grid_size += static_cast<int>(n);
    for (std::int64_t x = 0; x < n; ++x) {
      std::complex<double> rho = 0;
      for (std::int64_t k = 0; k < n; ++k) {
        const double ph = kTwoPi * static_cast<double>((k * x) % n) / n;
        rho += coef[k] * std::complex<double>(std::cos(ph), -std::sin(ph));
      }
      rep.min_density = std::min(rep.min_density, rho.real() / static_cast<double>(n));
    }
  }

  // Integers factors of X: masses via Riemann sums over the dual circle
  for (std::size_t i = 0; i < x_group.num_factors(); ++i) {
    if (x_group.factor(i).kind != FactorKind::Integers || !f.is_closed()) continue;
    const int m = opts.density_points;
    rep.grid_size += m;
    for (int j = -opts.dual_cutoff; j <= opts.dual_cutoff; ++j) {
      std::complex<double> rho = 0;
      for (int t = 0; t < m; ++t) {
        const double phi = kTwoPi * t / m;
        const std::complex<double> v = f.eval(dual_axis_point(y_group, i, 0, phi));
        if (j == -opts.dual_cutoff) track(v);
        rho += v * std::complex<double>(std::cos(j * phi), -std::sin(j * phi));
      }
      rep.min_density = std::min(rep.min_density, rho.real() / m);
    }
  }

  // no compact factor: closed forms are Gaussians with PSD forms, whose
  // marginal densities are nonnegative with infimum 0; tabulated functions
  // get a trapezoid inversion over their own lattice
  if (!has_circle && !has_cyclic && x_group.integer_dims() == 0) {
    if (f.is_closed()) {
      rep.min_density = std::min(rep.min_density, 0.0);
      rep.grid_size += 1;
    } else {
      const DualLattice& lat = *f.lattice_ptr();
      for (std::size_t i = 0; i < x_group.num_factors(); ++i) {
        if (x_group.factor(i).kind != FactorKind::Real) continue;
        const LatticeAxis& ax = lat.axes()[i];
        const int m = opts.density_points;
        rep.grid_size += m;
        for (int ti = 0; ti < m; ++ti) {
          const double t = -10.0 + 20.0 * ti / m;
          std::complex<double> rho = 0;
          for (std::int64_t si = ax.lo; si <= ax.hi; ++si) {
            const double s = static_cast<double>(si) * ax.step;
            const double w = (si == ax.lo || si == ax.hi) ? 0.5 : 1.0;
            const std::complex<double> v = f.eval(dual_axis_point(y_group, i, 0, s));
            if (ti == 0) track(v);
            rho += w * v * std::complex<double>(std::cos(s * t), -std::sin(s * t));
          }
          rep.min_density = std::min(rep.min_density, rho.real() * ax.step / kTwoPi);
        }
      }
    }
  }

  // random spot checks of the increment inequality on the dual group
  std::mt19937_64 gen(opts.seed);
  std::uniform_real_distribution<double> unif(-4.0, 4.0);
  auto random_dual = [&]() {
    Element e = Element::zero(y_group);
    for (std::size_t i = 0; i < y_group.num_factors(); ++i) {
      switch (y_group.factor(i).kind) {
        case FactorKind::Real: e.set_x(i, unif(gen)); break;
        case FactorKind::Circle: e.set_x(i, normalize_angle(unif(gen))); break;
        case FactorKind::Integers:
          e.set_k(i, static_cast<std::int64_t>(std::llround(unif(gen) * 4)));
          break;
        case FactorKind::Cyclic:
          e.set_k(i, static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(
                                                           y_group.factor(i).n)));
          break;
      }
    }
    return e;
  };
  const bool can_spot_check = f.is_closed() || y_group.is_finite();
  if (can_spot_check) {
    for (int p = 0; p < opts.random_pairs; ++p) {
      const Element u = random_dual();
      const Element v = random_dual();
      const std::complex<double> fu = f.eval(u), fv = f.eval(v), fd = f.eval(u - v);
      track(fu);
      track(fv);
      const double lhs = std::norm(fu - fv);
      const double rhs = 2.0 * (1.0 - fd.real());
      rep.increment_margin = std::max(rep.increment_margin, lhs - rhs);
      rep.hermitian_defect = std::max(
          rep.hermitian_defect, std::abs(f.eval(-u) - std::conj(fu)));
    }
  }
  if (rep.increment_margin < 0) rep.increment_margin = 0;

  if (!std::isfinite(rep.min_density))
    throw InputError("pd validation: group has no axis to reconstruct a density on");
  rep.violated = rep.min_density < -1e-9;
  return rep;
}

}  // namespace darmois
