#include "darmois/construct.hpp"

#include <cmath>
#include <sstream>

#include "darmois/errors.hpp"
#include "darmois/log.hpp"

namespace darmois {

LcaGroup pair_group(int a) {
  if (a < 0) throw InputError("pair parameters: negative real dimension");
  std::vector<Factor> fs(static_cast<std::size_t>(a), real_factor());
  fs.push_back(circle_factor());
  return LcaGroup(std::move(fs));
}

LcaGroup PairParams::group() const { return pair_group(a); }

void PairParams::validate() const {
  const LcaGroup g = group();
  const auto dim = static_cast<Eigen::Index>(a) + 1;
  if (Q1.rows() != dim || Q1.cols() != dim || Q2.rows() != dim || Q2.cols() != dim)
    throw InputError("pair parameters: quadratic forms must be (a+1) x (a+1)");
  if (x1.group() != g || x2.group() != g)
    throw InputError("pair parameters: shifts live in the wrong group");
  if (delta.group != g)
    throw InputError("pair parameters: coefficient automorphism acts on the wrong group");
  delta.validate();
  if (delta.signs.at(0) == 1 && kappa != 0.0)
    throw InputError(
        "pair parameters: a signed two-point component requires the circle "
        "inversion case");
}

namespace {

// sign of delta on the first circle factor, 0 if none
int circle_sign(const Automorphism& delta) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < delta.group.num_factors(); ++i) {
    const FactorKind k = delta.group.factor(i).kind;
    if (k == FactorKind::Circle) return delta.signs[c];
    if (k == FactorKind::Integers) ++c;  // shares the sign index space
  }
  return 0;
}

}  // namespace

ConstructedPair construct_pair(const PairParams& params, double tolerance,
                               const GridSpec& spec) {
  params.validate();
  const LcaGroup x_group = params.group();

  auto component = [&](const Element& shift, const Eigen::MatrixXd& q, int which) {
    CharFn gauss = gaussian_charfn(x_group, shift, q);
    if (params.kappa == 0.0) return gauss;
    return convolve(gauss, signed_pi_charfn(x_group, params.kappa, which));
  };
  CharFn mu1 = component(params.x1, params.Q1, 1);
  CharFn mu2 = component(params.x2, params.Q2, 2);

  PdReport pd1 = validate_positive_definite(mu1);
  if (pd1.violated) throw PdRejection(1, pd1);
  PdReport pd2 = validate_positive_definite(mu2);
  if (pd2.violated) throw PdRejection(2, pd2);

  SdInstance inst;
  inst.group = x_group;
  inst.components = {mu1, mu2};
  inst.alphas = {Automorphism::identity(x_group), Automorphism::identity(x_group)};
  inst.betas = {Automorphism::identity(x_group), params.delta};
  SdReport ver = sd_residual(inst, spec, tolerance);
  if (!ver.pass)
    throw MathError("constructed pair fails the functional equation (max residual " +
                    std::to_string(ver.max_residual) + ")");
  log_debug("construct_pair: max residual " + std::to_string(ver.max_residual));
  return ConstructedPair{std::move(mu1), std::move(mu2), pd1, pd2, std::move(ver)};
}

ReductionTrace reduce(const LcaGroup& x_group, const Automorphism& delta) {
  if (delta.group != x_group)
    throw InputError("reduce: automorphism acts on the wrong group");
  delta.validate();

  ReductionTrace tr;
  const LcaGroup y_group = x_group.dual();
  const Automorphism eps = delta.adjoint();
  tr.steps.push_back("dual group: " + y_group.to_string());

  const auto b = static_cast<Eigen::Index>(x_group.real_dims());
  if (b > 0) {
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(b, b) - eps.alpha;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(1e-10);
    tr.L_dim = static_cast<int>(b - lu.rank());
    tr.L_trivial = tr.L_dim == 0;
    if (tr.L_trivial)
      tr.L_basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(b), 0);
    else
      tr.L_basis = lu.kernel();
  } else {
    tr.L_dim = 0;
    tr.L_trivial = true;
    tr.L_basis = Eigen::MatrixXd::Zero(0, 0);
  }
  {
    std::ostringstream os;
    os << "L = Ker(I - eps) on the real block: dimension " << tr.L_dim
       << (tr.L_trivial ? " (trivial, I - alpha invertible)" : "");
    tr.L_desc = os.str();
    tr.steps.push_back(tr.L_desc);
  }

  tr.circle_case = circle_sign(delta);
  if (tr.circle_case == 1)
    tr.steps.push_back("circle factor fixed by delta (identity case)");
  else if (tr.circle_case == -1)
    tr.steps.push_back("circle factor inverted by delta");
  else
    tr.steps.push_back("no circle factor");

  if (tr.circle_case == -1 && tr.L_trivial) {
    tr.H = Subgroup::doubled(y_group);
    tr.H_desc = "H = (I - eps)Y = " + tr.H->to_string();
    tr.steps.push_back(
        "inversion with trivial kernel: the image subgroup is the doubled dual");
  } else {
    tr.H_desc = "H = (I - eps)Y";
    if (!tr.L_trivial)
      tr.steps.push_back("nontrivial kernel: the real image is a proper subspace");
  }
  tr.steps.push_back(tr.H_desc);
  return tr;
}

CharacterizationReport verify_characterization(const CharFn& mu1, const CharFn& mu2,
                                               const Automorphism& delta,
                                               double tolerance,
                                               const GridSpec& spec) {
  CharacterizationReport rep;
  if (mu1.domain() != mu2.domain())
    throw InputError("characterization: components live on different groups");
  const LcaGroup x_group = mu1.domain();
  if (delta.group != x_group)
    throw InputError("characterization: automorphism acts on the wrong group");
  delta.validate();

  rep.pd1 = validate_positive_definite(mu1);
  rep.pd2 = validate_positive_definite(mu2);
  if (rep.pd1.violated || rep.pd2.violated) {
    rep.reason = rep.pd1.violated ? "component 1 reconstructed density goes negative"
                                  : "component 2 reconstructed density goes negative";
    SdInstance inst;
    inst.group = x_group;
    inst.components = {mu1, mu2};
    inst.betas = {Automorphism::identity(x_group), delta};
    rep.equation = sd_residual(inst, spec, tolerance);
    return rep;
  }

  const int sign = circle_sign(delta);
  if (mu1.is_closed() && mu2.is_closed()) {
    const double c1 = mu1.pi_coeff(), c2 = mu2.pi_coeff();
    if (std::abs(c1 + c2) > 1e-12) {
      rep.reason = "signed components are not opposite";
      SdInstance inst;
      inst.group = x_group;
      inst.components = {mu1, mu2};
      inst.betas = {Automorphism::identity(x_group), delta};
      rep.equation = sd_residual(inst, spec, tolerance);
      return rep;
    }
    if (sign == 1 && c1 != 0.0) {
      rep.reason = "fixed circle factor forces a plain Gaussian pair";
      SdInstance inst;
      inst.group = x_group;
      inst.components = {mu1, mu2};
      inst.betas = {Automorphism::identity(x_group), delta};
      rep.equation = sd_residual(inst, spec, tolerance);
      return rep;
    }
    if (sign == -1 && x_group.circle_dims() == 1) {
      const auto nn = static_cast<Eigen::Index>(x_group.real_dims());
      if (mu1.Q().rows() > nn && mu2.Q().rows() > nn &&
          std::abs(mu1.Q()(nn, nn) - mu2.Q()(nn, nn)) > 1e-12) {
        rep.reason = "circle-coordinate quadratic coefficients differ";
        SdInstance inst;
        inst.group = x_group;
        inst.components = {mu1, mu2};
        inst.betas = {Automorphism::identity(x_group), delta};
        rep.equation = sd_residual(inst, spec, tolerance);
        return rep;
      }
    }
  }

  SdInstance inst;
  inst.group = x_group;
  inst.components = {mu1, mu2};
  inst.betas = {Automorphism::identity(x_group), delta};
  rep.equation = sd_residual(inst, spec, tolerance);
  if (!rep.equation.pass) {
    std::ostringstream os;
    os << "functional equation residual " << rep.equation.max_residual
       << " above tolerance at u = (";
    for (std::size_t i = 0; i < rep.equation.argmax_u.size(); ++i)
      os << (i ? ", " : "") << rep.equation.argmax_u[i];
    os << "), v = (";
    for (std::size_t i = 0; i < rep.equation.argmax_v.size(); ++i)
      os << (i ? ", " : "") << rep.equation.argmax_v[i];
    os << ")";
    rep.reason = os.str();
    return rep;
  }
  rep.accepted = true;
  return rep;
}

}  // namespace darmois
