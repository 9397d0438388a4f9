#include "darmois/io.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "darmois/errors.hpp"

namespace darmois::io {
namespace {

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw InputError(std::string("missing field \"") + key + "\"");
  return *it;
}

double num(const json& j, const char* what) {
  if (!j.is_number()) throw InputError(std::string(what) + " must be a number");
  return j.get<double>();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array of rows");
  const auto nr = j.size();
  if (nr == 0) return Eigen::MatrixXd(0, 0);
  const auto nc = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
  for (std::size_t r = 0; r < nr; ++r) {
    if (!j[r].is_array() || j[r].size() != nc)
      throw InputError(std::string(what) + " rows must have equal length");
    for (std::size_t c = 0; c < nc; ++c) m(r, c) = num(j[r][c], what);
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] =
      num(j[i], what);
  return v;
}

Element element_from_json(const json& j, const LcaGroup& g, const char* what) {
  if (!j.is_array() || j.size() != g.num_factors())
    throw InputError(std::string(what) + " must have one coordinate per factor");
  Element e(g);
  for (std::size_t i = 0; i < g.num_factors(); ++i) {
    const FactorKind k = g.factor(i).kind;
    if (k == FactorKind::Real || k == FactorKind::Circle)
      e.set_x(i, num(j[i], what));
    else
      e.set_k(i, static_cast<std::int64_t>(std::llround(num(j[i], what))));
  }
  return e;
}

json element_to_json(const Element& e) {
  const LcaGroup& g = e.group();
  json a = json::array();
  for (std::size_t i = 0; i < g.num_factors(); ++i) {
    const FactorKind k = g.factor(i).kind;
    if (k == FactorKind::Real || k == FactorKind::Circle)
      a.push_back(e.x(i));
    else
      a.push_back(e.k(i));
  }
  return a;
}

// compact automorphism tag for CSV cells (finite groups carry only units)
std::string delta_tag(const Automorphism& a) {
  std::string s = "u=";
  for (std::size_t i = 0; i < a.units.size(); ++i) {
    if (i) s += '|';
    s += std::to_string(a.units[i]);
  }
  return a.units.empty() ? std::string("identity") : s;
}

}  // namespace

json to_json(const LcaGroup& g) {
  json factors = json::array();
  for (const auto& f : g.factors()) {
    json jf;
    switch (f.kind) {
      case FactorKind::Real: jf["kind"] = "real"; break;
      case FactorKind::Circle: jf["kind"] = "circle"; break;
      case FactorKind::Cyclic:
        jf["kind"] = "cyclic";
        jf["n"] = f.n;
        break;
      case FactorKind::Integers: jf["kind"] = "integers"; break;
    }
    factors.push_back(std::move(jf));
  }
  return json{{"factors", std::move(factors)}};
}

LcaGroup group_from_json(const json& j) {
  const json& factors = require(j, "factors");
  if (!factors.is_array()) throw InputError("\"factors\" must be an array");
  std::vector<Factor> fs;
  for (const auto& jf : factors) {
    const std::string kind = require(jf, "kind").get<std::string>();
    if (kind == "real")
      fs.push_back(real_factor());
    else if (kind == "circle")
      fs.push_back(circle_factor());
    else if (kind == "integers")
      fs.push_back(integers_factor());
    else if (kind == "cyclic")
      fs.push_back(cyclic_factor(
          static_cast<std::int64_t>(std::llround(num(require(jf, "n"), "n")))));
    else
      throw InputError("unknown factor kind \"" + kind + "\"");
  }
  return LcaGroup(std::move(fs));
}

json to_json(const Automorphism& a) {
  json j;
  j["alpha"] = matrix_to_json(a.alpha);
  if (a.cross.size() == 1) {
    j["v"] = vector_to_json(a.cross[0]);
  } else {
    json v = json::array();
    for (const auto& c : a.cross) v.push_back(vector_to_json(c));
    j["v"] = std::move(v);
  }
  j["signs"] = a.signs;
  j["units"] = a.units;
  return j;
}

Automorphism automorphism_from_json(const json& j, const LcaGroup& group) {
  Automorphism a = Automorphism::identity(group);
  if (auto it = j.find("alpha"); it != j.end()) {
    Eigen::MatrixXd m = matrix_from_json(*it, "\"alpha\"");
    if (m.size() == 0) m = Eigen::MatrixXd::Identity(a.alpha.rows(), a.alpha.cols());
    if (m.rows() != a.alpha.rows() || m.cols() != a.alpha.cols())
      throw InputError("\"alpha\" must be " + std::to_string(a.alpha.rows()) + "x" +
                       std::to_string(a.alpha.cols()));
    a.alpha = std::move(m);
  }
  if (auto it = j.find("v"); it != j.end() && !it->is_null()) {
    const json& v = *it;
    if (!v.is_array()) throw InputError("\"v\" must be an array");
    const bool flat = v.empty() || !v[0].is_array();
    if (flat) {
      if (a.cross.size() != 1 && !(v.empty() && a.cross.empty()))
        throw InputError("flat \"v\" needs exactly one circle or integers factor");
      if (a.cross.size() == 1) a.cross[0] = vector_from_json(v, "\"v\"");
    } else {
      if (v.size() != a.cross.size())
        throw InputError("\"v\" must have one vector per circle or integers factor");
      for (std::size_t i = 0; i < a.cross.size(); ++i)
        a.cross[i] = vector_from_json(v[i], "\"v\"");
    }
  }
  if (auto it = j.find("signs"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != a.signs.size())
      throw InputError("\"signs\" must have one entry per circle or integers factor");
    for (std::size_t i = 0; i < a.signs.size(); ++i)
      a.signs[i] = static_cast<int>(std::llround(num((*it)[i], "\"signs\"")));
  }
  if (auto it = j.find("units"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != a.units.size())
      throw InputError("\"units\" must have one entry per cyclic factor");
    for (std::size_t i = 0; i < a.units.size(); ++i)
      a.units[i] = static_cast<std::int64_t>(std::llround(num((*it)[i], "\"units\"")));
  }
  a.validate();
  return a;
}

json to_json(const CharFn& f) {
  json j;
  j["group"] = to_json(f.domain());
  if (f.is_closed()) {
    j["kind"] = "closed";
    j["shift"] = element_to_json(f.shift());
    j["Q"] = matrix_to_json(f.Q());
    if (f.pi()) {
      j["kappa"] = f.pi()->kappa;
      j["which"] = f.pi()->which;
    } else {
      j["kappa"] = nullptr;
      j["which"] = nullptr;
    }
    return j;
  }
  j["kind"] = "tabulated";
  json axes = json::array();
  for (const auto& ax : f.lattice_ptr()->axes()) {
    json ja;
    switch (ax.kind) {
      case FactorKind::Real:
        ja = {{"kind", "real"}, {"lo", ax.lo}, {"hi", ax.hi}, {"step", ax.step}};
        break;
      case FactorKind::Integers:
        ja = {{"kind", "integers"}, {"lo", ax.lo}, {"hi", ax.hi}};
        break;
      case FactorKind::Cyclic:
        ja = {{"kind", "cyclic"}, {"n", ax.modulus}};
        break;
      default:
        throw InputError("tabulated charfn: circle axes are not griddable");
    }
    axes.push_back(std::move(ja));
  }
  j["grid"] = std::move(axes);
  json vals = json::array();
  for (const auto& v : f.values()) vals.push_back(json::array({v.real(), v.imag()}));
  j["values"] = std::move(vals);
  return j;
}

CharFn charfn_from_json(const json& j) {
  const std::string kind = require(j, "kind").get<std::string>();
  const LcaGroup x_group = group_from_json(require(j, "group"));
  if (kind == "closed") {
    const Element shift = element_from_json(require(j, "shift"), x_group, "\"shift\"");
    const Eigen::MatrixXd q = matrix_from_json(require(j, "Q"), "\"Q\"");
    std::optional<SignedPi> pi;
    if (auto it = j.find("kappa"); it != j.end() && !it->is_null()) {
      SignedPi p;
      p.kappa = num(*it, "\"kappa\"");
      p.which = 1;
      if (auto wt = j.find("which"); wt != j.end() && !wt->is_null())
        p.which = static_cast<int>(std::llround(num(*wt, "\"which\"")));
      pi = p;
    }
    return CharFn::closed(x_group, shift, q, pi);
  }
  if (kind != "tabulated")
    throw InputError("charfn \"kind\" must be \"closed\" or \"tabulated\"");
  const LcaGroup y_group = x_group.dual();
  const json& grid = require(j, "grid");
  if (!grid.is_array() || grid.size() != y_group.num_factors())
    throw InputError("\"grid\" must have one axis per dual factor");
  std::vector<LatticeAxis> axes;
  for (const auto& ja : grid) {
    const std::string ak = require(ja, "kind").get<std::string>();
    LatticeAxis ax;
    if (ak == "real") {
      ax.kind = FactorKind::Real;
      ax.lo = static_cast<std::int64_t>(std::llround(num(require(ja, "lo"), "lo")));
      ax.hi = static_cast<std::int64_t>(std::llround(num(require(ja, "hi"), "hi")));
      ax.step = num(require(ja, "step"), "step");
    } else if (ak == "integers") {
      ax.kind = FactorKind::Integers;
      ax.lo = static_cast<std::int64_t>(std::llround(num(require(ja, "lo"), "lo")));
      ax.hi = static_cast<std::int64_t>(std::llround(num(require(ja, "hi"), "hi")));
    } else if (ak == "cyclic") {
      ax.kind = FactorKind::Cyclic;
      ax.modulus = static_cast<std::int64_t>(std::llround(num(require(ja, "n"), "n")));
      ax.lo = 0;
      ax.hi = ax.modulus - 1;
    } else {
      throw InputError("unknown grid axis kind \"" + ak + "\"");
    }
    axes.push_back(ax);
  }
  auto lat = std::make_shared<DualLattice>(y_group, std::move(axes));
  const json& vals = require(j, "values");
  if (!vals.is_array() || vals.size() != lat->size())
    throw InputError("\"values\" must have " + std::to_string(lat->size()) +
                     " entries (row-major, last axis fastest)");
  std::vector<std::complex<double>> values(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const json& v = vals[i];
    if (!v.is_array() || v.size() != 2)
      throw InputError("\"values\" entries must be [re, im] pairs");
    values[i] = {num(v[0], "values"), num(v[1], "values")};
  }
  return CharFn::tabulated(std::move(lat), std::move(values));
}

json to_json(const SdReport& r) {
  return json{{"max_residual", r.max_residual},
              {"mean_residual", r.mean_residual},
              {"grid", r.grid_desc},
              {"pass", r.pass},
              {"n_points", r.n_points},
              {"n_pairs", r.n_pairs},
              {"n_skipped", r.n_skipped},
              {"tolerance", r.tolerance},
              {"argmax_u", r.argmax_u},
              {"argmax_v", r.argmax_v}};
}

json to_json(const PdReport& r) {
  return json{{"min_density", r.min_density},
              {"grid_size", r.grid_size},
              {"violated", r.violated},
              {"max_abs", r.max_abs},
              {"unit_defect", r.unit_defect},
              {"hermitian_defect", r.hermitian_defect},
              {"increment_margin", r.increment_margin}};
}

json to_json(const CosetDecomposition& d) {
  return json{{"Q", matrix_to_json(d.Q)},
              {"even_constant", d.even_constant},
              {"odd_constant", d.odd_constant},
              {"max_residual", d.max_residual},
              {"tolerance", d.tolerance},
              {"pass", d.pass}};
}

json to_json(const IndependenceReport& r) {
  return json{{"statistic", r.statistic},
              {"n_samples", r.n_samples},
              {"threshold", r.threshold},
              {"verdict", r.consistent ? "consistent" : "rejected"},
              {"worst_u", r.worst_u},
              {"worst_v", r.worst_v},
              {"shards", r.shard_desc}};
}

json to_json(const ReductionTrace& t) {
  json j{{"circle_case", t.circle_case},
         {"L_trivial", t.L_trivial},
         {"L_dim", t.L_dim},
         {"L_basis", matrix_to_json(t.L_basis)},
         {"L", t.L_desc},
         {"H", t.H_desc},
         {"steps", t.steps}};
  return j;
}

json to_json(const CharacterizationReport& r) {
  return json{{"accepted", r.accepted},
              {"reason", r.reason},
              {"pd1", to_json(r.pd1)},
              {"pd2", to_json(r.pd2)},
              {"equation", to_json(r.equation)}};
}

json instance_to_json(const SdInstance& inst) {
  json components = json::array();
  for (const auto& c : inst.components) components.push_back(to_json(c));
  json alphas = json::array();
  for (const auto& a : inst.alphas) alphas.push_back(to_json(a));
  json betas = json::array();
  for (const auto& b : inst.betas) betas.push_back(to_json(b));
  return json{{"group", to_json(inst.group)},
              {"components", std::move(components)},
              {"alphas", std::move(alphas)},
              {"betas", std::move(betas)}};
}

SdInstance instance_from_json(const json& j) {
  SdInstance inst;
  inst.group = group_from_json(require(j, "group"));
  const json& comps = require(j, "components");
  if (!comps.is_array() || comps.empty())
    throw InputError("\"components\" must be a non-empty array");
  for (const auto& c : comps) {
    CharFn f = charfn_from_json(c);
    if (!(f.domain() == inst.group))
      throw InputError("component group does not match the instance group");
    inst.components.push_back(std::move(f));
  }
  auto parse_autos = [&](const char* key, std::vector<Automorphism>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    if (!it->is_array()) throw InputError(std::string("\"") + key + "\" must be an array");
    for (const auto& a : *it) out.push_back(automorphism_from_json(a, inst.group));
  };
  parse_autos("alphas", inst.alphas);
  parse_autos("betas", inst.betas);
  return inst;
}

json params_to_json(const PairParams& p) {
  return json{{"a", p.a},
              {"Q1", matrix_to_json(p.Q1)},
              {"Q2", matrix_to_json(p.Q2)},
              {"kappa", p.kappa},
              {"x1", element_to_json(p.x1)},
              {"x2", element_to_json(p.x2)},
              {"delta", to_json(p.delta)}};
}

PairParams params_from_json(const json& j) {
  PairParams p;
  p.a = static_cast<int>(std::llround(num(require(j, "a"), "\"a\"")));
  if (p.a < 0) throw InputError("\"a\" must be nonnegative");
  const LcaGroup g = pair_group(p.a);
  p.Q1 = matrix_from_json(require(j, "Q1"), "\"Q1\"");
  p.Q2 = matrix_from_json(require(j, "Q2"), "\"Q2\"");
  p.kappa = num(require(j, "kappa"), "\"kappa\"");
  p.x1 = element_from_json(require(j, "x1"), g, "\"x1\"");
  p.x2 = element_from_json(require(j, "x2"), g, "\"x2\"");
  p.delta = j.contains("delta") && !j["delta"].is_null()
                ? automorphism_from_json(j["delta"], g)
                : Automorphism::inversion(g);
  return p;
}

json finite_instance_to_json(const FiniteInstance& inst) {
  return json{{"group", to_json(inst.group)},
              {"delta", to_json(inst.delta)},
              {"mode", inst.mode == SearchMode::Grid ? "grid" : "opt"},
              {"tolerance", inst.tolerance},
              {"grid_step", inst.grid_step},
              {"restarts", inst.restarts},
              {"max_iters", inst.max_iters},
              {"seed", inst.seed},
              {"nonvanish_eps", inst.nonvanish_eps},
              {"dedup_eps", inst.dedup_eps}};
}

FiniteInstance finite_instance_from_json(const json& j) {
  FiniteInstance inst;
  inst.group = group_from_json(require(j, "group"));
  if (auto it = j.find("delta"); it != j.end() && !it->is_null())
    inst.delta = automorphism_from_json(*it, inst.group);
  else
    inst.delta = Automorphism::inversion(inst.group);
  if (auto it = j.find("mode"); it != j.end() && !it->is_null()) {
    const std::string m = it->get<std::string>();
    if (m == "grid")
      inst.mode = SearchMode::Grid;
    else if (m == "opt")
      inst.mode = SearchMode::Opt;
    else
      throw InputError("\"mode\" must be \"grid\" or \"opt\"");
  }
  auto opt_num = [&](const char* key, auto& field) {
    if (auto it = j.find(key); it != j.end() && !it->is_null())
      field = static_cast<std::remove_reference_t<decltype(field)>>(
          num(*it, key));
  };
  opt_num("tolerance", inst.tolerance);
  opt_num("grid_step", inst.grid_step);
  opt_num("restarts", inst.restarts);
  opt_num("max_iters", inst.max_iters);
  opt_num("nonvanish_eps", inst.nonvanish_eps);
  opt_num("dedup_eps", inst.dedup_eps);
  if (auto it = j.find("seed"); it != j.end() && !it->is_null())
    inst.seed = it->get<std::uint64_t>();
  return inst;
}

json records_to_json(const FiniteInstance& inst,
                     const std::vector<SolutionRecord>& recs) {
  json rows = json::array();
  for (const auto& r : recs)
    rows.push_back(json{{"p1", r.p1},
                        {"p2", r.p2},
                        {"residual", r.residual},
                        {"classification", to_string(r.classification)},
                        {"distance_to_nearest_degenerate",
                         r.distance_to_nearest_degenerate}});
  return json{{"group", to_json(inst.group)},
              {"delta", to_json(inst.delta)},
              {"records", std::move(rows)}};
}

std::string records_to_csv(const FiniteInstance& inst,
                           const std::vector<SolutionRecord>& recs) {
  const std::size_t n = std::size_t(inst.group.order());
  std::ostringstream out;
  out << "group,delta,residual,classification,distance";
  for (std::size_t i = 0; i < n; ++i) out << ",p1_" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",p2_" << i;
  out << '\n';
  for (const auto& r : recs) {
    out << inst.group.to_string() << ',' << delta_tag(inst.delta) << ','
        << fmt(r.residual) << ',' << to_string(r.classification) << ','
        << fmt(r.distance_to_nearest_degenerate);
    for (const auto& v : r.p1) out << ',' << fmt(v);
    for (const auto& v : r.p2) out << ',' << fmt(v);
    out << '\n';
  }
  return out.str();
}

std::string samples_to_csv(const LcaGroup& g, const std::vector<Element>& samples) {
  std::ostringstream out;
  for (std::size_t i = 0; i < g.num_factors(); ++i) {
    if (i) out << ',';
    out << 'x' << i;
  }
  out << '\n';
  for (const auto& e : samples) {
    for (std::size_t i = 0; i < g.num_factors(); ++i) {
      if (i) out << ',';
      const FactorKind k = g.factor(i).kind;
      if (k == FactorKind::Real || k == FactorKind::Circle)
        out << fmt(e.x(i));
      else
        out << e.k(i);
    }
    out << '\n';
  }
  return out.str();
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON in " + path + ": " + e.what());
  }
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out.is_open()) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw InputError("write failed for " + path);
}

void save_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out.is_open()) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed for " + path);
}

}  // namespace darmois::io
