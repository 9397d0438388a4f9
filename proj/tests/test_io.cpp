#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "darmois/construct.hpp"
#include "darmois/errors.hpp"
#include "darmois/io.hpp"
#include "doctest.h"

using namespace darmois;
using darmois::io::json;

namespace {

LcaGroup mixed_group() {
  return LcaGroup({real_factor(), circle_factor(), cyclic_factor(6), integers_factor()});
}

Eigen::MatrixXd scalar(double v) {
  Eigen::MatrixXd q(1, 1);
  q << v;
  return q;
}

}  // namespace

TEST_CASE("groups round-trip through JSON") {
  const LcaGroup g = mixed_group();
  CHECK(io::group_from_json(io::to_json(g)) == g);
  CHECK_THROWS_AS(io::group_from_json(json{{"factors", {{{"kind", "torus"}}}}}),
                  InputError);
  CHECK_THROWS_AS(io::group_from_json(json{{"factors", {{{"kind", "cyclic"}}}}}),
                  InputError);  // cyclic needs n
  CHECK_THROWS_AS(io::group_from_json(json::object()), InputError);
}

TEST_CASE("automorphisms round-trip and default missing blocks to the identity") {
  const LcaGroup g = mixed_group();
  Automorphism a = Automorphism::identity(g);
  a.alpha(0, 0) = -2.0;
  a.cross[0](0) = 0.7;  // circle cross vector
  a.signs = {-1, 1};
  a.units = {5};
  a.validate();
  const Automorphism back = io::automorphism_from_json(io::to_json(a), g);
  CHECK(back.approx_equal(a));

  const Automorphism dflt = io::automorphism_from_json(json::object(), g);
  CHECK(dflt.approx_equal(Automorphism::identity(g)));

  // a flat cross vector is accepted when there is exactly one cross slot
  const LcaGroup rt({real_factor(), circle_factor()});
  const Automorphism flat = io::automorphism_from_json(
      json{{"v", {0.25}}, {"signs", {-1}}}, rt);
  CHECK(flat.cross[0](0) == 0.25);
  CHECK(flat.signs[0] == -1);

  CHECK_THROWS_AS(io::automorphism_from_json(json{{"units", {2}}}, g),
                  InputError);  // gcd(2, 6) != 1
  CHECK_THROWS_AS(io::automorphism_from_json(json{{"signs", {3, 1}}}, g),
                  InputError);
}

TEST_CASE("closed characteristic functions round-trip with evaluations intact") {
  const LcaGroup g({real_factor(), circle_factor()});
  Eigen::MatrixXd q(2, 2);
  q << 0.5, 0.1, 0.1, 0.9;
  Element x0(g);
  x0.set_x(0, 1.5);
  x0.set_x(1, 2.2);
  const CharFn f =
      convolve(gaussian_charfn(g, x0, q), signed_pi_charfn(g, 0.2, 1));
  const json j = io::to_json(f);
  CHECK(j.at("kind") == "closed");
  CHECK(j.at("kappa").get<double>() == doctest::Approx(0.2));
  const CharFn back = io::charfn_from_json(j);
  REQUIRE(back.is_closed());
  const LcaGroup y = g.dual();
  for (double s : {-1.0, 0.5}) {
    for (std::int64_t n = -3; n <= 3; ++n) {
      Element yy(y);
      yy.set_x(0, s);
      yy.set_k(1, n);
      CHECK(std::abs(back.eval(yy) - f.eval(yy)) < 1e-15);
    }
  }
  // kappa null means no two-point factor
  json plain = j;
  plain["kappa"] = nullptr;
  plain["which"] = nullptr;
  CHECK_FALSE(io::charfn_from_json(plain).pi().has_value());
}

TEST_CASE("tabulated characteristic functions round-trip on their grid") {
  const LcaGroup g({circle_factor()});
  const CharFn closed =
      gaussian_charfn(g, Element::zero(g), scalar(0.8));
  auto lat = std::make_shared<DualLattice>(DualLattice::symmetric(g.dual(), 5));
  std::vector<std::complex<double>> vals(lat->size());
  for (std::size_t i = 0; i < lat->size(); ++i)
    vals[i] = closed.eval(lat->element_at(i));
  const CharFn t = CharFn::tabulated(lat, vals);
  const json j = io::to_json(t);
  CHECK(j.at("kind") == "tabulated");
  const CharFn back = io::charfn_from_json(j);
  REQUIRE_FALSE(back.is_closed());
  CHECK(back.lattice_ptr()->size() == lat->size());
  for (std::size_t i = 0; i < lat->size(); ++i)
    CHECK(std::abs(back.values()[i] - vals[i]) < 1e-16);
  CHECK_THROWS_AS(io::charfn_from_json(json{{"kind", "mystery"}}), InputError);
}

TEST_CASE("equation instances round-trip with coefficients") {
  const LcaGroup g({circle_factor()});
  const CharFn mu1 =
      convolve(gaussian_charfn(g, Element::zero(g), scalar(1.0)),
               signed_pi_charfn(g, 0.1, 1));
  const CharFn mu2 =
      convolve(gaussian_charfn(g, Element::zero(g), scalar(1.0)),
               signed_pi_charfn(g, 0.1, 2));
  SdInstance inst;
  inst.group = g;
  inst.components = {mu1, mu2};
  inst.betas = {Automorphism::identity(g), Automorphism::inversion(g)};
  const SdInstance back = io::instance_from_json(io::instance_to_json(inst));
  CHECK(back.group == g);
  REQUIRE(back.components.size() == 2);
  REQUIRE(back.betas.size() == 2);
  CHECK(back.alphas.empty());
  CHECK(back.betas[1].approx_equal(inst.betas[1]));
  const DualLattice lat = instance_lattice(back, GridSpec{8, 0, 0.0});
  CHECK(sd_residual(back, lat, 1e-12).pass);
}

TEST_CASE("pair parameters round-trip and default delta to inversion") {
  PairParams p;
  p.a = 1;
  Eigen::MatrixXd q(2, 2);
  q << 0.6, 0.1, 0.1, 0.8;
  p.Q1 = q;
  p.Q2 = q;
  p.kappa = 0.12;
  const LcaGroup g = p.group();
  p.x1 = Element::zero(g);
  p.x2 = Element::zero(g);
  p.x1.set_x(0, 0.3);
  p.delta = Automorphism::inversion(g);
  const PairParams back = io::params_from_json(io::params_to_json(p));
  CHECK(back.a == 1);
  CHECK((back.Q1 - q).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.kappa == 0.12);
  CHECK(back.x1.x(0) == doctest::Approx(0.3));
  CHECK(back.delta.approx_equal(p.delta));

  json j = io::params_to_json(p);
  j.erase("delta");
  CHECK(io::params_from_json(j).delta.approx_equal(Automorphism::inversion(g)));
  j.erase("kappa");
  CHECK_THROWS_AS(io::params_from_json(j), InputError);
}

TEST_CASE("finite jobs round-trip with mode strings") {
  FiniteInstance inst;
  inst.group = LcaGroup({cyclic_factor(5)});
  inst.delta = Automorphism::inversion(inst.group);
  inst.mode = SearchMode::Opt;
  inst.restarts = 17;
  inst.seed = 9;
  const FiniteInstance back =
      io::finite_instance_from_json(io::finite_instance_to_json(inst));
  CHECK(back.group == inst.group);
  CHECK(back.mode == SearchMode::Opt);
  CHECK(back.restarts == 17);
  CHECK(back.seed == 9);
  json j = io::finite_instance_to_json(inst);
  j["mode"] = "walk";
  CHECK_THROWS_AS(io::finite_instance_from_json(j), InputError);
}

TEST_CASE("solution records serialize to JSON and CSV tables") {
  FiniteInstance inst;
  inst.group = LcaGroup({cyclic_factor(3)});
  inst.delta = Automorphism::inversion(inst.group);
  SolutionRecord rec;
  rec.p1 = {1.0, 0.0, 0.0};
  rec.p2 = {0.0, 1.0, 0.0};
  rec.residual = 0.0;
  rec.classification = SolutionClass::Degenerate;
  const json j = io::records_to_json(inst, {rec});
  CHECK(j.at("records").size() == 1);
  CHECK(j.at("records")[0].at("classification") == "degenerate");
  const std::string csv = io::records_to_csv(inst, {rec, rec});
  CHECK(csv.rfind("group,delta,residual,classification,distance,p1_0", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
}

TEST_CASE("sample tables carry one column per factor") {
  const LcaGroup g({real_factor(), circle_factor()});
  Element e(g);
  e.set_x(0, 1.25);
  e.set_x(1, 0.5);
  const std::string csv = io::samples_to_csv(g, {e, e});
  CHECK(csv.rfind("x0,x1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("1.25") != std::string::npos);
}

TEST_CASE("report serializers expose their verdict fields") {
  PdReport pd;
  pd.min_density = -0.5;
  pd.violated = true;
  CHECK(io::to_json(pd).at("violated").get<bool>());
  IndependenceReport ir;
  ir.consistent = false;
  CHECK(io::to_json(ir).at("verdict") == "rejected");
  ir.consistent = true;
  CHECK(io::to_json(ir).at("verdict") == "consistent");
  CosetDecomposition dec;
  dec.Q = Eigen::MatrixXd::Zero(1, 1);
  dec.odd_constant = -0.4;
  CHECK(io::to_json(dec).at("odd_constant").get<double>() == -0.4);
}

TEST_CASE("file helpers report the offending path") {
  const std::string dir = "/tmp/darmois_io_test";
  std::remove((dir + "/x.json").c_str());
  CHECK_THROWS_AS(io::load_json_file("/tmp/darmois_io_test_missing.json"),
                  InputError);
  const std::string bad = "/tmp/darmois_io_bad.json";
  {
    std::ofstream out(bad);
    out << "{ not json";
  }
  try {
    io::load_json_file(bad);
    FAIL("expected a parse failure");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find(bad) != std::string::npos);
  }
  const std::string good = "/tmp/darmois_io_good.json";
  io::save_json_file(good, json{{"k", 1}});
  CHECK(io::load_json_file(good).at("k") == 1);
  io::save_text_file("/tmp/darmois_io_good.txt", "hello\n");
}
