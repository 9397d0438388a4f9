#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "darmois/construct.hpp"
#include "darmois/errors.hpp"
#include "darmois/io.hpp"
#include "darmois/log.hpp"
#include "darmois/sampling.hpp"
#include "darmois/sd.hpp"
#include "darmois/solver.hpp"

namespace {

using darmois::io::json;

constexpr std::uint64_t kDefaultSeed = 424242;

struct Config {
  std::string input;
  std::string output;
  std::string plot_path;
  double tolerance = 1e-9;
  bool tolerance_given = false;
  std::uint64_t seed = kDefaultSeed;
  bool seed_given = false;
  std::int64_t grid_radius = 32;
  std::int64_t real_points = 33;
  double real_radius = 8.0;
  int threads = 1;
};

void emit(const Config& cfg, const json& j) {
  if (cfg.output.empty())
    std::cout << j.dump(2) << '\n';
  else
    darmois::io::save_json_file(cfg.output, j);
}

// per-point residual table: one coordinate column per dual factor
void write_plot_data(const std::string& path, const darmois::DualLattice& lattice,
                     const std::vector<double>& row_max) {
  std::ostringstream out;
  const auto& g = lattice.group();
  for (std::size_t i = 0; i < g.num_factors(); ++i) out << 'y' << i << ',';
  out << "residual\n";
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const darmois::Element e = lattice.element_at(i);
    for (std::size_t f = 0; f < g.num_factors(); ++f) {
      const darmois::FactorKind k = g.factor(f).kind;
      char buf[32];
      if (k == darmois::FactorKind::Real || k == darmois::FactorKind::Circle)
        std::snprintf(buf, sizeof buf, "%.17g", e.x(f));
      else
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(e.k(f)));
      out << buf << ',';
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", row_max[i]);
    out << buf << '\n';
  }
  darmois::io::save_text_file(path, out.str());
}

int cmd_verify(const Config& cfg) {
  const json j = darmois::io::load_json_file(cfg.input);
  const darmois::SdInstance inst = darmois::io::instance_from_json(j);
  const darmois::GridSpec spec{cfg.grid_radius, cfg.real_points, cfg.real_radius};
  const darmois::DualLattice lattice = darmois::instance_lattice(inst, spec);
  std::vector<double> row_max;
  const darmois::SdReport rep =
      darmois::sd_residual(inst, lattice, cfg.tolerance, cfg.threads,
                           cfg.plot_path.empty() ? nullptr : &row_max);
  if (!cfg.plot_path.empty()) write_plot_data(cfg.plot_path, lattice, row_max);
  emit(cfg, darmois::io::to_json(rep));
  return rep.pass ? 0 : 2;
}

int cmd_construct(const Config& cfg) {
  const json j = darmois::io::load_json_file(cfg.input);
  const darmois::PairParams params = darmois::io::params_from_json(j);
  const std::string prefix = cfg.output.empty() ? "pair" : cfg.output;
  const darmois::GridSpec spec{cfg.grid_radius, cfg.real_points, cfg.real_radius};
  try {
    const darmois::ConstructedPair pair =
        darmois::construct_pair(params, cfg.tolerance, spec);
    darmois::io::save_json_file(prefix + ".mu1.json", darmois::io::to_json(pair.mu1));
    darmois::io::save_json_file(prefix + ".mu2.json", darmois::io::to_json(pair.mu2));
    darmois::io::save_json_file(
        prefix + ".report.json",
        json{{"accepted", true},
             {"params", darmois::io::params_to_json(params)},
             {"pd1", darmois::io::to_json(pair.pd1)},
             {"pd2", darmois::io::to_json(pair.pd2)},
             {"equation", darmois::io::to_json(pair.verification)}});
    std::cout << prefix << ".mu1.json " << prefix << ".mu2.json " << prefix
              << ".report.json written\n";
    return 0;
  } catch (const darmois::PdRejection& e) {
    darmois::io::save_json_file(prefix + ".report.json",
                                json{{"accepted", false},
                                     {"component", e.component},
                                     {"pd", darmois::io::to_json(e.report)},
                                     {"reason", e.what()}});
    std::cerr << "darmois: " << e.what() << '\n';
    return 2;
  }
}

int cmd_solve(const Config& cfg) {
  const json j = darmois::io::load_json_file(cfg.input);
  darmois::FiniteInstance inst = darmois::io::finite_instance_from_json(j);
  if (cfg.seed_given) inst.seed = cfg.seed;
  if (cfg.tolerance_given) inst.tolerance = cfg.tolerance;
  const std::vector<darmois::SolutionRecord> recs = darmois::solve(inst);
  const std::string path = cfg.output.empty() ? "solutions.csv" : cfg.output;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    darmois::io::save_json_file(path, darmois::io::records_to_json(inst, recs));
  else
    darmois::io::save_text_file(path, darmois::io::records_to_csv(inst, recs));
  std::cout << recs.size() << " record(s) written to " << path << '\n';
  return 0;
}

darmois::Sampler sampler_from_json(const json& j, const Config& cfg) {
  darmois::Sampler s{darmois::io::charfn_from_json(
                         j.contains("target") ? j.at("target") : j),
                     kDefaultSeed, darmois::SampleMethod::ExactGaussian};
  if (j.contains("seed") && !j.at("seed").is_null())
    s.seed = j.at("seed").get<std::uint64_t>();
  if (cfg.seed_given) s.seed = cfg.seed;
  if (j.contains("method") && !j.at("method").is_null()) {
    const std::string m = j.at("method").get<std::string>();
    if (m == "exact-gaussian")
      s.method = darmois::SampleMethod::ExactGaussian;
    else if (m == "wrapped-gaussian")
      s.method = darmois::SampleMethod::WrappedGaussian;
    else if (m == "rejection-mixture")
      s.method = darmois::SampleMethod::RejectionMixture;
    else
      throw darmois::InputError("unknown sampling method \"" + m + "\"");
  }
  return s;
}

int cmd_sample(const Config& cfg) {
  const json j = darmois::io::load_json_file(cfg.input);
  if (j.contains("independence")) {
    const json& ji = j.at("independence");
    const darmois::Sampler mu1 = sampler_from_json(ji.at("mu1"), cfg);
    const darmois::Sampler mu2 = sampler_from_json(ji.at("mu2"), cfg);
    const darmois::LcaGroup& g = mu1.target.domain();
    const darmois::Automorphism delta =
        ji.contains("delta") ? darmois::io::automorphism_from_json(ji.at("delta"), g)
                             : darmois::Automorphism::inversion(g);
    const std::size_t n = ji.at("n_samples").get<std::size_t>();
    std::vector<darmois::Element> freqs;
    if (ji.contains("frequencies")) {
      const darmois::LcaGroup y = g.dual();
      for (const auto& row : ji.at("frequencies")) {
        darmois::Element e(y);
        for (std::size_t i = 0; i < y.num_factors(); ++i) {
          const darmois::FactorKind k = y.factor(i).kind;
          if (k == darmois::FactorKind::Real || k == darmois::FactorKind::Circle)
            e.set_x(i, row.at(i).get<double>());
          else
            e.set_k(i, row.at(i).get<std::int64_t>());
        }
        freqs.push_back(std::move(e));
      }
    }
    const double threshold =
        ji.contains("threshold") ? ji.at("threshold").get<double>() : 0.0;
    const darmois::IndependenceReport rep =
        darmois::independence_test(mu1, mu2, delta, n, std::move(freqs), threshold);
    emit(cfg, darmois::io::to_json(rep));
    return rep.consistent ? 0 : 2;
  }
  if (!j.contains("sampler"))
    throw darmois::InputError("sample job needs a \"sampler\" or \"independence\" object");
  const darmois::Sampler s = sampler_from_json(j.at("sampler"), cfg);
  const std::size_t count = j.at("count").get<std::size_t>();
  const darmois::SampleBatch batch = darmois::sample(s, count);
  const std::string path = cfg.output.empty() ? "samples.csv" : cfg.output;
  darmois::io::save_text_file(
      path, darmois::io::samples_to_csv(s.target.domain(), batch.samples));
  std::cout << batch.samples.size() << " sample(s) written to " << path
            << " (acceptance rate " << batch.acceptance_rate << ")\n";
  return 0;
}

int cmd_decompose(const Config& cfg) {
  const json j = darmois::io::load_json_file(cfg.input);
  const darmois::CharFn f =
      darmois::io::charfn_from_json(j.contains("charfn") ? j.at("charfn") : j);
  const double tol = cfg.tolerance_given ? cfg.tolerance : 1e-6;

  std::shared_ptr<const darmois::DualLattice> lat;
  std::vector<double> psi;
  if (f.is_closed()) {
    // psi = -log|f| in closed form (avoids underflow of |f| at large radius)
    const darmois::LcaGroup y = f.dual_domain();
    lat = std::make_shared<darmois::DualLattice>(darmois::DualLattice::symmetric(
        y, cfg.grid_radius, cfg.real_points, cfg.real_radius));
    psi.resize(lat->size());
    const Eigen::MatrixXd& q = f.Q();
    for (std::size_t i = 0; i < lat->size(); ++i) {
      const darmois::Element e = lat->element_at(i);
      const std::vector<double> c = e.lattice_coords();
      Eigen::Map<const Eigen::VectorXd> yv(c.data(),
                                           static_cast<Eigen::Index>(c.size()));
      double v = yv.dot(q * yv);
      if (f.pi()) {
        const std::int64_t n = static_cast<std::int64_t>(
            std::llround(c.at(f.pi_axis())));
        v -= f.pi_coeff() * (1.0 - ((n % 2 + 2) % 2 == 0 ? 1.0 : -1.0));
      }
      psi[i] = v;
    }
  } else {
    lat = f.lattice_ptr();
    psi.resize(lat->size());
    for (std::size_t i = 0; i < lat->size(); ++i) {
      const double mod = std::abs(f.values()[i]);
      if (!(mod > 0))
        throw darmois::MathError("decompose: transform vanishes on the lattice");
      psi[i] = -std::log(mod);
    }
  }
  const darmois::RealGrid grid(lat, std::move(psi));
  const darmois::CosetDecomposition dec = darmois::coset_decompose(grid, tol);
  emit(cfg, darmois::io::to_json(dec));
  return dec.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification and construction toolkit for distribution pairs on "
               "products of real, circle, and cyclic groups"};
  app.fallthrough();
  app.require_subcommand(1);

  Config cfg;
  app.add_option("--tolerance", cfg.tolerance, "residual tolerance (default 1e-9)");
  app.add_option("--seed", cfg.seed, "random seed (default 424242)");
  app.add_option("--grid-radius", cfg.grid_radius,
                 "dual-lattice radius on integer axes (default 32)");
  app.add_option("--real-points", cfg.real_points,
                 "points per real axis, odd (default 33)");
  app.add_option("--real-radius", cfg.real_radius, "real-axis radius (default 8)");
  app.add_option("--threads", cfg.threads, "internal parallelism cap (default 1)");
  app.add_option("--output,-o", cfg.output,
                 "output path (JSON report, CSV table, or prefix for construct)");
  app.add_option("--emit-plot-data", cfg.plot_path,
                 "write per-grid-point residual CSV to this path (verify only)");

  CLI::App* verify = app.add_subcommand(
      "verify", "evaluate the functional-equation residual of an instance JSON");
  CLI::App* construct = app.add_subcommand(
      "construct", "build and validate a distribution pair from params JSON");
  CLI::App* solve = app.add_subcommand(
      "solve", "brute-force all solution pairs on a finite group");
  CLI::App* sample = app.add_subcommand(
      "sample", "draw samples or run the empirical independence test");
  CLI::App* decompose = app.add_subcommand(
      "decompose", "split -log|f| into a quadratic form and a coset constant");
  for (CLI::App* sub : {verify, construct, solve, sample, decompose})
    sub->add_option("input", cfg.input, "input JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  cfg.tolerance_given = app.count("--tolerance") > 0;
  cfg.seed_given = app.count("--seed") > 0;

  try {
    if (app.got_subcommand(verify)) return cmd_verify(cfg);
    if (app.got_subcommand(construct)) return cmd_construct(cfg);
    if (app.got_subcommand(solve)) return cmd_solve(cfg);
    if (app.got_subcommand(sample)) return cmd_sample(cfg);
    if (app.got_subcommand(decompose)) return cmd_decompose(cfg);
  } catch (const darmois::InputError& e) {
    std::cerr << "darmois: " << e.what() << '\n';
    return 1;
  } catch (const darmois::MathError& e) {
    std::cerr << "darmois: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "darmois: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "darmois: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
