#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "slowsep/exact_oracle.hpp"
#include "slowsep/harness/config.hpp"
#include "slowsep/harness/experiment.hpp"

namespace {

using slowsep::harness::Kind;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--out", c.out, "output directory (overrides the config)");
  cmd->add_option("--threads", c.threads, "worker threads (SLOWSEP_THREADS overrides)")->check(CLI::PositiveNumber);
}

// Returns 0 when the environment does not set a thread count.
unsigned env_threads() {
  const char* v = std::getenv("SLOWSEP_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const long k = std::strtol(v, &end, 10);
  if (*end != '\0' || k < 1 || k > 4096) {
    throw std::runtime_error(std::string("SLOWSEP_THREADS must be a positive integer, got '") + v + "'");
  }
  return static_cast<unsigned>(k);
}

int run(const std::string& verb, const Common& c, const std::set<Kind>& allowed, bool dump_generator) {
  auto cfg = slowsep::harness::load_config(c.config);
  if (!allowed.empty() && !allowed.count(cfg.kind)) {
    std::cerr << "slowsep " << verb << ": experiment kind '" << slowsep::harness::to_string(cfg.kind)
              << "' is not handled by this verb\n";
    return 2;
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.output = *c.out;
  unsigned threads = c.threads;
  if (const unsigned t = env_threads()) threads = t;

  const auto cells = verb == "pde" ? slowsep::harness::run_pde_cells(cfg)
                                   : slowsep::harness::run_cells(cfg, threads);
  const int status = slowsep::harness::write_reports(cfg, cells, cfg.output);

  if (dump_generator) {
    for (int n : cfg.n) {
      for (double theta : cfg.theta) {
        const auto p = slowsep::make_parameters(n, theta, cfg.alpha, cfg.beta, cfg.rho);
        const auto q = slowsep::exact::build_generator(p);
        const auto label = "n" + std::to_string(n) + "_theta" + slowsep::harness::format_number(theta);
        std::ofstream gen(cfg.output / ("generator_" + label + ".txt"));
        slowsep::exact::write_triplets(q, gen);
        std::ofstream pi(cfg.output / ("stationary_" + label + ".txt"));
        slowsep::exact::write_distribution(slowsep::exact::stationary_distribution(q), pi);
      }
    }
  }

  for (const auto& cell : cells) {
    std::cout << (cell.passed() ? "PASS " : "FAIL ") << cell.label;
    if (cell.error) std::cout << "  error: " << *cell.error;
    std::cout << '\n';
    for (const auto& g : cell.gates) {
      if (!g.pass) {
        std::cout << "  failed " << g.statistic << ": estimate " << slowsep::harness::format_number(g.estimate)
                  << ", theory " << slowsep::harness::format_number(g.theory) << '\n';
      }
    }
  }
  std::cout << "reports written to " << cfg.output.string() << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exclusion process with slow reservoirs: exact, Monte Carlo and PDE experiments"};
  app.require_subcommand(1);

  Common exact_c, sim_c, pde_c, fluct_c, sweep_c;
  bool dump = false;
  auto* exact = app.add_subcommand("exact", "exact finite-state identities (exact-check)");
  add_common(exact, exact_c);
  exact->add_flag("--dump-generator", dump, "also write generator triplets and stationary laws");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo hydrodynamics / hydrostatics");
  add_common(sim, sim_c);
  auto* pde = app.add_subcommand("pde", "heat-equation solve for the configured regimes");
  add_common(pde, pde_c);
  auto* fl = app.add_subcommand("fluct", "fluctuation experiments");
  add_common(fl, fluct_c);
  auto* sweep = app.add_subcommand("sweep", "any experiment kind");
  add_common(sweep, sweep_c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*exact) return run("exact", exact_c, {Kind::ExactCheck}, dump);
    if (*sim) return run("simulate", sim_c, {Kind::Hydrodynamics, Kind::Hydrostatics}, false);
    if (*pde) return run("pde", pde_c, {Kind::Hydrodynamics, Kind::Hydrostatics}, false);
    if (*fl) {
      return run("fluct", fluct_c,
                 {Kind::QvCheck, Kind::Gaussianity, Kind::OuCovariance, Kind::ReplacementScaling}, false);
    }
    return run("sweep", sweep_c, {}, false);
  } catch (const slowsep::harness::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
