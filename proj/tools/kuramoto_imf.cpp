// kuramoto-imf: network dynamics and iterative mean-field spectra.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "kuramoto/errors.hpp"
#include "kuramoto/experiments.hpp"
#include "kuramoto/io.hpp"

namespace fs = std::filesystem;
using namespace kuramoto;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out = "out";
  bool plot = false;
};

Scenario load_scenario(const Globals& g) {
  Scenario s = g.config.empty() ? Scenario{} : scenario_from_json(load_config(g.config));
  if (g.seed) s.base.seed = *g.seed;
  s.validate();
  return s;
}

void report(const OutputBundle& b, const std::vector<fs::path>& files) {
  std::cout << b.summary.dump(2) << '\n';
  for (const auto& f : files) std::cerr << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disordered Kuramoto networks: network dynamics vs iterative mean-field spectra"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "run config (JSON, or any emitted .csv to re-run it)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--threads", g.threads, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--plot", g.plot, "also write SVG plots");

  auto* nd = app.add_subcommand("nd", "simulate the network and write its spectra");
  std::string disorder_in, disorder_out, trajectory_out;
  nd->add_option("--disorder", disorder_in, "load the disorder realization from a file")->check(CLI::ExistingFile);
  nd->add_option("--save-disorder", disorder_out, "save the sampled disorder realization");
  nd->add_option("--trajectory", trajectory_out, "write the recorded trajectory (binary, time-major)");

  auto* imf = app.add_subcommand("imf", "iterate the mean-field noise spectrum to self-consistency");
  auto* compare = app.add_subcommand("compare", "run both methods and compare their spectra");
  auto* sweep = app.add_subcommand("order-sweep", "time-averaged order parameter over a parameter sweep");
  auto* surrogate = app.add_subcommand("surrogate-check", "round trip of the surrogate noise generator");
  auto* kubo = app.add_subcommand("kubo-check", "uncoupled noisy oscillators against the analytic spectrum");

  CLI11_PARSE(app, argc, argv);

  if (g.threads > 0) omp_set_num_threads(g.threads);

  try {
    const Scenario s = load_scenario(g);
    const fs::path out = g.out;
    OutputBundle b;
    if (nd->parsed()) {
      auto opt = [](const std::string& p) { return p.empty() ? std::optional<fs::path>{} : fs::path(p); };
      b = bundle(s, run_network(s, opt(disorder_in), opt(disorder_out), opt(trajectory_out)));
    } else if (imf->parsed()) {
      b = bundle(s, run_imf(s));
    } else if (compare->parsed()) {
      b = bundle(s, run_comparison(s));
    } else if (sweep->parsed()) {
      b = bundle(s, run_order_sweep(s));
    } else if (surrogate->parsed()) {
      b = bundle(s, run_surrogate_check(s));
    } else if (kubo->parsed()) {
      b = bundle(s, run_kubo_check(s));
    }
    report(b, emit_outputs(s, b, out, g.plot));
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
