#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <omp.h>

#include "kuramoto/experiments.hpp"
#include "kuramoto/integrate.hpp"
#include "kuramoto/io.hpp"
#include "kuramoto/model.hpp"
#include "kuramoto/svg_plot.hpp"

using namespace kuramoto;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("kuramoto_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json small_config() {
  return json::parse(R"({
    "name": "small",
    "model": {"n_osc": 60, "mean_coupling": 0.5, "coupling_disorder": 1.0, "freq_spread": 1.0, "seed": 17},
    "integrate": {"dt": 0.02, "window": 40.0, "transient": 10.0, "sample_dt": 0.1},
    "imf": {"n_freqs": 60, "trials_per_freq": 2, "max_iters": 3, "dt": 0.02},
    "experiment": {"single_trials": 10}
  })");
}

}  // namespace

TEST_CASE("scenario config") {
  const Scenario s = scenario_from_json(small_config());
  CHECK(s.base.n_osc == 60);
  CHECK(s.base.seed == 17);
  CHECK(s.sample_dt == 0.1);
  REQUIRE(s.imf);
  CHECK(s.imf->trials_per_freq == 2);
  CHECK(s.imf_dt == 0.02);

  SUBCASE("round trip through JSON") {
    const json j = scenario_to_json(s);
    CHECK(scenario_to_json(scenario_from_json(j)) == j);
  }
  SUBCASE("unknown keys are rejected") {
    json j = small_config();
    j["model"]["coupling"] = 1.0;
    CHECK_THROWS_AS(scenario_from_json(j), std::invalid_argument);
  }
  SUBCASE("sweep parameter must be a SimParams field") {
    json j = small_config();
    j["experiment"]["sweep"] = {{"parameter", "temperature"}, {"values", {1.0}}};
    CHECK_THROWS_AS(scenario_from_json(j), std::invalid_argument);
    j["experiment"]["sweep"] = {{"parameter", "mean_coupling"}, {"values", {0.0, 1.0}}};
    CHECK_NOTHROW(scenario_from_json(j));
  }
  SUBCASE("invalid params surface") {
    json j = small_config();
    j["integrate"]["window"] = 40.013;
    CHECK_THROWS_AS(scenario_from_json(j), std::invalid_argument);
  }
}

TEST_CASE("sim fields by name") {
  SimParams p;
  set_sim_field(p, "mean_coupling", 2.5);
  set_sim_field(p, "n_osc", 64);
  set_sim_field(p, "D", 0.1);
  CHECK(p.mean_coupling == 2.5);
  CHECK(p.n_osc == 64);
  CHECK(p.noise_intensity == 0.1);
  CHECK_THROWS(set_sim_field(p, "n_osc", 2.5));
  CHECK_THROWS(set_sim_field(p, "seed", 1.0));
}

TEST_CASE("spectrum table round trip is exact") {
  const Spectrum a = smooth_spectrum(periodogram_grid(1000, 0.1), 3.0 * 2.0 * std::numbers::pi / 100.0);
  Spectrum b = a;
  for (std::size_t i = 0; i < b.size(); ++i) b.values[i] = std::exp(-0.1 * i) / 3.0;
  const fs::path dir = scratch_dir("table");
  const json cfg = scenario_to_json(scenario_from_json(small_config()));
  write_table(dir / "s.csv", spectrum_table("s", {{"first", a}, {"second", b}}), cfg);
  const TableFile f = read_table(dir / "s.csv");
  CHECK(f.config == cfg);
  const Spectrum back = spectrum_from_table(f, "second");
  CHECK(back.omega0 == b.omega0);
  CHECK(back.d_omega == b.d_omega);
  CHECK(back.values == b.values);
  CHECK(load_config(dir / "s.csv") == cfg);
  CHECK_THROWS(spectrum_from_table(f, "third"));
  CHECK_THROWS(read_table(dir / "missing.csv"));
}

TEST_CASE("trajectory round trip") {
  SimParams p;
  p.n_osc = 20;
  p.window = 5.0;
  p.transient = 1.0;
  RecordingRequest req;
  req.oscillators = std::vector<std::size_t>{2, 5};
  req.record_noise = true;
  req.record_order = true;
  const auto rec = simulate_network(p, sample_disorder(p), init_phases(p), req);
  const fs::path dir = scratch_dir("traj");
  write_trajectory(dir / "t.bin", rec, {{"seed", p.seed}});
  json header;
  const auto back = read_trajectory(dir / "t.bin", &header);
  CHECK(header["provenance"]["seed"] == p.seed);
  CHECK(back.n_samples == rec.n_samples);
  CHECK(back.oscillators == rec.oscillators);
  CHECK(back.pointers == rec.pointers);
  CHECK(back.noise == rec.noise);
  CHECK(back.order == rec.order);
  CHECK(back.start_time == rec.start_time);
}

TEST_CASE("svg rendering") {
  PlotSpec spec;
  spec.title = "a < b";
  spec.series.push_back({"line", {0, 1, 2}, {1, 3, 2}});
  const std::string svg = render_svg(spec);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("a &lt; b") != std::string::npos);
}

TEST_CASE("order parameter sweep") {
  Scenario s;
  s.base.n_osc = 1000;
  s.base.coupling_disorder = 0.0;
  s.base.dt = 0.05;
  s.base.window = 50.0;
  s.base.transient = 50.0;
  s.sample_dt = 0.5;
  s.replicates = 3;
  s.sweep = SweepSpec{"mean_coupling", {0.0, 5.0}};
  const auto r = run_order_sweep(s);
  REQUIRE(r.rows.size() == 2);
  const double inv_sqrt_n = 1.0 / std::sqrt(1000.0);
  CHECK(r.rows[0].mean_r > 0.5 * inv_sqrt_n);
  CHECK(r.rows[0].mean_r < 2.0 * inv_sqrt_n);
  CHECK(r.rows[0].flagged == 0);
  CHECK(r.rows[1].mean_r > 0.8);
  CHECK(r.rows[1].flagged == 3);
  CHECK(r.rows[0].stderr_r > 0.0);
  CHECK(is_synchronized(0.5, 100));
  CHECK_FALSE(is_synchronized(0.3, 100));
}

TEST_CASE("outputs") {
  const Scenario s = scenario_from_json(small_config());

  SUBCASE("empty observable list writes metadata only") {
    Scenario quiet = s;
    quiet.outputs.clear();
    const fs::path dir = scratch_dir("quiet");
    const auto files = emit_outputs(quiet, bundle(quiet, run_network(quiet)), dir, true);
    REQUIRE(files.size() == 1);
    CHECK(files[0].filename() == "metadata.json");
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
  }
  SUBCASE("same seed gives byte-identical files across thread counts") {
    const fs::path d1 = scratch_dir("det1"), d4 = scratch_dir("det4");
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto f1 = emit_outputs(s, bundle(s, run_comparison(s)), d1, true);
    omp_set_num_threads(4);
    const auto f4 = emit_outputs(s, bundle(s, run_comparison(s)), d4, true);
    omp_set_num_threads(saved);
    REQUIRE(f1.size() == f4.size());
    for (std::size_t i = 0; i < f1.size(); ++i) {
      INFO(f1[i].filename().string());
      CHECK(slurp(f1[i]) == slurp(f4[i]));
    }
  }
  SUBCASE("config extracted from an output reproduces it") {
    const fs::path d1 = scratch_dir("closure1"), d2 = scratch_dir("closure2");
    emit_outputs(s, bundle(s, run_imf(s)), d1, false);
    const Scenario again = scenario_from_json(load_config(d1 / "imf_s_z.csv"));
    emit_outputs(again, bundle(again, run_imf(again)), d2, false);
    for (const auto& e : fs::directory_iterator(d1)) {
      INFO(e.path().filename().string());
      CHECK(slurp(e.path()) == slurp(d2 / e.path().filename()));
    }
  }
}

TEST_CASE("comparison shares one disorder realization") {
  const Scenario s = scenario_from_json(small_config());
  const auto rep = run_comparison(s);
  CHECK(rep.imf.imf.n_freqs == 60);
  REQUIRE(rep.imf.imf.fixed_freqs);
  CHECK(*rep.imf.imf.fixed_freqs == sample_disorder(s.base).freqs);
  CHECK(rep.imf.osc_freqs == rep.nd.osc_freqs);
  CHECK(rep.osc_distances.size() == rep.nd.oscillators.size());
  CHECK(same_grid(rep.nd.s_z, rep.imf.s_z));
  CHECK(spectrum_integral(rep.nd.s_z) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("kubo and surrogate checks") {
  json j = small_config();
  j["model"]["noise_intensity"] = 0.5;
  j["integrate"]["integrator"] = "euler_maruyama";
  j["integrate"]["dt"] = 0.01;
  j["integrate"]["window"] = 100.0;
  j["integrate"]["sample_dt"] = 0.05;
  j["model"]["n_osc"] = 200;
  j["imf"]["n_freqs"] = 200;
  j["experiment"]["draws"] = 100;
  const Scenario s = scenario_from_json(j);
  const auto kubo = run_kubo_check(s);
  MESSAGE("kubo distance " << kubo.distance << " peak " << kubo.peak);
  CHECK(kubo.distance < 0.2);
  const auto sur = run_surrogate_check(s);
  CHECK(sur.distance < 0.1);
  CHECK(sur.max_z < 6.0);
}

#ifdef KURAMOTO_CLI
TEST_CASE("command line") {
  const fs::path dir = scratch_dir("cli");
  json j = small_config();
  j["experiment"]["sweep"] = {{"parameter", "mean_coupling"}, {"values", {0.0, 1.0}}};
  j["experiment"]["replicates"] = 2;
  j["experiment"]["draws"] = 20;
  {
    std::ofstream(dir / "cfg.json") << j.dump(2);
  }
  json kubo = small_config();
  kubo["model"]["noise_intensity"] = 0.5;
  kubo["integrate"]["integrator"] = "em";
  kubo["integrate"]["dt"] = 0.01;
  kubo["integrate"]["sample_dt"] = 0.05;
  {
    std::ofstream(dir / "kubo.json") << kubo.dump(2);
  }
  const std::string exe = KURAMOTO_CLI;
  auto run = [&](const std::string& args) {
    const std::string cmd = exe + " " + args + " > " + (dir / "log.txt").string() + " 2>&1";
    return std::system(cmd.c_str());
  };
  const std::string cfg = "--config " + (dir / "cfg.json").string();
  for (std::string sub : {"nd", "imf", "compare", "order-sweep", "surrogate-check"}) {
    INFO(sub);
    const fs::path out = dir / sub;
    CHECK(run(cfg + " --seed 3 --threads 2 --plot --out " + out.string() + " " + sub) == 0);
    CHECK(fs::exists(out / "metadata.json"));
    const json meta = json::parse(slurp(out / "metadata.json"));
    CHECK(meta["config"]["model"]["seed"] == 3);
    CHECK(meta["command"] == sub);
  }
  CHECK(run("--config " + (dir / "kubo.json").string() + " --out " + (dir / "kubo").string() + " kubo-check") == 0);
  CHECK(fs::exists(dir / "order-sweep" / "order_sweep.csv"));
  CHECK(fs::exists(dir / "compare" / "compare_s_z.svg"));

  {
    std::ofstream(dir / "single.json") << small_config().dump(2);
  }
  const std::string single = "--config " + (dir / "single.json").string();
  const fs::path nd2 = dir / "nd2";
  CHECK(run(single + " --out " + nd2.string() + " nd --save-disorder " + (dir / "d.bin").string() + " --trajectory " +
            (dir / "t.bin").string()) == 0);
  CHECK(load_disorder(dir / "d.bin").freqs == sample_disorder(scenario_from_json(small_config()).base).freqs);
  CHECK(run(cfg + " --out " + (dir / "rep").string() + " nd --trajectory " + (dir / "t2.bin").string()) != 0);
  CHECK(read_trajectory(dir / "t.bin").n_samples == 400);
  const fs::path nd3 = dir / "nd3";
  CHECK(run(single + " --out " + nd3.string() + " nd --disorder " + (dir / "d.bin").string()) == 0);
  CHECK(slurp(nd2 / "nd_s_z.csv") == slurp(nd3 / "nd_s_z.csv"));

  CHECK(run("--config " + (dir / "missing.json").string() + " nd") != 0);
  CHECK(run(cfg + " bogus") != 0);
  json bad = small_config();
  bad["integrate"]["dt"] = 5.0;
  {
    std::ofstream(dir / "bad.json") << bad.dump();
  }
  CHECK(run("--config " + (dir / "bad.json").string() + " --out " + (dir / "bad").string() + " nd") != 0);
}
#endif
