#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kuramoto/imf.hpp"
#include "kuramoto/io.hpp"
#include "kuramoto/params.hpp"
#include "kuramoto/spectral.hpp"
#include "kuramoto/svg_plot.hpp"

namespace kuramoto {

struct SweepSpec {
  std::string parameter;  // a numeric SimParams field, e.g. "mean_coupling" or "n_osc"
  std::vector<double> values;
};

struct Scenario {
  std::string name = "run";
  SimParams base;
  /// Pointer/noise recording step for both arms; 0 means the integration step.
  double sample_dt = 0.0;
  double smoothing_bin = kDefaultSmoothingBin;
  /// Pick the RK4 step by self-convergence before the network run.
  bool auto_dt = false;
  /// Replaces the sampled eigenfrequencies (length n_osc).
  std::optional<std::vector<double>> fixed_freqs;
  /// Number of oscillators whose pointers are recorded for the network
  /// average (evenly spaced indices); 0 records all.
  std::size_t record_count = 0;

  std::optional<ImfParams> imf;
  double imf_dt = 0.0;  // 0 means base.dt
  /// "flat" starts the iteration from a constant spectrum with the same
  /// total power as the Lorentzian default.
  bool imf_flat_start = false;

  std::optional<SweepSpec> sweep;
  std::size_t replicates = 1;  // R
  /// Oscillators whose single spectra are reported; empty picks the ones
  /// closest to -sigma, 0 and +sigma.
  std::vector<std::size_t> oscillators;
  std::size_t single_trials = 100;

  std::size_t draws = 200;   // surrogate-check periodograms
  double band = 10.0;        // kubo-check comparison band |omega| <= band

  std::vector<std::string> outputs = {"s_z", "s_zeta", "oscillators", "order", "history", "iterates", "check"};

  void validate() const;
  bool wants(const std::string& observable) const;
};

Scenario scenario_from_json(const nlohmann::json& config);
nlohmann::json scenario_to_json(const Scenario& scenario);

/// Sets a SimParams field by name; throws std::invalid_argument for names
/// that are not numeric SimParams fields.
void set_sim_field(SimParams& params, const std::string& name, double value);

/// Eigenfrequencies and couplings for replicate r of a scenario, with the
/// fixed frequency list applied.
SimParams replicate_params(const Scenario& scenario, std::size_t r);

struct OrderSweepRow {
  double value = 0.0;
  double mean_r = 0.0;
  double stderr_r = 0.0;
  std::size_t flagged = 0;  // replicates above the asynchronous guard
};
struct OrderSweepResult {
  std::string parameter;
  std::vector<OrderSweepRow> rows;
};

/// For each sweep value and replicate: sample disorder, integrate, average r
/// over the recorded window; mean and standard error over replicates.
OrderSweepResult run_order_sweep(const Scenario& scenario);

/// Asynchronous-state guard: time-averaged r above 3/sqrt(N) + 0.1.
bool is_synchronized(double mean_r, std::size_t n_osc);

struct NetworkResult {
  SimParams params;  // effective parameters (dt after auto selection)
  Spectrum s_z;      // network averaged pointer spectrum, smoothed, mean over replicates
  std::optional<Spectrum> s_zeta;
  std::vector<std::size_t> oscillators;
  std::vector<double> osc_freqs;
  std::vector<Spectrum> osc_spectra;  // smoothed, mean over replicates
  std::vector<double> mean_r;         // per replicate
  std::size_t flagged = 0;
  std::optional<double> noise_relation_distance;
};

NetworkResult run_network(const Scenario& scenario, const std::optional<std::filesystem::path>& disorder_in = {},
                          const std::optional<std::filesystem::path>& disorder_out = {},
                          const std::optional<std::filesystem::path>& trajectory_out = {});

struct ImfRunResult {
  SimParams params;
  ImfParams imf;
  ImfState state;
  Spectrum s_z;     // smoothed
  Spectrum s_zeta;  // smoothed
  std::vector<double> osc_freqs;
  std::vector<Spectrum> osc_spectra;
};

/// `freqs` fixes the IMF eigenfrequencies (overriding the scenario) and
/// `osc_freqs` lists the single-oscillator spectra to compute.
ImfRunResult run_imf(const Scenario& scenario, const std::optional<std::vector<double>>& freqs = {},
                     const std::vector<double>& osc_freqs = {});

struct ComparisonReport {
  NetworkResult nd;
  ImfRunResult imf;
  double s_z_distance = 0.0;
  std::vector<double> osc_distances;
  std::optional<double> s_zeta_distance;
};

/// replicates == 1: both arms share one disorder realization and the IMF
/// uses the realized eigenfrequencies. replicates > 1: ND ensemble against
/// an IMF with the fixed list (if any) or resampled frequencies.
ComparisonReport run_comparison(const Scenario& scenario);

struct KuboCheck {
  NetworkResult nd;
  Spectrum analytic;
  double distance = 0.0;
  double peak = 0.0;
};
/// Uncoupled identical oscillators under white noise against 2D/(D^2+w^2).
KuboCheck run_kubo_check(const Scenario& scenario);

struct SurrogateCheck {
  Spectrum target;
  Spectrum mean;    // averaged periodogram of generated noise
  Spectrum stderr_;  // bin-wise standard error
  double distance = 0.0;
  double max_z = 0.0;  // largest |mean - target| / stderr
};
/// Target is the scenario's IMF start spectrum on the native grid of
/// (window, sample_dt).
SurrogateCheck run_surrogate_check(const Scenario& scenario);

/// Tables and plots produced by one command plus a JSON summary.
struct OutputBundle {
  std::string command;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::pair<std::string, Table>> tables;  // (observable, table)
  std::vector<std::pair<std::string, PlotSpec>> plots;  // (file stem, plot)
};

OutputBundle bundle(const Scenario& s, const OrderSweepResult& r);
OutputBundle bundle(const Scenario& s, const NetworkResult& r);
OutputBundle bundle(const Scenario& s, const ImfRunResult& r);
OutputBundle bundle(const Scenario& s, const ComparisonReport& r);
OutputBundle bundle(const Scenario& s, const KuboCheck& r);
OutputBundle bundle(const Scenario& s, const SurrogateCheck& r);

/// Writes metadata.json (config, summary, version) and every table whose
/// observable is in scenario.outputs, plus SVG plots when requested.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_outputs(const Scenario& scenario, const OutputBundle& out,
                                                const std::filesystem::path& dir, bool plot);

}  // namespace kuramoto
