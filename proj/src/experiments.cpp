#include "kuramoto/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>

#include "kuramoto/errors.hpp"
#include "kuramoto/integrate.hpp"
#include "kuramoto/kernels.hpp"
#include "kuramoto/model.hpp"
#include "kuramoto/rng.hpp"
#include "kuramoto/surrogate.hpp"

namespace kuramoto {
namespace {

using nlohmann::json;

void check_keys(const json& table, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!table.is_object()) throw std::invalid_argument("config: '" + where + "' must be a table");
  for (const auto& [key, _] : table.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw std::invalid_argument("config: unknown key '" + where + "." + key + "'");
    }
  }
}

template <typename T>
void read_opt(const json& table, const char* key, T& target) {
  if (table.contains(key)) target = table.at(key).get<T>();
}

Spectrum smoothed(const Spectrum& s, double bin) {
  if (bin <= s.d_omega * (1.0 + 1e-9)) return s;
  return smooth_spectrum(s, bin);
}

/// Running sum of spectra in a fixed order.
void add_into(std::optional<Spectrum>& acc, const Spectrum& s) {
  if (!acc) {
    acc = s;
    return;
  }
  require_same_grid(*acc, s);
  for (std::size_t i = 0; i < s.size(); ++i) acc->values[i] += s.values[i];
}

double recording_step(const Scenario& s, double dt) { return s.sample_dt > 0.0 ? s.sample_dt : dt; }

std::vector<std::size_t> default_oscillators(const std::vector<double>& freqs, double sigma) {
  std::vector<std::size_t> out;
  if (freqs.size() <= 3) {
    for (std::size_t l = 0; l < freqs.size(); ++l) out.push_back(l);
    return out;
  }
  if (!(sigma > 0.0)) return {0, 1, 2};
  for (double target : {-sigma, 0.0, sigma}) {
    std::size_t best = 0;
    for (std::size_t l = 1; l < freqs.size(); ++l) {
      if (std::abs(freqs[l] - target) < std::abs(freqs[best] - target)) best = l;
    }
    if (std::find(out.begin(), out.end(), best) == out.end()) out.push_back(best);
  }
  return out;
}

DisorderRealization realized_disorder(const Scenario& s, std::size_t r) {
  const SimParams p = replicate_params(s, r);
  DisorderRealization d = sample_disorder(p);
  if (s.fixed_freqs) d.freqs = *s.fixed_freqs;
  return d;
}

std::vector<std::size_t> chosen_oscillators(const Scenario& s, const std::vector<double>& freqs) {
  if (!s.oscillators.empty()) {
    for (auto l : s.oscillators) {
      if (l >= freqs.size()) throw std::invalid_argument("experiment.oscillators: index out of range");
    }
    return s.oscillators;
  }
  return default_oscillators(freqs, s.base.freq_spread);
}

SimParams imf_sim_params(const Scenario& s) {
  SimParams p = s.base;
  if (s.imf_dt > 0.0) p.dt = s.imf_dt;
  p.integrator = Integrator::EulerMaruyama;
  return p;
}

ImfParams imf_params(const Scenario& s, const SimParams& p) {
  ImfParams ip = s.imf ? *s.imf : ImfParams{};
  if (!s.imf) ip.n_freqs = s.base.n_osc;
  ip.sample_dt = recording_step(s, p.dt);
  ip.smoothing_bin = s.smoothing_bin;
  ip.keep_iterates = s.wants("iterates");
  if (s.fixed_freqs && s.fixed_freqs->size() == ip.n_freqs) ip.fixed_freqs = s.fixed_freqs;
  if (s.imf_flat_start) {
    const std::size_t n_rec = checked_ratio(p.window, ip.sample_dt, "window");
    Spectrum flat = periodogram_grid(n_rec, ip.sample_dt);
    const auto* lor = std::get_if<LorentzianSpectrum>(&ip.init_spectrum);
    const double power = spectrum_integral(analytic_spectrum(lor ? *lor : LorentzianSpectrum{}, flat));
    const double level = power * 2.0 * std::numbers::pi / (static_cast<double>(n_rec) * flat.d_omega);
    std::fill(flat.values.begin(), flat.values.end(), level);
    ip.init_spectrum = flat;
  }
  return ip;
}

json params_json(const SimParams& p) {
  return {{"n_osc", p.n_osc},
          {"mean_coupling", p.mean_coupling},
          {"coupling_disorder", p.coupling_disorder},
          {"freq_spread", p.freq_spread},
          {"noise_intensity", p.noise_intensity},
          {"dt", p.dt},
          {"window", p.window},
          {"transient", p.transient},
          {"seed", p.seed},
          {"integrator", std::string(to_string(p.integrator))}};
}

PlotSpec spectrum_plot(const std::string& title, const Table& t, const std::string& ylabel) {
  PlotSpec plot;
  plot.title = title;
  plot.xlabel = "omega";
  plot.ylabel = ylabel;
  for (std::size_t c = 1; c < t.columns.size(); ++c) {
    PlotSeries s{t.columns[c], t.data[0], t.data[c]};
    s.dashed = t.columns[c].rfind("nd", 0) == 0 || t.columns[c] == "analytic" || t.columns[c] == "target";
    plot.series.push_back(std::move(s));
  }
  const double h = std::min(6.0, std::max(std::abs(t.data[0].front()), std::abs(t.data[0].back())));
  plot.x_range = std::pair{-h, h};
  return plot;
}

void add_spectra(OutputBundle& b, const std::string& observable, const std::string& name, const std::string& title,
                 const std::vector<std::pair<std::string, Spectrum>>& spectra, const json& meta) {
  Table t = spectrum_table(name, spectra);
  t.meta.update(meta);
  b.plots.emplace_back(name, spectrum_plot(title, t, "S(omega)"));
  b.tables.emplace_back(observable, std::move(t));
}

}  // namespace

// ---------------------------------------------------------------- Scenario

void Scenario::validate() const {
  base.validate();
  if (replicates < 1) throw std::invalid_argument("experiment.replicates must be positive");
  if (sample_dt < 0.0) throw std::invalid_argument("integrate.sample_dt must be >= 0");
  if (sample_dt > 0.0) {
    checked_ratio(sample_dt, base.dt, "integrate.sample_dt");
    checked_ratio(base.window, sample_dt, "integrate.window");
  }
  if (!(smoothing_bin > 0.0)) throw std::invalid_argument("spectral.smoothing_bin must be positive");
  if (fixed_freqs && fixed_freqs->size() != base.n_osc) {
    throw std::invalid_argument("model.fixed_freqs must have n_osc entries");
  }
  if (imf) imf->validate();
  if (sweep) {
    SimParams probe = base;
    set_sim_field(probe, sweep->parameter, sweep->values.empty() ? 0.0 : sweep->values.front());
    if (sweep->values.empty()) throw std::invalid_argument("experiment.sweep.values is empty");
  }
}

bool Scenario::wants(const std::string& observable) const {
  return std::find(outputs.begin(), outputs.end(), observable) != outputs.end();
}

void set_sim_field(SimParams& p, const std::string& name, double value) {
  if (name == "mean_coupling" || name == "K") {
    p.mean_coupling = value;
  } else if (name == "coupling_disorder" || name == "k") {
    p.coupling_disorder = value;
  } else if (name == "freq_spread" || name == "sigma_omega") {
    p.freq_spread = value;
  } else if (name == "noise_intensity" || name == "D") {
    p.noise_intensity = value;
  } else if (name == "dt") {
    p.dt = value;
  } else if (name == "window" || name == "T") {
    p.window = value;
  } else if (name == "transient") {
    p.transient = value;
  } else if (name == "n_osc" || name == "N") {
    if (!(value >= 1.0) || value != std::floor(value)) throw std::invalid_argument("n_osc must be a positive integer");
    p.n_osc = static_cast<std::size_t>(value);
  } else {
    throw std::invalid_argument("'" + name + "' is not a numeric SimParams field");
  }
}

Scenario scenario_from_json(const json& config) {
  check_keys(config, "<root>", {"name", "model", "integrate", "spectral", "imf", "experiment"});
  Scenario s;
  read_opt(config, "name", s.name);

  if (config.contains("model")) {
    const json& m = config.at("model");
    check_keys(m, "model", {"n_osc", "mean_coupling", "coupling_disorder", "freq_spread", "noise_intensity", "seed",
                            "fixed_freqs"});
    read_opt(m, "n_osc", s.base.n_osc);
    read_opt(m, "mean_coupling", s.base.mean_coupling);
    read_opt(m, "coupling_disorder", s.base.coupling_disorder);
    read_opt(m, "freq_spread", s.base.freq_spread);
    read_opt(m, "noise_intensity", s.base.noise_intensity);
    read_opt(m, "seed", s.base.seed);
    if (m.contains("fixed_freqs") && !m.at("fixed_freqs").is_null()) {
      s.fixed_freqs = m.at("fixed_freqs").get<std::vector<double>>();
    }
  }
  if (config.contains("integrate")) {
    const json& g = config.at("integrate");
    check_keys(g, "integrate", {"dt", "window", "transient", "integrator", "sample_dt", "auto_dt", "record_count"});
    read_opt(g, "dt", s.base.dt);
    read_opt(g, "window", s.base.window);
    read_opt(g, "transient", s.base.transient);
    if (g.contains("integrator")) s.base.integrator = integrator_from_string(g.at("integrator").get<std::string>());
    read_opt(g, "sample_dt", s.sample_dt);
    read_opt(g, "auto_dt", s.auto_dt);
    read_opt(g, "record_count", s.record_count);
  }
  if (config.contains("spectral")) {
    const json& sp = config.at("spectral");
    check_keys(sp, "spectral", {"smoothing_bin"});
    read_opt(sp, "smoothing_bin", s.smoothing_bin);
  }
  if (config.contains("imf") && !config.at("imf").is_null()) {
    const json& f = config.at("imf");
    check_keys(f, "imf", {"n_freqs", "trials_per_freq", "max_iters", "conv_tol", "relax", "init", "lorentzian_a",
                          "lorentzian_b", "dt"});
    ImfParams ip;
    ip.n_freqs = s.base.n_osc;
    read_opt(f, "n_freqs", ip.n_freqs);
    read_opt(f, "trials_per_freq", ip.trials_per_freq);
    read_opt(f, "max_iters", ip.max_iters);
    read_opt(f, "conv_tol", ip.conv_tol);
    read_opt(f, "relax", ip.relax);
    LorentzianSpectrum lor;
    read_opt(f, "lorentzian_a", lor.a);
    read_opt(f, "lorentzian_b", lor.b);
    ip.init_spectrum = lor;
    const std::string init = f.value("init", "lorentzian");
    if (init == "flat") {
      s.imf_flat_start = true;
    } else if (init != "lorentzian") {
      throw std::invalid_argument("imf.init must be 'lorentzian' or 'flat'");
    }
    read_opt(f, "dt", s.imf_dt);
    s.imf = ip;
  }
  if (config.contains("experiment")) {
    const json& e = config.at("experiment");
    check_keys(e, "experiment", {"replicates", "sweep", "outputs", "oscillators", "single_trials", "draws", "band"});
    read_opt(e, "replicates", s.replicates);
    read_opt(e, "outputs", s.outputs);
    read_opt(e, "oscillators", s.oscillators);
    read_opt(e, "single_trials", s.single_trials);
    read_opt(e, "draws", s.draws);
    read_opt(e, "band", s.band);
    if (e.contains("sweep") && !e.at("sweep").is_null()) {
      const json& w = e.at("sweep");
      check_keys(w, "experiment.sweep", {"parameter", "values"});
      s.sweep = SweepSpec{w.at("parameter").get<std::string>(), w.at("values").get<std::vector<double>>()};
    }
  }
  s.validate();
  return s;
}

json scenario_to_json(const Scenario& s) {
  json model = {{"n_osc", s.base.n_osc},
                {"mean_coupling", s.base.mean_coupling},
                {"coupling_disorder", s.base.coupling_disorder},
                {"freq_spread", s.base.freq_spread},
                {"noise_intensity", s.base.noise_intensity},
                {"seed", s.base.seed}};
  if (s.fixed_freqs) model["fixed_freqs"] = *s.fixed_freqs;
  json cfg = {{"name", s.name},
              {"model", model},
              {"integrate",
               {{"dt", s.base.dt},
                {"window", s.base.window},
                {"transient", s.base.transient},
                {"integrator", std::string(to_string(s.base.integrator))},
                {"sample_dt", s.sample_dt},
                {"auto_dt", s.auto_dt},
                {"record_count", s.record_count}}},
              {"spectral", {{"smoothing_bin", s.smoothing_bin}}}};
  if (s.imf) {
    const auto* lor = std::get_if<LorentzianSpectrum>(&s.imf->init_spectrum);
    const LorentzianSpectrum l = lor ? *lor : LorentzianSpectrum{};
    cfg["imf"] = {{"n_freqs", s.imf->n_freqs},
                  {"trials_per_freq", s.imf->trials_per_freq},
                  {"max_iters", s.imf->max_iters},
                  {"conv_tol", s.imf->conv_tol},
                  {"relax", s.imf->relax},
                  {"init", s.imf_flat_start ? "flat" : "lorentzian"},
                  {"lorentzian_a", l.a},
                  {"lorentzian_b", l.b},
                  {"dt", s.imf_dt}};
  }
  json e = {{"replicates", s.replicates},
            {"outputs", s.outputs},
            {"oscillators", s.oscillators},
            {"single_trials", s.single_trials},
            {"draws", s.draws},
            {"band", s.band}};
  if (s.sweep) e["sweep"] = {{"parameter", s.sweep->parameter}, {"values", s.sweep->values}};
  cfg["experiment"] = e;
  return cfg;
}

SimParams replicate_params(const Scenario& s, std::size_t r) {
  SimParams p = s.base;
  if (s.replicates > 1) p.seed = derive_seed(s.base.seed, {Purpose::Replicate, r});
  return p;
}

bool is_synchronized(double mean_r, std::size_t n_osc) {
  return mean_r > 3.0 / std::sqrt(static_cast<double>(n_osc)) + 0.1;
}

// ---------------------------------------------------------------- order sweep

OrderSweepResult run_order_sweep(const Scenario& s) {
  if (!s.sweep) throw std::invalid_argument("order-sweep needs experiment.sweep");
  s.validate();
  const std::size_t n_points = s.sweep->values.size();
  const std::size_t n_rep = s.replicates;
  std::vector<double> r_bar(n_points * n_rep);
  std::vector<std::exception_ptr> errors(n_points * n_rep);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t job = 0; job < n_points * n_rep; ++job) {
    try {
      const std::size_t point = job / n_rep, rep = job % n_rep;
      Scenario local = s;
      set_sim_field(local.base, s.sweep->parameter, s.sweep->values[point]);
      SimParams p = local.base;
      p.seed = derive_seed(s.base.seed, {Purpose::Replicate, rep});
      DisorderRealization d = sample_disorder(p);
      if (local.fixed_freqs && local.fixed_freqs->size() == p.n_osc) d.freqs = *local.fixed_freqs;
      const PhaseState init = init_phases(p);
      if (local.auto_dt) p.dt = select_rk4_dt(p, d, init);
      RecordingRequest req;
      req.sample_dt = recording_step(local, p.dt);
      req.oscillators = std::vector<std::size_t>{};
      req.record_order = true;
      r_bar[job] = simulate_network(p, d, init, req).mean_order();
    } catch (...) {
      errors[job] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  OrderSweepResult out;
  out.parameter = s.sweep->parameter;
  for (std::size_t point = 0; point < n_points; ++point) {
    SimParams p = s.base;
    set_sim_field(p, s.sweep->parameter, s.sweep->values[point]);
    OrderSweepRow row;
    row.value = s.sweep->values[point];
    double sum = 0.0;
    for (std::size_t rep = 0; rep < n_rep; ++rep) sum += r_bar[point * n_rep + rep];
    row.mean_r = sum / static_cast<double>(n_rep);
    double ss = 0.0;
    for (std::size_t rep = 0; rep < n_rep; ++rep) {
      const double d = r_bar[point * n_rep + rep] - row.mean_r;
      ss += d * d;
      if (is_synchronized(r_bar[point * n_rep + rep], p.n_osc)) ++row.flagged;
    }
    row.stderr_r = n_rep > 1 ? std::sqrt(ss / static_cast<double>(n_rep - 1) / static_cast<double>(n_rep)) : 0.0;
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------- network dynamics

NetworkResult run_network(const Scenario& s, const std::optional<std::filesystem::path>& disorder_in,
                          const std::optional<std::filesystem::path>& disorder_out,
                          const std::optional<std::filesystem::path>& trajectory_out) {
  s.validate();
  const std::size_t n_rep = s.replicates;
  if ((disorder_in || disorder_out || trajectory_out) && n_rep != 1) {
    throw std::invalid_argument("disorder and trajectory files need a single replicate");
  }

  struct Partial {
    SimParams params;
    Spectrum s_z;
    std::optional<Spectrum> s_zeta;
    std::vector<Spectrum> osc;
    double mean_r = 0.0;
  };
  std::vector<Partial> parts(n_rep);
  std::vector<std::exception_ptr> errors(n_rep);

  DisorderRealization first = disorder_in ? load_disorder(*disorder_in) : realized_disorder(s, 0);
  if (first.size() != s.base.n_osc) throw std::invalid_argument("disorder file size does not match model.n_osc");
  const std::vector<std::size_t> oscs = s.wants("oscillators") ? chosen_oscillators(s, first.freqs)
                                                               : std::vector<std::size_t>{};
  std::set<std::size_t> selection(oscs.begin(), oscs.end());
  const std::size_t n = s.base.n_osc;
  const std::size_t n_record = s.record_count == 0 ? n : std::min(s.record_count, n);
  for (std::size_t i = 0; i < n_record; ++i) selection.insert(i * n / n_record);
  const std::vector<std::size_t> selected(selection.begin(), selection.end());

#pragma omp parallel for schedule(dynamic, 1) if (n_rep > 1)
  for (std::size_t r = 0; r < n_rep; ++r) {
    try {
      Partial& part = parts[r];
      SimParams p = replicate_params(s, r);
      const DisorderRealization d = r == 0 ? first : realized_disorder(s, r);
      const PhaseState init = init_phases(p);
      if (s.auto_dt) p.dt = select_rk4_dt(p, d, init);
      RecordingRequest req;
      req.sample_dt = recording_step(s, p.dt);
      req.oscillators = selected;
      req.record_noise = s.wants("s_zeta");
      req.record_order = true;
      const TrajectoryRecording rec = simulate_network(p, d, init, req);
      part.params = p;
      part.mean_r = rec.mean_order();
      part.s_z = smoothed(mean_pointer_spectrum(rec), s.smoothing_bin);
      if (req.record_noise) part.s_zeta = smoothed(mean_noise_spectrum(rec), s.smoothing_bin);
      for (auto l : oscs) {
        const auto col = static_cast<std::size_t>(std::find(selected.begin(), selected.end(), l) - selected.begin());
        part.osc.push_back(smoothed(periodogram(rec.pointer_series(col)), s.smoothing_bin));
      }
      if (trajectory_out) write_trajectory(*trajectory_out, rec, scenario_to_json(s));
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (disorder_out) save_disorder(first, *disorder_out);

  NetworkResult out;
  out.params = parts[0].params;
  out.oscillators = oscs;
  for (auto l : oscs) out.osc_freqs.push_back(first.freqs[l]);
  std::optional<Spectrum> s_z, s_zeta;
  std::vector<std::optional<Spectrum>> osc(oscs.size());
  for (const auto& part : parts) {
    add_into(s_z, part.s_z);
    if (part.s_zeta) add_into(s_zeta, *part.s_zeta);
    for (std::size_t i = 0; i < oscs.size(); ++i) add_into(osc[i], part.osc[i]);
    out.mean_r.push_back(part.mean_r);
    if (is_synchronized(part.mean_r, n)) ++out.flagged;
  }
  const double inv = 1.0 / static_cast<double>(n_rep);
  out.s_z = scaled(*s_z, inv);
  if (s_zeta) {
    out.s_zeta = scaled(*s_zeta, inv);
    out.noise_relation_distance = spectral_distance(*out.s_zeta, scaled(out.s_z, s.base.noise_scale()));
  }
  for (auto& o : osc) out.osc_spectra.push_back(scaled(*o, inv));
  return out;
}

// ---------------------------------------------------------------- mean field

ImfRunResult run_imf(const Scenario& s, const std::optional<std::vector<double>>& freqs,
                     const std::vector<double>& osc_freqs) {
  s.validate();
  ImfRunResult out;
  out.params = imf_sim_params(s);
  out.imf = imf_params(s, out.params);
  if (freqs) {
    out.imf.n_freqs = freqs->size();
    out.imf.fixed_freqs = freqs;
  }
  out.state = imf_iterate(out.params, out.imf);
  out.s_z = smoothed(out.state.pointer_spectrum, s.smoothing_bin);
  out.s_zeta = smoothed(out.state.noise_spectrum, s.smoothing_bin);

  out.osc_freqs = osc_freqs;
  if (out.osc_freqs.empty() && s.wants("oscillators")) {
    if (s.fixed_freqs) {
      for (auto l : chosen_oscillators(s, *s.fixed_freqs)) out.osc_freqs.push_back((*s.fixed_freqs)[l]);
    } else {
      const double sigma = s.base.freq_spread;
      out.osc_freqs = sigma > 0.0 ? std::vector<double>{-sigma, 0.0, sigma} : std::vector<double>{0.0};
    }
  }
  for (std::size_t i = 0; i < out.osc_freqs.size(); ++i) {
    out.osc_spectra.push_back(
        single_oscillator_spectrum(out.state, out.osc_freqs[i], out.params, out.imf, s.single_trials, i));
  }
  return out;
}

ComparisonReport run_comparison(const Scenario& s) {
  s.validate();
  ComparisonReport rep;
  rep.nd = run_network(s);
  std::optional<std::vector<double>> freqs;
  if (s.replicates == 1) {
    freqs = realized_disorder(s, 0).freqs;
  } else if (s.fixed_freqs) {
    freqs = s.fixed_freqs;
  }
  rep.imf = run_imf(s, freqs, rep.nd.osc_freqs);
  if (!same_grid(rep.nd.s_z, rep.imf.s_z)) {
    throw GridMismatch("compare: ND and IMF spectra live on different grids; set integrate.sample_dt");
  }
  rep.s_z_distance = spectral_distance(rep.imf.s_z, rep.nd.s_z);
  for (std::size_t i = 0; i < rep.nd.osc_spectra.size(); ++i) {
    rep.osc_distances.push_back(spectral_distance(rep.imf.osc_spectra[i], rep.nd.osc_spectra[i]));
  }
  if (rep.nd.s_zeta) rep.s_zeta_distance = spectral_distance(rep.imf.s_zeta, *rep.nd.s_zeta);
  return rep;
}

// ---------------------------------------------------------------- checks

KuboCheck run_kubo_check(const Scenario& scenario) {
  Scenario s = scenario;
  s.base.freq_spread = 0.0;
  s.base.coupling_disorder = 0.0;
  s.base.mean_coupling = 0.0;
  s.base.integrator = Integrator::EulerMaruyama;
  s.fixed_freqs.reset();
  s.outputs = {"s_z"};
  if (!(s.base.noise_intensity > 0.0)) throw std::invalid_argument("kubo-check needs model.noise_intensity > 0");
  KuboCheck out;
  out.nd = run_network(s);
  out.analytic = analytic_spectrum(KuboSpectrum{s.base.noise_intensity}, out.nd.s_z);
  out.distance = spectral_distance(restrict_band(out.nd.s_z, s.band), restrict_band(out.analytic, s.band));
  out.peak = find_peak(out.nd.s_z).height;
  return out;
}

SurrogateCheck run_surrogate_check(const Scenario& s) {
  s.validate();
  const SimParams p = imf_sim_params(s);
  const ImfParams ip = imf_params(s, p);
  const double sample_dt = ip.sample_dt;
  const std::size_t n = checked_ratio(p.window, sample_dt, "window");
  const Spectrum grid = periodogram_grid(n, sample_dt);
  SurrogateCheck out;
  if (const auto* lor = std::get_if<LorentzianSpectrum>(&ip.init_spectrum)) {
    out.target = analytic_spectrum(*lor, grid);
  } else {
    out.target = std::get<Spectrum>(ip.init_spectrum);
  }
  const std::size_t draws = s.draws;
  if (draws < 2) throw std::invalid_argument("surrogate-check needs at least two draws");
  const std::vector<double> acc = kernels::parallel::ordered_sum(draws, 2 * n, [&](std::size_t q, std::span<double> a) {
    RngStream stream(s.base.seed, {Purpose::Check, q});
    const ComplexSeries noise = noise_from_spectrum(out.target, p.window, sample_dt, stream);
    const Spectrum per = periodogram(noise);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] += per.values[i];
      a[n + i] += per.values[i] * per.values[i];
    }
  });
  out.mean = grid;
  out.stderr_ = grid;
  const double m = static_cast<double>(draws);
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = acc[i] / m;
    const double var = std::max(0.0, (acc[n + i] - m * mean * mean) / (m - 1.0));
    out.mean.values[i] = mean;
    out.stderr_.values[i] = std::sqrt(var / m);
    if (out.stderr_.values[i] > 0.0) {
      out.max_z = std::max(out.max_z, std::abs(mean - out.target.values[i]) / out.stderr_.values[i]);
    }
  }
  out.distance = spectral_distance(out.mean, out.target);
  return out;
}

// ---------------------------------------------------------------- outputs

OutputBundle bundle(const Scenario& s, const OrderSweepResult& r) {
  OutputBundle b;
  b.command = "order-sweep";
  Table t;
  t.name = "order_sweep";
  t.columns = {r.parameter, "mean_r", "stderr", "flagged"};
  t.data.assign(4, {});
  PlotSeries line{"mean r", {}, {}};
  line.markers = true;
  PlotSeries guard{"1/sqrt(N)", {}, {}};
  guard.dashed = true;
  for (const auto& row : r.rows) {
    t.data[0].push_back(row.value);
    t.data[1].push_back(row.mean_r);
    t.data[2].push_back(row.stderr_r);
    t.data[3].push_back(static_cast<double>(row.flagged));
    line.x.push_back(row.value);
    line.y.push_back(row.mean_r);
    SimParams p = s.base;
    set_sim_field(p, r.parameter, row.value);
    guard.x.push_back(row.value);
    guard.y.push_back(1.0 / std::sqrt(static_cast<double>(p.n_osc)));
  }
  t.meta["replicates"] = s.replicates;
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"value", row.value}, {"mean_r", row.mean_r}, {"stderr", row.stderr_r}, {"flagged", row.flagged}});
  }
  b.summary["rows"] = rows;
  PlotSpec plot;
  plot.title = "order parameter";
  plot.xlabel = r.parameter;
  plot.ylabel = "mean r";
  plot.series = {line, guard};
  plot.log_y = r.parameter == "n_osc" || r.parameter == "N";
  b.plots.emplace_back("order_sweep", plot);
  b.tables.emplace_back("order", std::move(t));
  return b;
}

namespace {

void network_parts(OutputBundle& b, const Scenario& s, const NetworkResult& r, const std::string& prefix) {
  const json meta = {{"replicates", s.replicates}, {"smoothing_bin", s.smoothing_bin}};
  add_spectra(b, "s_z", prefix + "s_z", "network averaged pointer spectrum", {{"s_z", r.s_z}}, meta);
  if (r.s_zeta) {
    add_spectra(b, "s_zeta", prefix + "s_zeta", "network noise spectrum",
                {{"s_zeta", *r.s_zeta}, {"scaled_s_z", scaled(r.s_z, s.base.noise_scale())}}, meta);
  }
  if (!r.osc_spectra.empty()) {
    std::vector<std::pair<std::string, Spectrum>> cols;
    for (std::size_t i = 0; i < r.osc_spectra.size(); ++i) {
      cols.emplace_back("osc_" + std::to_string(r.oscillators[i]), r.osc_spectra[i]);
    }
    json m = meta;
    m["freqs"] = r.osc_freqs;
    add_spectra(b, "oscillators", prefix + "oscillators", "single oscillator spectra", cols, m);
  }
  json summary = {{"params", params_json(r.params)},
                  {"mean_r", r.mean_r},
                  {"flagged_synchronized", r.flagged},
                  {"oscillators", r.oscillators},
                  {"oscillator_freqs", r.osc_freqs},
                  {"s_z_integral", spectrum_integral(r.s_z)}};
  if (r.noise_relation_distance) summary["noise_relation_distance"] = *r.noise_relation_distance;
  b.summary["nd"] = summary;
}

void imf_parts(OutputBundle& b, const Scenario& s, const ImfRunResult& r, const std::string& prefix) {
  const json meta = {{"n_freqs", r.imf.n_freqs},
                     {"trials_per_freq", r.imf.trials_per_freq},
                     {"iterations", r.state.iter},
                     {"smoothing_bin", s.smoothing_bin}};
  add_spectra(b, "s_z", prefix + "s_z", "mean-field pointer spectrum", {{"s_z", r.s_z}}, meta);
  add_spectra(b, "s_zeta", prefix + "s_zeta", "self-consistent noise spectrum", {{"s_zeta", r.s_zeta}}, meta);
  if (!r.osc_spectra.empty()) {
    std::vector<std::pair<std::string, Spectrum>> cols;
    for (std::size_t i = 0; i < r.osc_spectra.size(); ++i) cols.emplace_back("freq_" + std::to_string(i), r.osc_spectra[i]);
    json m = meta;
    m["freqs"] = r.osc_freqs;
    m["single_trials"] = s.single_trials;
    add_spectra(b, "oscillators", prefix + "oscillators", "single oscillator spectra", cols, m);
  }
  Table h;
  h.name = prefix + "history";
  h.columns = {"iteration", "distance"};
  h.data.assign(2, {});
  for (std::size_t i = 0; i < r.state.history.size(); ++i) {
    h.data[0].push_back(static_cast<double>(i + 1));
    h.data[1].push_back(r.state.history[i]);
  }
  PlotSeries hs{"distance", h.data[0], h.data[1]};
  hs.markers = true;
  PlotSpec hp;
  hp.title = "convergence";
  hp.xlabel = "iteration";
  hp.ylabel = "distance between iterates";
  hp.series = {hs};
  hp.log_y = true;
  b.plots.emplace_back(h.name, hp);
  b.tables.emplace_back("history", std::move(h));
  if (!r.state.iterates.empty()) {
    std::vector<std::pair<std::string, Spectrum>> cols;
    for (std::size_t i = 0; i < r.state.iterates.size(); ++i) {
      cols.emplace_back("iter_" + std::to_string(i), smoothed(r.state.iterates[i], s.smoothing_bin));
    }
    add_spectra(b, "iterates", prefix + "iterates", "noise spectrum per iteration", cols, meta);
  }
  b.summary["imf"] = {{"params", params_json(r.params)},
                      {"n_freqs", r.imf.n_freqs},
                      {"trials_per_freq", r.imf.trials_per_freq},
                      {"iterations", r.state.iter},
                      {"converged", r.state.converged},
                      {"history", r.state.history},
                      {"oscillator_freqs", r.osc_freqs},
                      {"s_z_integral", spectrum_integral(r.s_z)}};
}

}  // namespace

OutputBundle bundle(const Scenario& s, const NetworkResult& r) {
  OutputBundle b;
  b.command = "nd";
  network_parts(b, s, r, "nd_");
  return b;
}

OutputBundle bundle(const Scenario& s, const ImfRunResult& r) {
  OutputBundle b;
  b.command = "imf";
  imf_parts(b, s, r, "imf_");
  return b;
}

OutputBundle bundle(const Scenario& s, const ComparisonReport& r) {
  OutputBundle b;
  b.command = "compare";
  const json meta = {{"replicates", s.replicates},
                     {"trials_per_freq", r.imf.imf.trials_per_freq},
                     {"smoothing_bin", s.smoothing_bin}};
  add_spectra(b, "s_z", "compare_s_z", "pointer spectrum: IMF vs ND", {{"imf", r.imf.s_z}, {"nd", r.nd.s_z}}, meta);
  if (r.nd.s_zeta) {
    add_spectra(b, "s_zeta", "compare_s_zeta", "noise spectrum: IMF vs ND", {{"imf", r.imf.s_zeta}, {"nd", *r.nd.s_zeta}},
                meta);
  }
  if (!r.nd.osc_spectra.empty()) {
    std::vector<std::pair<std::string, Spectrum>> cols;
    for (std::size_t i = 0; i < r.nd.osc_spectra.size(); ++i) {
      cols.emplace_back("imf_" + std::to_string(r.nd.oscillators[i]), r.imf.osc_spectra[i]);
      cols.emplace_back("nd_" + std::to_string(r.nd.oscillators[i]), r.nd.osc_spectra[i]);
    }
    json m = meta;
    m["freqs"] = r.nd.osc_freqs;
    add_spectra(b, "oscillators", "compare_oscillators", "single oscillators: IMF vs ND", cols, m);
  }
  OutputBundle nd, mf;
  network_parts(nd, s, r.nd, "nd_");
  imf_parts(mf, s, r.imf, "imf_");
  for (auto& t : mf.tables) {
    if (t.first == "history" || t.first == "iterates") b.tables.push_back(std::move(t));
  }
  for (auto& p : mf.plots) {
    if (p.first == "imf_history" || p.first == "imf_iterates") b.plots.push_back(std::move(p));
  }
  b.summary["nd"] = nd.summary["nd"];
  b.summary["imf"] = mf.summary["imf"];
  b.summary["s_z_distance"] = r.s_z_distance;
  b.summary["oscillator_distances"] = r.osc_distances;
  if (r.s_zeta_distance) b.summary["s_zeta_distance"] = *r.s_zeta_distance;
  return b;
}

OutputBundle bundle(const Scenario& s, const KuboCheck& r) {
  OutputBundle b;
  b.command = "kubo-check";
  add_spectra(b, "check", "kubo_check", "uncoupled oscillators under white noise",
              {{"nd", r.nd.s_z}, {"analytic", r.analytic}}, {{"trials", s.base.n_osc}, {"band", s.band}});
  b.summary = {{"distance", r.distance},
               {"peak", r.peak},
               {"analytic_peak", 2.0 / s.base.noise_intensity},
               {"band", s.band},
               {"params", params_json(r.nd.params)}};
  return b;
}

OutputBundle bundle(const Scenario& s, const SurrogateCheck& r) {
  OutputBundle b;
  b.command = "surrogate-check";
  add_spectra(b, "check", "surrogate_check", "surrogate noise round trip",
              {{"target", r.target}, {"mean", r.mean}, {"stderr", r.stderr_}}, {{"draws", s.draws}});
  b.summary = {{"distance", r.distance}, {"max_z", r.max_z}, {"draws", s.draws}};
  return b;
}

std::vector<std::filesystem::path> emit_outputs(const Scenario& s, const OutputBundle& out,
                                                const std::filesystem::path& dir, bool plot) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": cannot create output directory: " + ec.message());
  const json config = scenario_to_json(s);
  std::vector<std::filesystem::path> written;
  json files = json::array();
  for (const auto& [observable, table] : out.tables) {
    if (!s.wants(observable)) continue;
    Table t = table;
    t.meta["command"] = out.command;
    const auto path = dir / (t.name + ".csv");
    write_table(path, t, config);
    written.push_back(path);
    files.push_back(path.filename().string());
    if (plot) {
      for (const auto& [stem, spec] : out.plots) {
        if (stem != t.name) continue;
        const auto svg = dir / (stem + ".svg");
        write_svg(svg, spec);
        written.push_back(svg);
        files.push_back(svg.filename().string());
      }
    }
  }
  json meta = {{"tool", "kuramoto-imf"},
               {"version", kVersion},
               {"command", out.command},
               {"config", config},
               {"summary", out.summary},
               {"files", files}};
  const auto path = dir / "metadata.json";
  std::ofstream f(path);
  if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
  f << meta.dump(2) << '\n';
  if (!f) throw std::runtime_error(path.string() + ": write failed");
  written.push_back(path);
  return written;
}

}  // namespace kuramoto
