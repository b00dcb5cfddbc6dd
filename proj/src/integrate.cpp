#include "kuramoto/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kuramoto/errors.hpp"
#include "kuramoto/kernels.hpp"
#include "kuramoto/phasor.hpp"

namespace kuramoto {
namespace {

constexpr std::size_t kResyncInterval = 64;
constexpr std::size_t kProbeSteps = 8192;
constexpr std::size_t kProbeOscillators = 4;
constexpr double kMaxAliasedMass = 0.01;
using kernels::parallel::for_each_index;

enum class FieldMode { None, Homogeneous, Dense };

/// Full-network integrator. Pointers are cached as split real/imaginary
/// arrays and advanced by rotation; they are refreshed from the phases every
/// kResyncInterval steps.
class NetworkIntegrator {
 public:
  NetworkIntegrator(const SimParams& params, const DisorderRealization& disorder, const PhaseState& init)
      : params_(params), disorder_(disorder), n_(disorder.size()), theta_(init.phases), time_(init.time) {
    params_.validate();
    if (init.phases.size() != n_) throw std::invalid_argument("initial state and disorder sizes differ");
    if (disorder.couplings.size() != n_ * n_) throw std::invalid_argument("coupling matrix is not N x N");
    check_step_bound();
    detect_field_mode();
    pr_.resize(n_);
    pi_.resize(n_);
    zr_.assign(n_, 0.0);
    zi_.assign(n_, 0.0);
    delta_.resize(n_);
    ur_.resize(n_);
    ui_.resize(n_);
    if (params_.integrator == Integrator::RungeKutta4) {
      stage_r_.resize(n_);
      stage_i_.resize(n_);
      k_sum_.resize(n_);
    }
    if (params_.integrator == Integrator::EulerMaruyama && params_.noise_intensity > 0.0) {
      streams_.reserve(n_);
      for (std::size_t l = 0; l < n_; ++l) streams_.emplace_back(params_.seed, StreamId{Purpose::NetworkDiffusion, l});
    }
    resync();
  }

  void resync() {
    for_each_index(n_, [&](std::size_t l) {
      pr_[l] = std::cos(theta_[l]);
      pi_[l] = std::sin(theta_[l]);
    });
  }

  /// Field at the current pointers into (zr_, zi_).
  void compute_field() { field(pr_, pi_); }

  std::complex<double> field_at(std::size_t l) const {
    if (mode_ == FieldMode::Dense) return {zr_[l], zi_[l]};
    return {zr_[0], zi_[0]};
  }

  std::complex<double> pointer_at(std::size_t l) const { return {pr_[l], pi_[l]}; }

  /// Advances one step; expects compute_field() to have been called for the
  /// current state.
  void step() {
    const double dt = params_.dt;
    if (params_.integrator == Integrator::EulerMaruyama) {
      const double amp = std::sqrt(2.0 * params_.noise_intensity * dt);
      const bool noisy = !streams_.empty();
      for_each_index(n_, [&](std::size_t l) {
        double d = (disorder_.freqs[l] + drive(l, pr_[l], pi_[l])) * dt;
        if (noisy) d += amp * streams_[l].normal();
        delta_[l] = d;
      });
    } else {
      // k1 from the current field.
      for_each_index(n_, [&](std::size_t l) {
        const double k = disorder_.freqs[l] + drive(l, pr_[l], pi_[l]);
        k_sum_[l] = k;
        delta_[l] = k;
      });
      rk4_stage(0.5 * dt, 2.0);
      rk4_stage(0.5 * dt, 2.0);
      rk4_stage(dt, 1.0);
      for_each_index(n_, [&](std::size_t l) { delta_[l] = dt / 6.0 * k_sum_[l]; });
    }
    for_each_index(n_, [&](std::size_t l) {
      const double d = delta_[l];
      theta_[l] += d;
      const auto u = unit_phasor_taylor(d);
      ur_[l] = u.real();
      ui_[l] = u.imag();
    });
    bool finite = true;
    for (std::size_t l = 0; l < n_; ++l) finite = finite && theta_[l] - theta_[l] == 0.0;
    for (std::size_t l = 0; l < n_; ++l) {
      if (std::abs(delta_[l]) > kTaylorPhasorLimit) {
        ur_[l] = std::cos(delta_[l]);
        ui_[l] = std::sin(delta_[l]);
      }
    }
    for_each_index(n_, [&](std::size_t l) {
      const double re = pr_[l] * ur_[l] - pi_[l] * ui_[l];
      const double im = pr_[l] * ui_[l] + pi_[l] * ur_[l];
      pr_[l] = re;
      pi_[l] = im;
    });
    ++steps_;
    time_ = params_.dt * static_cast<double>(steps_) + start_time_;
    if (!finite) report_non_finite();
    if (steps_ % kResyncInterval == 0) resync();
  }

  double order_parameter_now() const {
    double re = 0.0, im = 0.0;
    for (std::size_t l = 0; l < n_; ++l) {
      re += pr_[l];
      im += pi_[l];
    }
    return std::hypot(re, im) / static_cast<double>(n_);
  }

  PhaseState state() const { return PhaseState{theta_, time_}; }
  double time() const { return time_; }

 private:
  double drive(std::size_t l, double re, double im) const {
    if (mode_ == FieldMode::None) return 0.0;
    const std::size_t idx = mode_ == FieldMode::Dense ? l : 0;
    return re * zi_[idx] - im * zr_[idx];
  }

  void field(const std::vector<double>& xr, const std::vector<double>& xi) {
    switch (mode_) {
      case FieldMode::None:
        return;
      case FieldMode::Homogeneous: {
        double re = 0.0, im = 0.0;
        for (std::size_t m = 0; m < n_; ++m) {
          re += xr[m];
          im += xi[m];
        }
        zr_[0] = homogeneous_ * re;
        zi_[0] = homogeneous_ * im;
        return;
      }
      case FieldMode::Dense:
        kernels::parallel::coupling_field(disorder_.couplings, xr, xi, zr_, zi_);
        return;
    }
  }

  // Evaluates the drift at theta + h * k_prev (k_prev held in delta_) and
  // accumulates weight * k into k_sum_; leaves the new k in delta_.
  void rk4_stage(double h, double weight) {
    for_each_index(n_, [&](std::size_t l) {
      const auto u = unit_phasor(h * delta_[l]);
      stage_r_[l] = pr_[l] * u.real() - pi_[l] * u.imag();
      stage_i_[l] = pr_[l] * u.imag() + pi_[l] * u.real();
    });
    field(stage_r_, stage_i_);
    for_each_index(n_, [&](std::size_t l) {
      const double k = disorder_.freqs[l] + drive(l, stage_r_[l], stage_i_[l]);
      k_sum_[l] += weight * k;
      delta_[l] = k;
    });
  }

  void check_step_bound() const {
    for (std::size_t l = 0; l < n_; ++l) {
      double s = std::abs(disorder_.freqs[l]);
      for (double k : disorder_.row(l)) s += std::abs(k);
      if (params_.dt * s > 1.0) {
        std::ostringstream msg;
        msg << "step size rejected: dt*(|omega| + sum|K|) = " << params_.dt * s << " > 1 for oscillator " << l;
        throw NumericalError(msg.str());
      }
    }
  }

  void detect_field_mode() {
    const auto& k = disorder_.couplings;
    const double first = k.empty() ? 0.0 : k.front();
    const bool uniform = std::all_of(k.begin(), k.end(), [first](double v) { return v == first; });
    if (uniform && first == 0.0) {
      mode_ = FieldMode::None;
    } else if (uniform) {
      mode_ = FieldMode::Homogeneous;
      homogeneous_ = first;
    } else {
      mode_ = FieldMode::Dense;
    }
  }

  [[noreturn]] void report_non_finite() const {
    for (std::size_t l = 0; l < n_; ++l) {
      if (!std::isfinite(theta_[l])) {
        std::ostringstream msg;
        msg << "non-finite phase for oscillator " << l << " at t = " << time_ << " (delta " << delta_[l] << ")";
        throw NumericalError(msg.str());
      }
    }
    throw NumericalError("non-finite phase");
  }

  SimParams params_;
  const DisorderRealization& disorder_;
  std::size_t n_;
  std::vector<double> theta_;
  double time_;
  double start_time_ = time_;
  std::size_t steps_ = 0;
  FieldMode mode_ = FieldMode::Dense;
  double homogeneous_ = 0.0;
  std::vector<double> pr_, pi_, zr_, zi_, delta_, ur_, ui_, stage_r_, stage_i_, k_sum_;
  std::vector<RngStream> streams_;
};

ComplexSeries column(const std::vector<std::complex<double>>& data, std::size_t n_samples, std::size_t n_cols,
                     std::size_t s, double t0, double dt) {
  ComplexSeries out{t0, dt, std::vector<std::complex<double>>(n_samples)};
  for (std::size_t t = 0; t < n_samples; ++t) out.values[t] = data[t * n_cols + s];
  return out;
}

Spectrum mean_column_spectrum(const std::vector<std::complex<double>>& data, std::size_t n_samples,
                              std::size_t n_cols, double sample_dt) {
  if (n_cols == 0) throw std::invalid_argument("no recorded oscillators");
  Spectrum out = periodogram_grid(n_samples, sample_dt);
  out.values = kernels::parallel::ordered_sum(n_cols, n_samples, [&](std::size_t s, std::span<double> acc) {
    std::vector<std::complex<double>> series(n_samples), scratch(n_samples);
    for (std::size_t t = 0; t < n_samples; ++t) series[t] = data[t * n_cols + s];
    accumulate_periodogram(series, sample_dt, acc, scratch);
  });
  const double inv = 1.0 / static_cast<double>(n_cols);
  for (auto& v : out.values) v *= inv;
  return out;
}

}  // namespace

ComplexSeries TrajectoryRecording::pointer_series(std::size_t s) const {
  if (s >= oscillators.size()) throw std::out_of_range("pointer_series: column out of range");
  return column(pointers, n_samples, oscillators.size(), s, start_time, sample_dt);
}

ComplexSeries TrajectoryRecording::noise_series(std::size_t s) const {
  if (noise.empty()) throw std::logic_error("noise series were not recorded");
  if (s >= oscillators.size()) throw std::out_of_range("noise_series: column out of range");
  return column(noise, n_samples, oscillators.size(), s, start_time, sample_dt);
}

double TrajectoryRecording::mean_order() const {
  if (order.empty()) throw std::logic_error("order parameter was not recorded");
  double sum = 0.0;
  for (double r : order) sum += r;
  return sum / static_cast<double>(order.size());
}

DriftFn network_drift(const DisorderRealization& disorder) {
  return [&disorder](std::span<const double> theta, std::span<double> out) {
    const std::size_t n = disorder.size();
    for (std::size_t l = 0; l < n; ++l) {
      double s = disorder.freqs[l];
      const auto row = disorder.row(l);
      for (std::size_t m = 0; m < n; ++m) s += row[m] * std::sin(theta[m] - theta[l]);
      out[l] = s;
    }
  };
}

void rk4_step(PhaseState& state, const DriftFn& drift, double dt) {
  const std::size_t n = state.phases.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  drift(state.phases, k1);
  for (std::size_t l = 0; l < n; ++l) tmp[l] = state.phases[l] + 0.5 * dt * k1[l];
  drift(tmp, k2);
  for (std::size_t l = 0; l < n; ++l) tmp[l] = state.phases[l] + 0.5 * dt * k2[l];
  drift(tmp, k3);
  for (std::size_t l = 0; l < n; ++l) tmp[l] = state.phases[l] + dt * k3[l];
  drift(tmp, k4);
  for (std::size_t l = 0; l < n; ++l) state.phases[l] += dt / 6.0 * (k1[l] + 2.0 * k2[l] + 2.0 * k3[l] + k4[l]);
  state.time += dt;
}

void euler_maruyama_step(PhaseState& state, const DriftFn& drift, double noise_intensity, double dt,
                         RngStream& stream) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const std::size_t n = state.phases.size();
  std::vector<double> f(n);
  drift(state.phases, f);
  const double amp = std::sqrt(2.0 * noise_intensity * dt);
  for (std::size_t l = 0; l < n; ++l) {
    state.phases[l] += f[l] * dt;
    if (noise_intensity > 0.0) state.phases[l] += amp * stream.normal();
  }
  state.time += dt;
}

void euler_maruyama_step(PhaseState& state, const DriftFn& drift, double noise_intensity, double dt,
                         std::span<RngStream> streams) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const std::size_t n = state.phases.size();
  if (streams.size() != n) throw std::invalid_argument("need one stream per oscillator");
  std::vector<double> f(n);
  drift(state.phases, f);
  const double amp = std::sqrt(2.0 * noise_intensity * dt);
  for (std::size_t l = 0; l < n; ++l) {
    state.phases[l] += f[l] * dt;
    if (noise_intensity > 0.0) state.phases[l] += amp * streams[l].normal();
  }
  state.time += dt;
}

double mass_above_nyquist(std::span<const std::complex<double>> fine, double fine_dt, double coarse_dt) {
  const Spectrum s = periodogram(fine, fine_dt);
  const double nyquist = std::numbers::pi / coarse_dt;
  double total = 0.0, above = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += s.values[i];
    if (std::abs(s.omega(i)) > nyquist) above += s.values[i];
  }
  return total > 0.0 ? above / total : 0.0;
}

TrajectoryRecording simulate_network(const SimParams& params, const DisorderRealization& disorder,
                                     const PhaseState& init, const RecordingRequest& request) {
  NetworkIntegrator engine(params, disorder, init);
  const std::size_t n = disorder.size();

  TrajectoryRecording rec;
  rec.sample_dt = request.sample_dt > 0.0 ? request.sample_dt : params.dt;
  const std::size_t stride = checked_ratio(rec.sample_dt, params.dt, "sample_dt");
  rec.n_samples = checked_ratio(params.window, rec.sample_dt, "window");
  const std::size_t transient_steps = params.steps_for(params.transient);
  rec.start_time = init.time + params.dt * static_cast<double>(transient_steps);
  if (request.oscillators) {
    rec.oscillators = *request.oscillators;
    for (auto l : rec.oscillators) {
      if (l >= n) throw std::out_of_range("recording request names oscillator " + std::to_string(l));
    }
  } else {
    rec.oscillators.resize(n);
    for (std::size_t l = 0; l < n; ++l) rec.oscillators[l] = l;
  }
  const std::size_t n_sel = rec.oscillators.size();
  rec.pointers.resize(rec.n_samples * n_sel);
  if (request.record_noise) rec.noise.resize(rec.n_samples * n_sel);
  if (request.record_order) rec.order.resize(rec.n_samples);

  const std::size_t total_steps = transient_steps + rec.n_samples * stride;
  const std::size_t n_probe = stride > 1 ? std::min(kProbeOscillators, n_sel) : 0;
  const std::size_t probe_steps = std::min(kProbeSteps, rec.n_samples * stride);
  std::vector<std::vector<std::complex<double>>> probe_ptr(n_probe), probe_noise(n_probe);

  for (std::size_t step = 0; step < total_steps; ++step) {
    const bool recording_phase = step >= transient_steps;
    const std::size_t rel = step - transient_steps;
    const bool record = recording_phase && rel % stride == 0;
    engine.compute_field();
    if (record) {
      const std::size_t t = rel / stride;
      for (std::size_t s = 0; s < n_sel; ++s) {
        rec.pointers[t * n_sel + s] = engine.pointer_at(rec.oscillators[s]);
        if (request.record_noise) rec.noise[t * n_sel + s] = engine.field_at(rec.oscillators[s]);
      }
      if (request.record_order) rec.order[t] = engine.order_parameter_now();
    }
    if (recording_phase && rel < probe_steps) {
      for (std::size_t s = 0; s < n_probe; ++s) {
        probe_ptr[s].push_back(engine.pointer_at(rec.oscillators[s]));
        if (request.record_noise) probe_noise[s].push_back(engine.field_at(rec.oscillators[s]));
      }
      if (rel + 1 == probe_steps && probe_steps >= 2) {
        for (std::size_t s = 0; s < n_probe; ++s) {
          const double fp = mass_above_nyquist(probe_ptr[s], params.dt, rec.sample_dt);
          const double fz = request.record_noise ? mass_above_nyquist(probe_noise[s], params.dt, rec.sample_dt) : 0.0;
          if (fp > kMaxAliasedMass || fz > kMaxAliasedMass) {
            std::ostringstream msg;
            msg << "recording at sample_dt = " << rec.sample_dt << " would alias " << 100.0 * std::max(fp, fz)
                << "% of the spectral mass of oscillator " << rec.oscillators[s] << "; use a finer sample_dt";
            throw NumericalError(msg.str());
          }
        }
      }
    }
    engine.step();
  }
  rec.final_state = engine.state();
  return rec;
}

PhaseState advance_network(const SimParams& params, const DisorderRealization& disorder, const PhaseState& init,
                           double duration) {
  NetworkIntegrator engine(params, disorder, init);
  const std::size_t steps = params.steps_for(duration);
  for (std::size_t i = 0; i < steps; ++i) {
    engine.compute_field();
    engine.step();
  }
  return engine.state();
}

double rk4_self_convergence_error(const SimParams& params, const DisorderRealization& disorder,
                                  const PhaseState& init, double horizon) {
  SimParams coarse = params;
  coarse.integrator = Integrator::RungeKutta4;
  coarse.transient = 0.0;
  SimParams fine = coarse;
  fine.dt = 0.5 * coarse.dt;
  fine.window = coarse.window;
  const PhaseState a = advance_network(coarse, disorder, init, horizon);
  const PhaseState b = advance_network(fine, disorder, init, horizon);
  double err = 0.0;
  for (std::size_t l = 0; l < a.phases.size(); ++l) err = std::max(err, std::abs(a.phases[l] - b.phases[l]));
  return err * 16.0 / 15.0;
}

double select_rk4_dt(const SimParams& params, const DisorderRealization& disorder, const PhaseState& init,
                     double tol) {
  SimParams p = params;
  for (int i = 0; i <= 12; ++i) {
    try {
      if (rk4_self_convergence_error(p, disorder, init) < tol) return p.dt;
    } catch (const NumericalError&) {
      // step bound or blow-up at this dt: keep halving
    }
    p.dt *= 0.5;
  }
  throw NumericalError("rk4 self-convergence not reached after 12 halvings of dt");
}

Spectrum mean_pointer_spectrum(const TrajectoryRecording& rec) {
  return mean_column_spectrum(rec.pointers, rec.n_samples, rec.n_selected(), rec.sample_dt);
}

Spectrum mean_noise_spectrum(const TrajectoryRecording& rec) {
  if (rec.noise.empty()) throw std::logic_error("noise series were not recorded");
  return mean_column_spectrum(rec.noise, rec.n_samples, rec.n_selected(), rec.sample_dt);
}

}  // namespace kuramoto
