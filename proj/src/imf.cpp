#include "kuramoto/imf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kuramoto/errors.hpp"
#include "kuramoto/kernels.hpp"
#include "kuramoto/phasor.hpp"
#include "kuramoto/surrogate.hpp"

namespace kuramoto {
namespace {

constexpr std::size_t kResyncInterval = 64;
constexpr std::size_t kProbeSteps = 8192;
constexpr double kMaxAliasedMass = 0.01;
constexpr std::size_t kTrialLanes = 4;

double recording_step(const SimParams& params, const ImfParams& imf) {
  return imf.sample_dt > 0.0 ? imf.sample_dt : params.dt;
}

Spectrum smoothed_for_comparison(const Spectrum& s, double bin) {
  if (bin <= s.d_omega * (1.0 + 1e-9)) return s;
  return smooth_spectrum(s, bin);
}

struct EffectiveGrid {
  std::size_t n_int;
  std::size_t stride;
  double rec_dt;
  double dt;
};

/// L trials stepped in lockstep. Each lane does exactly the single-trial
/// arithmetic; interleaving only hides the latency of the phase update.
template <std::size_t L>
void run_effective(const EffectiveGrid& g, double noise_intensity, std::span<const double> freqs,
                   std::span<const ComplexSeries> noises, std::span<RngStream> streams,
                   std::span<ComplexSeries> out) {
  const std::size_t n_int = g.n_int;
  const std::size_t n_rec = n_int / g.stride;
  const double dt = g.dt;
  const double amp = std::sqrt(2.0 * noise_intensity * dt);
  const bool noisy = noise_intensity > 0.0;
  const std::size_t probe_steps = g.stride > 1 ? std::min(kProbeSteps, n_int) : 0;

  std::array<double, L> theta, pr, pi;
  std::array<const std::complex<double>*, L> zeta;
  std::array<std::vector<std::complex<double>>, L> probe;
  for (std::size_t b = 0; b < L; ++b) {
    out[b] = ComplexSeries{dt * static_cast<double>(n_int), g.rec_dt, std::vector<std::complex<double>>(n_rec)};
    theta[b] = 2.0 * std::numbers::pi * streams[b].uniform();
    zeta[b] = noises[b].values.data();
    probe[b].reserve(probe_steps);
  }

  for (std::size_t step = 0; step < 2 * n_int; ++step) {
    const bool second = step >= n_int;
    const std::size_t rel = step - n_int;
    const std::size_t at = second ? rel : step;
    const bool resync = step % kResyncInterval == 0;
    const bool record = second && rel % g.stride == 0;
    const bool probing = second && rel < probe_steps;
    bool finite = true;
    for (std::size_t b = 0; b < L; ++b) {
      if (resync) {
        const std::complex<double> p = std::polar(1.0, theta[b]);
        pr[b] = p.real();
        pi[b] = p.imag();
      }
      if (record) out[b].values[rel / g.stride] = {pr[b], pi[b]};
      if (probing) probe[b].emplace_back(pr[b], pi[b]);
      const std::complex<double> z = zeta[b][at];
      double delta = (freqs[b] + coupling_drive({pr[b], pi[b]}, z)) * dt;
      if (noisy) delta += amp * streams[b].normal();
      theta[b] += delta;
      finite = finite && theta[b] - theta[b] == 0.0;
      const std::complex<double> u = unit_phasor(delta);
      const double re = pr[b] * u.real() - pi[b] * u.imag();
      pi[b] = pr[b] * u.imag() + pi[b] * u.real();
      pr[b] = re;
    }
    if (!finite) {
      for (std::size_t b = 0; b < L; ++b) {
        if (std::isfinite(theta[b])) continue;
        std::ostringstream msg;
        msg << "simulate_effective: non-finite phase at step " << step << " (freq " << freqs[b] << ", zeta "
            << zeta[b][at] << ")";
        throw NumericalError(msg.str());
      }
    }
  }
  if (probe_steps < 2) return;
  for (std::size_t b = 0; b < L; ++b) {
    const double aliased = mass_above_nyquist(probe[b], dt, g.rec_dt);
    if (aliased > kMaxAliasedMass) {
      std::ostringstream msg;
      msg << "simulate_effective: sample_dt = " << g.rec_dt << " would alias " << 100.0 * aliased
          << "% of the pointer spectrum";
      throw NumericalError(msg.str());
    }
  }
}

/// Mean pointer periodogram over `n_trials` effective runs. trial_streams(q)
/// returns the (noise, diffusion) stream pair and freq_of(q) the
/// eigenfrequency of trial q.
template <typename Streams, typename Freq>
Spectrum mean_effective_spectrum(const Spectrum& noise_target, const SimParams& params, double sample_dt,
                                 std::size_t n_trials, Streams&& trial_streams, Freq&& freq_of) {
  const std::size_t n_rec = checked_ratio(params.window, sample_dt, "window");
  const std::size_t n_groups = (n_trials + kTrialLanes - 1) / kTrialLanes;
  Spectrum out = periodogram_grid(n_rec, sample_dt);
  out.values = kernels::parallel::ordered_sum(n_groups, n_rec, [&](std::size_t g, std::span<double> acc) {
    const std::size_t first = g * kTrialLanes;
    const std::size_t last = std::min(n_trials, first + kTrialLanes);
    std::vector<double> freqs;
    std::vector<ComplexSeries> noises;
    std::vector<RngStream> diffusion;
    for (std::size_t q = first; q < last; ++q) {
      auto [noise_stream, diffusion_stream] = trial_streams(q);
      noises.push_back(noise_from_spectrum(noise_target, params.window, params.dt, noise_stream));
      diffusion.push_back(std::move(diffusion_stream));
      freqs.push_back(freq_of(q));
    }
    const auto pointers =
        simulate_effective_batch(freqs, noises, params.noise_intensity, params.dt, diffusion, sample_dt);
    std::vector<std::complex<double>> scratch(n_rec);
    for (const auto& pointer : pointers) accumulate_periodogram(pointer.values, sample_dt, acc, scratch);
  });
  const double inv = 1.0 / static_cast<double>(n_trials);
  for (auto& v : out.values) v *= inv;
  return out;
}

}  // namespace

void ImfParams::validate() const {
  if (n_freqs < 1) throw std::invalid_argument("imf: n_freqs must be positive");
  if (trials_per_freq < 1) throw std::invalid_argument("imf: trials_per_freq must be positive");
  if (max_iters < 1) throw std::invalid_argument("imf: max_iters must be positive");
  if (!(conv_tol > 0.0)) throw std::invalid_argument("imf: conv_tol must be positive");
  if (!(relax > 0.0 && relax <= 1.0)) throw std::invalid_argument("imf: relax must lie in (0, 1]");
  if (sample_dt < 0.0) throw std::invalid_argument("imf: sample_dt must be >= 0");
  if (fixed_freqs && fixed_freqs->size() != n_freqs) {
    throw std::invalid_argument("imf: fixed frequency list must have n_freqs entries");
  }
}

std::vector<ComplexSeries> simulate_effective_batch(std::span<const double> freqs,
                                                    std::span<const ComplexSeries> noises, double noise_intensity,
                                                    double dt, std::span<RngStream> streams, double sample_dt) {
  if (freqs.size() != noises.size() || freqs.size() != streams.size()) {
    throw std::invalid_argument("simulate_effective: freqs, noises and streams differ in length");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("simulate_effective: dt must be positive");
  if (freqs.empty()) return {};
  const std::size_t n_int = noises[0].size();
  for (const auto& noise : noises) {
    if (std::abs(noise.sample_dt - dt) > 1e-9 * dt) {
      throw std::invalid_argument("simulate_effective: noise must be sampled on the integration grid");
    }
    if (noise.size() != n_int) throw std::invalid_argument("simulate_effective: noise series differ in length");
  }
  if (n_int < 2) throw std::invalid_argument("simulate_effective: noise series too short");
  const double rec_dt = sample_dt > 0.0 ? sample_dt : dt;
  const std::size_t stride = checked_ratio(rec_dt, dt, "sample_dt");
  if (n_int % stride != 0) throw std::invalid_argument("simulate_effective: window is not a multiple of sample_dt");

  const EffectiveGrid grid{n_int, stride, rec_dt, dt};
  std::vector<ComplexSeries> out(freqs.size());
  for (std::size_t first = 0; first < freqs.size(); first += kTrialLanes) {
    const std::size_t lanes = std::min(kTrialLanes, freqs.size() - first);
    const auto run = [&]<std::size_t L>() {
      run_effective<L>(grid, noise_intensity, freqs.subspan(first, L), noises.subspan(first, L),
                       streams.subspan(first, L), std::span(out).subspan(first, L));
    };
    switch (lanes) {
      case 1: run.template operator()<1>(); break;
      case 2: run.template operator()<2>(); break;
      case 3: run.template operator()<3>(); break;
      default: run.template operator()<4>(); break;
    }
  }
  return out;
}

ComplexSeries simulate_effective(double freq, const ComplexSeries& noise, double noise_intensity, double dt,
                                 RngStream& stream, double sample_dt) {
  return std::move(simulate_effective_batch(std::span(&freq, 1), std::span(&noise, 1), noise_intensity, dt,
                                            std::span(&stream, 1), sample_dt)[0]);
}

ImfState imf_iterate(const SimParams& params, const ImfParams& imf) {
  params.validate();
  imf.validate();
  const double factor = SimParams::noise_scale(params.coupling_disorder, params.mean_coupling, imf.n_freqs);
  if (!(factor > 0.0)) {
    throw std::invalid_argument("imf: k^2 + K^2/N must be positive, otherwise there is no network noise");
  }
  const double sample_dt = recording_step(params, imf);
  const std::size_t n_rec = checked_ratio(params.window, sample_dt, "window");
  checked_ratio(sample_dt, params.dt, "sample_dt");

  ImfState state;
  const Spectrum grid = periodogram_grid(n_rec, sample_dt);
  if (const auto* lor = std::get_if<LorentzianSpectrum>(&imf.init_spectrum)) {
    state.noise_spectrum = analytic_spectrum(*lor, grid);
  } else {
    state.noise_spectrum = std::get<Spectrum>(imf.init_spectrum);
    require_same_grid(state.noise_spectrum, grid);
    for (double v : state.noise_spectrum.values) {
      if (!(v >= 0.0)) throw std::invalid_argument("imf: initial spectrum must be nonnegative");
    }
  }
  if (imf.keep_iterates) state.iterates.push_back(state.noise_spectrum);

  const std::size_t m = imf.trials_per_freq;
  std::vector<double> freqs(imf.n_freqs);
  for (std::size_t it = 1; it <= imf.max_iters; ++it) {
    if (imf.fixed_freqs) {
      freqs = *imf.fixed_freqs;
    } else {
      RngStream fs(params.seed, {Purpose::ImfFrequencies, it});
      for (auto& w : freqs) w = params.freq_spread * fs.normal();
    }
    const Spectrum s_z = mean_effective_spectrum(
        state.noise_spectrum, params, sample_dt, imf.total_trials(),
        [&](std::size_t q) {
          return std::pair{RngStream(params.seed, {Purpose::SurrogateNoise, it, q}),
                           RngStream(params.seed, {Purpose::EffectiveDiffusion, it, q})};
        },
        [&](std::size_t q) { return freqs[q / m]; });

    Spectrum next = state.noise_spectrum;
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double candidate = factor * s_z.values[i];
      next.values[i] = imf.relax == 1.0 ? candidate : (1.0 - imf.relax) * next.values[i] + imf.relax * candidate;
    }
    const double dist = spectral_distance(smoothed_for_comparison(next, imf.smoothing_bin),
                                          smoothed_for_comparison(state.noise_spectrum, imf.smoothing_bin));
    state.noise_spectrum = std::move(next);
    state.pointer_spectrum = s_z;
    state.iter = it;
    state.history.push_back(dist);
    if (imf.keep_iterates) state.iterates.push_back(state.noise_spectrum);
    if (dist < imf.conv_tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

Spectrum single_oscillator_spectrum(const ImfState& converged, double freq, const SimParams& params,
                                    const ImfParams& imf, std::size_t trials, std::uint64_t stream_index) {
  if (trials < 1) throw std::invalid_argument("single_oscillator_spectrum: need at least one trial");
  if (converged.noise_spectrum.values.empty()) throw std::invalid_argument("single_oscillator_spectrum: empty state");
  params.validate();
  const double sample_dt = recording_step(params, imf);
  const Spectrum raw = mean_effective_spectrum(
      converged.noise_spectrum, params, sample_dt, trials,
      [&](std::size_t q) {
        return std::pair{RngStream(params.seed, {Purpose::SingleOscillator, stream_index, 2 * q}),
                         RngStream(params.seed, {Purpose::SingleOscillator, stream_index, 2 * q + 1})};
      },
      [freq](std::size_t) { return freq; });
  return smoothed_for_comparison(raw, imf.smoothing_bin);
}

NoiseRelationReport noise_relation_check(const TrajectoryRecording& rec, const SimParams& params,
                                         double smoothing_bin) {
  if (rec.noise.empty()) throw std::invalid_argument("noise_relation_check: run did not record network noise");
  NoiseRelationReport report;
  report.factor = params.noise_scale();
  const Spectrum s_z = mean_pointer_spectrum(rec);
  const Spectrum s_zeta = mean_noise_spectrum(rec);
  report.measured = smoothed_for_comparison(s_zeta, smoothing_bin);
  report.predicted = smoothed_for_comparison(scaled(s_z, report.factor), smoothing_bin);
  report.distance = spectral_distance(report.measured, report.predicted);
  return report;
}

}  // namespace kuramoto
