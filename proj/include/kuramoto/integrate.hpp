#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kuramoto/model.hpp"
#include "kuramoto/params.hpp"
#include "kuramoto/rng.hpp"
#include "kuramoto/spectral.hpp"

namespace kuramoto {

/// What simulate_network keeps after the transient.
struct RecordingRequest {
  double sample_dt = 0.0;                            // 0 means params.dt
  std::optional<std::vector<std::size_t>> oscillators;  // nullopt means all
  bool record_noise = false;                         // zeta_l for the selected oscillators
  bool record_order = false;                         // r(t) over the whole network
};

struct TrajectoryRecording {
  double start_time = 0.0;
  double sample_dt = 0.0;
  std::size_t n_samples = 0;
  std::vector<std::size_t> oscillators;
  std::vector<std::complex<double>> pointers;  // n_samples x oscillators.size(), time-major
  std::vector<std::complex<double>> noise;     // same layout, empty unless requested
  std::vector<double> order;                   // r(t), empty unless requested
  PhaseState final_state;

  std::size_t n_selected() const { return oscillators.size(); }
  std::complex<double> pointer(std::size_t t, std::size_t s) const { return pointers[t * oscillators.size() + s]; }
  ComplexSeries pointer_series(std::size_t s) const;
  ComplexSeries noise_series(std::size_t s) const;
  /// Time average of r over the recorded window.
  double mean_order() const;
};

/// Drift of the phase vector: out[l] = d theta_l / dt.
using DriftFn = std::function<void(std::span<const double> phases, std::span<double> out)>;

/// Reference drift omega_l + sum_m K_lm sin(theta_m - theta_l), evaluated
/// directly with one sin per pair.
DriftFn network_drift(const DisorderRealization& disorder);

/// Classical fourth-order step; state.time advances by dt.
void rk4_step(PhaseState& state, const DriftFn& drift, double dt);

/// theta += drift*dt + sqrt(2 D dt) g, one standard normal per oscillator
/// drawn in index order from `stream`.
void euler_maruyama_step(PhaseState& state, const DriftFn& drift, double noise_intensity, double dt,
                         RngStream& stream);
/// Same, with oscillator l drawing from streams[l].
void euler_maruyama_step(PhaseState& state, const DriftFn& drift, double noise_intensity, double dt,
                         std::span<RngStream> streams);

/// Integrates the network from init over [0, t_d + T], discards the
/// transient and records on a uniform grid. Euler-Maruyama diffusion for
/// oscillator l comes from stream (NetworkDiffusion, l) of params.seed.
/// Throws NumericalError if dt * (|omega_l| + sum_m |K_lm|) > 1 for some l,
/// on non-finite phases, or when recording coarser than dt would alias more
/// than 1% of the spectral mass.
TrajectoryRecording simulate_network(const SimParams& params, const DisorderRealization& disorder,
                                     const PhaseState& init, const RecordingRequest& request);

/// Integrates without recording and returns the state at `duration`.
PhaseState advance_network(const SimParams& params, const DisorderRealization& disorder, const PhaseState& init,
                           double duration);

/// Largest per-oscillator endpoint phase error of RK4 at params.dt over
/// `horizon`, estimated by Richardson extrapolation against dt/2.
double rk4_self_convergence_error(const SimParams& params, const DisorderRealization& disorder,
                                  const PhaseState& init, double horizon = 1.0);

/// Halves params.dt until rk4_self_convergence_error < tol (at most 12 halvings).
double select_rk4_dt(const SimParams& params, const DisorderRealization& disorder, const PhaseState& init,
                     double tol = 1e-6);

/// Fraction of periodogram mass of a fine-grid series lying above the
/// Nyquist frequency pi / coarse_dt.
double mass_above_nyquist(std::span<const std::complex<double>> fine, double fine_dt, double coarse_dt);

/// Network-averaged pointer spectrum (mean periodogram over the selected
/// oscillators), reduced in a thread-count independent order.
Spectrum mean_pointer_spectrum(const TrajectoryRecording& rec);
/// Mean periodogram of the recorded network noise series.
Spectrum mean_noise_spectrum(const TrajectoryRecording& rec);

}  // namespace kuramoto
