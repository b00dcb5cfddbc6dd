#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "kuramoto/integrate.hpp"
#include "kuramoto/params.hpp"
#include "kuramoto/rng.hpp"
#include "kuramoto/spectral.hpp"

namespace kuramoto {

struct ImfParams {
  /// Frequencies per iteration; also the network size N entering k^2 + K^2/N.
  std::size_t n_freqs = 1000;
  std::size_t trials_per_freq = 1;  // M
  std::size_t max_iters = 50;
  double conv_tol = 1e-2;
  double relax = 1.0;
  std::variant<LorentzianSpectrum, Spectrum> init_spectrum = LorentzianSpectrum{2.0, 20.0};
  /// Fixed eigenfrequencies (one per n_freqs); nullopt redraws n_freqs
  /// N(0, sigma^2) values every iteration.
  std::optional<std::vector<double>> fixed_freqs;
  double sample_dt = 0.0;  // pointer recording step, 0 means params.dt
  /// Bin used when comparing successive iterates.
  double smoothing_bin = kDefaultSmoothingBin;
  bool keep_iterates = false;

  void validate() const;
  std::size_t total_trials() const { return n_freqs * trials_per_freq; }
};

struct ImfState {
  Spectrum noise_spectrum;    // current S_zeta on the native grid
  Spectrum pointer_spectrum;  // S_z from the latest iteration
  std::size_t iter = 0;
  /// Smoothed spectral distance between successive S_zeta iterates.
  std::vector<double> history;
  bool converged = false;
  /// S_zeta after every iteration, starting with the initial spectrum;
  /// filled only when keep_iterates is set.
  std::vector<Spectrum> iterates;
};

/// Euler-Maruyama integration of
///   d theta = (freq + Im(e^{-i theta} zeta(t))) dt + sqrt(2 D) dW
/// driven by the T-periodic `noise` (sampled at dt, length T/dt). One full
/// window is run as transient, reusing the periodic noise, and the pointer
/// e^{i theta} is recorded over the second window every sample_dt
/// (0 means dt). The initial phase is uniform, drawn from `stream`.
ComplexSeries simulate_effective(double freq, const ComplexSeries& noise, double noise_intensity, double dt,
                                 RngStream& stream, double sample_dt = 0.0);

/// simulate_effective for several trials at once; result b equals the
/// single call with freqs[b], noises[b] and streams[b], bit for bit. All
/// noises must have the same length.
std::vector<ComplexSeries> simulate_effective_batch(std::span<const double> freqs,
                                                    std::span<const ComplexSeries> noises, double noise_intensity,
                                                    double dt, std::span<RngStream> streams, double sample_dt = 0.0);

/// Self-consistent network-noise spectrum by iterating
///   S_zeta <- (1 - relax) S_zeta + relax (k^2 + K^2/N) S_z
/// where S_z is the mean pointer periodogram of n_freqs x M effective runs
/// under surrogate noise drawn from the current S_zeta. Uses params.dt,
/// window, D, sigma_omega, k, K and seed. Stops when the history distance
/// drops below conv_tol or after max_iters (then converged = false).
ImfState imf_iterate(const SimParams& params, const ImfParams& imf);

/// Trial-averaged pointer spectrum of an oscillator with fixed eigenfrequency
/// `freq` under fresh noise from the converged S_zeta, smoothed at
/// imf.smoothing_bin. stream_index separates independent calls.
Spectrum single_oscillator_spectrum(const ImfState& converged, double freq, const SimParams& params,
                                    const ImfParams& imf, std::size_t trials, std::uint64_t stream_index = 0);

struct NoiseRelationReport {
  double factor = 0.0;       // k^2 + K^2/N
  Spectrum measured;         // mean periodogram of zeta_l, smoothed
  Spectrum predicted;        // factor * S_z, smoothed
  double distance = 0.0;     // spectral_distance(measured, predicted)
};

/// Compares both sides of S_zeta = (k^2 + K^2/N) S_z within one network run.
NoiseRelationReport noise_relation_check(const TrajectoryRecording& rec, const SimParams& params,
                                         double smoothing_bin = kDefaultSmoothingBin);

}  // namespace kuramoto
