#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace kuramoto {

enum class Integrator { RungeKutta4, EulerMaruyama };

std::string_view to_string(Integrator integrator);
Integrator integrator_from_string(std::string_view name);

/// Scalar knobs shared by network and mean-field runs. Times are in the
/// model's time units, frequencies in rad per time unit.
struct SimParams {
  std::size_t n_osc = 1000;        // N
  double mean_coupling = 0.0;      // K
  double coupling_disorder = 1.0;  // k
  double freq_spread = 1.0;        // sigma_omega
  double noise_intensity = 0.0;    // D
  double dt = 1e-2;
  double window = 1e3;             // T
  double transient = 1e3;          // t_d
  std::uint64_t seed = 1;
  Integrator integrator = Integrator::RungeKutta4;

  /// Throws std::invalid_argument on the first violated constraint.
  void validate() const;

  /// Number of integration steps covering `duration`; duration must be a
  /// multiple of dt up to rounding.
  std::size_t steps_for(double duration) const;

  /// Strength of the network noise relative to the mean pointer spectrum:
  /// k^2 + K^2/N.
  double noise_scale() const;
  static double noise_scale(double coupling_disorder, double mean_coupling, std::size_t n);
};

/// True when `value` is an integer multiple of `unit` within a relative
/// tolerance of 1e-9.
bool is_multiple_of(double value, double unit);

/// round(value / unit) after checking is_multiple_of.
std::size_t checked_ratio(double value, double unit, std::string_view what);

}  // namespace kuramoto
