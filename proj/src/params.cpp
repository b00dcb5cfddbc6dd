#include "kuramoto/params.hpp"

#include <cmath>
#include <stdexcept>

namespace kuramoto {

std::string_view to_string(Integrator integrator) {
  switch (integrator) {
    case Integrator::RungeKutta4: return "rk4";
    case Integrator::EulerMaruyama: return "euler_maruyama";
  }
  return "unknown";
}

Integrator integrator_from_string(std::string_view name) {
  if (name == "rk4" || name == "runge_kutta4") return Integrator::RungeKutta4;
  if (name == "euler_maruyama" || name == "em" || name == "euler") return Integrator::EulerMaruyama;
  throw std::invalid_argument("unknown integrator '" + std::string(name) + "'");
}

bool is_multiple_of(double value, double unit) {
  if (!(unit > 0.0)) return false;
  const double ratio = value / unit;
  const double nearest = std::round(ratio);
  return std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, std::abs(ratio));
}

std::size_t checked_ratio(double value, double unit, std::string_view what) {
  if (!is_multiple_of(value, unit)) {
    throw std::invalid_argument(std::string(what) + " is not an integer multiple of the step");
  }
  return static_cast<std::size_t>(std::llround(value / unit));
}

void SimParams::validate() const {
  if (n_osc < 1) throw std::invalid_argument("n_osc must be positive");
  if (!std::isfinite(mean_coupling)) throw std::invalid_argument("mean_coupling must be finite");
  if (!(coupling_disorder >= 0.0)) throw std::invalid_argument("coupling_disorder must be >= 0");
  if (!(freq_spread >= 0.0)) throw std::invalid_argument("freq_spread must be >= 0");
  if (!(noise_intensity >= 0.0)) throw std::invalid_argument("noise_intensity must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(window > 0.0)) throw std::invalid_argument("window must be positive");
  if (!(transient >= 0.0)) throw std::invalid_argument("transient must be >= 0");
  if (!is_multiple_of(window, dt)) throw std::invalid_argument("window must be an integer multiple of dt");
  if (!is_multiple_of(transient, dt)) throw std::invalid_argument("transient must be an integer multiple of dt");
  if (integrator == Integrator::RungeKutta4 && noise_intensity != 0.0) {
    throw std::invalid_argument("rk4 requires noise_intensity = 0; use euler_maruyama");
  }
}

std::size_t SimParams::steps_for(double duration) const { return checked_ratio(duration, dt, "duration"); }

double SimParams::noise_scale() const { return noise_scale(coupling_disorder, mean_coupling, n_osc); }

double SimParams::noise_scale(double coupling_disorder, double mean_coupling, std::size_t n) {
  return coupling_disorder * coupling_disorder + mean_coupling * mean_coupling / static_cast<double>(n);
}

}  // namespace kuramoto
