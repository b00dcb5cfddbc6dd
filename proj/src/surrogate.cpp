#include "kuramoto/surrogate.hpp"

#include <cmath>
#include <stdexcept>

#include "kuramoto/fft.hpp"
#include "kuramoto/params.hpp"

namespace kuramoto {

ComplexSeries noise_from_spectrum(const Spectrum& target, double window, double sample_dt, RngStream& stream) {
  if (!(window > 0.0) || !(sample_dt > 0.0)) throw std::invalid_argument("window and sample_dt must be positive");
  const std::size_t n = checked_ratio(window, sample_dt, "window");
  if (n < 2) throw std::invalid_argument("noise_from_spectrum: need at least two samples");
  const double d_omega = 2.0 * std::numbers::pi / window;
  if (std::abs(target.d_omega - d_omega) > 1e-9 * d_omega) {
    throw std::invalid_argument("noise_from_spectrum: target bin width does not match the window");
  }
  const double first = target.omega0 / d_omega;
  const auto j_first = static_cast<std::ptrdiff_t>(std::llround(first));
  if (std::abs(first - static_cast<double>(j_first)) > 1e-6) {
    throw std::invalid_argument("noise_from_spectrum: target is not on the native frequency grid");
  }
  const auto j_lo = -static_cast<std::ptrdiff_t>(n / 2);
  const auto j_hi = static_cast<std::ptrdiff_t>(n - n / 2);  // exclusive
  const auto j_last = j_first + static_cast<std::ptrdiff_t>(target.size());
  if (j_first < j_lo || j_last > j_hi) {
    throw std::invalid_argument("noise_from_spectrum: target extends beyond the output Nyquist frequency");
  }
  for (double v : target.values) {
    if (!(v >= 0.0)) throw std::invalid_argument("noise_from_spectrum: negative or NaN spectrum value");
  }

  std::vector<std::complex<double>> coeffs(n, {0.0, 0.0});
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double g = stream.normal();
    const double g2 = stream.normal();
    const double amp = std::sqrt(target.values[i] * window / 2.0);
    auto j = j_first + static_cast<std::ptrdiff_t>(i);
    if (j < 0) j += static_cast<std::ptrdiff_t>(n);
    coeffs[static_cast<std::size_t>(j)] = {g * amp, g2 * amp};
  }
  // periodogram uses x~_j = h sum_n x_n e^{-i w_j t_n}; its inverse is
  // x_n = (1/T) sum_j x~_j e^{+i w_j t_n}.
  ComplexSeries out{0.0, sample_dt, std::vector<std::complex<double>>(n)};
  fft::transform(coeffs, out.values, fft::Sign::Plus);
  const double inv_t = 1.0 / window;
  for (auto& v : out.values) v *= inv_t;
  return out;
}

}  // namespace kuramoto
