#pragma once

#include <cmath>
#include <complex>

namespace kuramoto {

/// Degree-13 Taylor polynomial of exp(i * delta); truncation error below
/// 1e-19 for |delta| <= 0.25.
inline std::complex<double> unit_phasor_taylor(double delta) {
  // 1/n! for n = 2..13
  constexpr double f2 = 1.0 / 2, f3 = f2 / 3, f4 = f3 / 4, f5 = f4 / 5, f6 = f5 / 6, f7 = f6 / 7, f8 = f7 / 8,
                   f9 = f8 / 9, f10 = f9 / 10, f11 = f10 / 11, f12 = f11 / 12, f13 = f12 / 13;
  // Estrin form in d2 and d4; shorter dependency chain than Horner.
  const double d2 = delta * delta;
  const double d4 = d2 * d2;
  const double c = (1.0 - f2 * d2) + d4 * ((f4 - f6 * d2) + d4 * ((f8 - f10 * d2) + d4 * f12));
  const double s = (1.0 - f3 * d2) + d4 * ((f5 - f7 * d2) + d4 * ((f9 - f11 * d2) + d4 * f13));
  return {c, delta * s};
}

inline constexpr double kTaylorPhasorLimit = 0.25;

/// exp(i * delta): the Taylor polynomial up to kTaylorPhasorLimit, sincos
/// beyond.
inline std::complex<double> unit_phasor(double delta) {
  if (std::abs(delta) > kTaylorPhasorLimit) return {std::cos(delta), std::sin(delta)};
  return unit_phasor_taylor(delta);
}

/// Im(conj(p) * z): the sine coupling Im(e^{-i theta} zeta) for p = e^{i theta}.
inline double coupling_drive(std::complex<double> p, std::complex<double> z) {
  return p.real() * z.imag() - p.imag() * z.real();
}

}  // namespace kuramoto
