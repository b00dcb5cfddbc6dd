#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

namespace kuramoto {

/// Uniformly sampled complex series starting at t0.
struct ComplexSeries {
  double t0 = 0.0;
  double sample_dt = 1.0;
  std::vector<std::complex<double>> values;

  std::size_t size() const { return values.size(); }
  double duration() const { return sample_dt * static_cast<double>(values.size()); }
};

/// Builds a ComplexSeries from explicit sample times; throws if the times
/// are not uniformly spaced (relative tolerance 1e-9).
ComplexSeries make_series(std::span<const double> times, std::span<const std::complex<double>> values);

/// Two-sided power spectral density on the grid omega_i = omega0 + i*d_omega.
struct Spectrum {
  double omega0 = 0.0;
  double d_omega = 1.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double omega(std::size_t i) const { return omega0 + d_omega * static_cast<double>(i); }
  /// Observation window T = 2*pi / d_omega.
  double window() const { return 2.0 * std::numbers::pi / d_omega; }
};

/// Native periodogram grid of a series with n samples spaced sample_dt:
/// omega_j = 2*pi*j/T for j in [-floor(n/2), n - floor(n/2)), zero values.
Spectrum periodogram_grid(std::size_t n, double sample_dt);

/// S(omega_j) = |sample_dt * sum_n x_n exp(-i omega_j t_n)|^2 / T with t_n
/// measured from the start of the series. Not symmetrized; a pointer
/// rotating at +w0 peaks at omega = +w0.
Spectrum periodogram(const ComplexSeries& series);
Spectrum periodogram(std::span<const std::complex<double>> values, double sample_dt);

/// Adds the periodogram of `values` into `acc` (laid out as periodogram_grid)
/// using caller-provided scratch of the same length.
void accumulate_periodogram(std::span<const std::complex<double>> values, double sample_dt, std::span<double> acc,
                            std::span<std::complex<double>> scratch);

inline constexpr double kDefaultSmoothingBin = 2.0 * std::numbers::pi / 100.0;

/// Boxcar average over m = ceil(target_bin / d_omega) adjacent bins. Blocks
/// are centred on multiples of m native bins. When m divides the grid size
/// the grid is periodic and the edge block wraps around; otherwise blocks
/// overhanging the edges count missing bins as zero. Total power is
/// preserved either way.
Spectrum smooth_spectrum(const Spectrum& spec, double target_bin = kDefaultSmoothingBin);

/// Pointwise mean; throws GridMismatch on differing grids.
Spectrum average_spectra(std::span<const Spectrum> specs);

bool same_grid(const Spectrum& a, const Spectrum& b);
void require_same_grid(const Spectrum& a, const Spectrum& b);

struct KuboSpectrum {
  double noise_intensity;  // S = 2D / (D^2 + omega^2)
};
struct GaussianFreqSpectrum {
  double freq_spread;  // S = sqrt(2 pi) exp(-omega^2 / 2 sigma^2) / sigma
};
struct LorentzianSpectrum {
  double a = 2.0;  // S = a / (pi^2 + b omega^2)
  double b = 20.0;
};
using AnalyticKind = std::variant<KuboSpectrum, GaussianFreqSpectrum, LorentzianSpectrum>;

double analytic_value(const AnalyticKind& kind, double omega);
/// Closed form evaluated on the grid of `grid` (its values are ignored).
Spectrum analytic_spectrum(const AnalyticKind& kind, const Spectrum& grid);

/// sum|a - b| / sum|b| on a shared grid.
double spectral_distance(const Spectrum& a, const Spectrum& b);

/// Integral of S d omega / (2 pi).
double spectrum_integral(const Spectrum& spec);
Spectrum scaled(const Spectrum& spec, double factor);
/// Bins with |omega| <= half_width.
Spectrum restrict_band(const Spectrum& spec, double half_width);
/// Value at the bin nearest to omega.
double value_at(const Spectrum& spec, double omega);

struct Peak {
  std::size_t index = 0;
  double omega = 0.0;
  double height = 0.0;
};
Peak find_peak(const Spectrum& spec);
/// Full width at half maximum around the global peak, with linear
/// interpolation of both half-height crossings.
double half_height_width(const Spectrum& spec);

}  // namespace kuramoto
