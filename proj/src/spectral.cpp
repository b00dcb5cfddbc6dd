#include "kuramoto/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kuramoto/errors.hpp"
#include "kuramoto/fft.hpp"

namespace kuramoto {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::ptrdiff_t floor_div(std::ptrdiff_t a, std::ptrdiff_t b) {
  std::ptrdiff_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::size_t wrap_index(std::ptrdiff_t j, std::size_t n) {
  const auto nn = static_cast<std::ptrdiff_t>(n);
  std::ptrdiff_t r = j % nn;
  if (r < 0) r += nn;
  return static_cast<std::size_t>(r);
}

}  // namespace

ComplexSeries make_series(std::span<const double> times, std::span<const std::complex<double>> values) {
  if (times.size() != values.size()) throw std::invalid_argument("make_series: times and values differ in length");
  if (times.size() < 2) throw std::invalid_argument("make_series: need at least two samples");
  const double h = times[1] - times[0];
  if (!(h > 0.0)) throw std::invalid_argument("make_series: times must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double expected = times[0] + h * static_cast<double>(i);
    if (std::abs(times[i] - expected) > 1e-9 * std::max(std::abs(expected), h)) {
      throw std::invalid_argument("make_series: non-uniform sampling at index " + std::to_string(i));
    }
  }
  return ComplexSeries{times[0], h, std::vector<std::complex<double>>(values.begin(), values.end())};
}

Spectrum periodogram_grid(std::size_t n, double sample_dt) {
  if (n < 2) throw std::invalid_argument("periodogram needs at least two samples");
  if (!(sample_dt > 0.0)) throw std::invalid_argument("sample_dt must be positive");
  const double window = sample_dt * static_cast<double>(n);
  Spectrum s;
  s.d_omega = kTwoPi / window;
  s.omega0 = -static_cast<double>(n / 2) * s.d_omega;
  s.values.assign(n, 0.0);
  return s;
}

void accumulate_periodogram(std::span<const std::complex<double>> values, double sample_dt, std::span<double> acc,
                            std::span<std::complex<double>> scratch) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("periodogram needs at least two samples");
  if (acc.size() != n || scratch.size() != n) throw std::invalid_argument("accumulate_periodogram: size mismatch");
  fft::transform(values, scratch, fft::Sign::Minus);
  const double window = sample_dt * static_cast<double>(n);
  const double scale = sample_dt * sample_dt / window;
  const auto j_min = -static_cast<std::ptrdiff_t>(n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    acc[i] += std::norm(scratch[wrap_index(j_min + static_cast<std::ptrdiff_t>(i), n)]) * scale;
  }
}

Spectrum periodogram(std::span<const std::complex<double>> values, double sample_dt) {
  Spectrum s = periodogram_grid(values.size(), sample_dt);
  std::vector<std::complex<double>> scratch(values.size());
  accumulate_periodogram(values, sample_dt, s.values, scratch);
  return s;
}

Spectrum periodogram(const ComplexSeries& series) { return periodogram(series.values, series.sample_dt); }

Spectrum smooth_spectrum(const Spectrum& spec, double target_bin) {
  const std::size_t n = spec.size();
  if (n == 0) throw std::invalid_argument("smooth_spectrum: empty spectrum");
  if (target_bin < spec.d_omega * (1.0 - 1e-9)) {
    throw std::invalid_argument("smooth_spectrum: target bin is narrower than the native resolution");
  }
  const auto m = static_cast<std::size_t>(std::ceil(target_bin / spec.d_omega - 1e-9));
  if (m > n) throw std::invalid_argument("smooth_spectrum: target bin exceeds the grid");
  if (m == 1) return spec;

  // On-grid input: native bin j = j0 + i and block b covers j in
  // [b*m - m/2, b*m - m/2 + m), so blocks are centred on multiples of m.
  // Off-grid input: blocks start at the first bin. If m divides n the grid is
  // treated as periodic and the block straddling the edge wraps around;
  // otherwise overhanging blocks count the missing bins as zero. Both keep
  // the total power exact.
  const auto j0 = static_cast<std::ptrdiff_t>(std::llround(spec.omega0 / spec.d_omega));
  const bool on_grid = std::abs(spec.omega0 / spec.d_omega - static_cast<double>(j0)) < 1e-6;
  const auto mm = static_cast<std::ptrdiff_t>(m);
  const std::ptrdiff_t first = on_grid ? j0 : 0;
  const std::ptrdiff_t shift = on_grid ? mm / 2 : 0;
  const std::ptrdiff_t last = first + static_cast<std::ptrdiff_t>(n) - 1;
  const std::ptrdiff_t b_lo = floor_div(first + shift, mm);
  const bool periodic = on_grid && n % m == 0;
  const std::size_t n_out =
      periodic ? n / m : static_cast<std::size_t>(floor_div(last + shift, mm) - b_lo + 1);

  Spectrum out;
  out.d_omega = spec.d_omega * static_cast<double>(m);
  out.values.assign(n_out, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::ptrdiff_t j = first + static_cast<std::ptrdiff_t>(i);
    auto o = static_cast<std::size_t>(floor_div(j + shift, mm) - b_lo);
    if (o >= n_out) o -= n_out;
    out.values[o] += spec.values[i];
  }
  for (auto& v : out.values) v /= static_cast<double>(m);
  const double centre = static_cast<double>(b_lo * mm - shift) + 0.5 * static_cast<double>(mm - 1);
  out.omega0 = on_grid ? centre * spec.d_omega : spec.omega0 + centre * spec.d_omega;
  return out;
}

bool same_grid(const Spectrum& a, const Spectrum& b) {
  if (a.size() != b.size()) return false;
  if (std::abs(a.d_omega - b.d_omega) > 1e-9 * a.d_omega) return false;
  return std::abs(a.omega0 - b.omega0) <= 1e-6 * a.d_omega;
}

void require_same_grid(const Spectrum& a, const Spectrum& b) {
  if (!same_grid(a, b)) {
    throw GridMismatch("spectra are on different grids (" + std::to_string(a.size()) + " bins from " +
                       std::to_string(a.omega0) + " vs " + std::to_string(b.size()) + " bins from " +
                       std::to_string(b.omega0) + ")");
  }
}

Spectrum average_spectra(std::span<const Spectrum> specs) {
  if (specs.empty()) throw std::invalid_argument("average_spectra: no spectra");
  Spectrum out = specs.front();
  for (std::size_t s = 1; s < specs.size(); ++s) {
    require_same_grid(out, specs[s]);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += specs[s].values[i];
  }
  const double inv = 1.0 / static_cast<double>(specs.size());
  for (auto& v : out.values) v *= inv;
  return out;
}

double analytic_value(const AnalyticKind& kind, double omega) {
  return std::visit(
      [omega](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, KuboSpectrum>) {
          const double d = k.noise_intensity;
          return 2.0 * d / (d * d + omega * omega);
        } else if constexpr (std::is_same_v<K, GaussianFreqSpectrum>) {
          const double s = k.freq_spread;
          return std::sqrt(kTwoPi) * std::exp(-omega * omega / (2.0 * s * s)) / s;
        } else {
          return k.a / (std::numbers::pi * std::numbers::pi + k.b * omega * omega);
        }
      },
      kind);
}

Spectrum analytic_spectrum(const AnalyticKind& kind, const Spectrum& grid) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, KuboSpectrum>) {
          if (!(k.noise_intensity > 0.0)) throw std::invalid_argument("Kubo spectrum needs D > 0");
        } else if constexpr (std::is_same_v<K, GaussianFreqSpectrum>) {
          if (!(k.freq_spread > 0.0)) throw std::invalid_argument("Gaussian spectrum needs sigma > 0");
        } else {
          if (!(k.a > 0.0) || !(k.b > 0.0)) throw std::invalid_argument("Lorentzian needs a, b > 0");
        }
      },
      kind);
  Spectrum out = grid;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = analytic_value(kind, out.omega(i));
  return out;
}

double spectral_distance(const Spectrum& a, const Spectrum& b) {
  require_same_grid(a, b);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::abs(a.values[i] - b.values[i]);
    den += std::abs(b.values[i]);
  }
  if (den == 0.0) throw std::invalid_argument("spectral_distance: reference spectrum is identically zero");
  return num / den;
}

double spectrum_integral(const Spectrum& spec) {
  double sum = 0.0;
  for (double v : spec.values) sum += v;
  return sum * spec.d_omega / kTwoPi;
}

Spectrum scaled(const Spectrum& spec, double factor) {
  Spectrum out = spec;
  for (auto& v : out.values) v *= factor;
  return out;
}

Spectrum restrict_band(const Spectrum& spec, double half_width) {
  Spectrum out;
  out.d_omega = spec.d_omega;
  bool first = true;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double w = spec.omega(i);
    if (std::abs(w) <= half_width) {
      if (first) {
        out.omega0 = w;
        first = false;
      }
      out.values.push_back(spec.values[i]);
    }
  }
  if (out.values.empty()) throw std::invalid_argument("restrict_band: no bins inside the band");
  return out;
}

double value_at(const Spectrum& spec, double omega) {
  if (spec.values.empty()) throw std::invalid_argument("value_at: empty spectrum");
  const double pos = (omega - spec.omega0) / spec.d_omega;
  const auto i = static_cast<std::ptrdiff_t>(std::llround(pos));
  if (i < 0 || i >= static_cast<std::ptrdiff_t>(spec.size())) throw std::out_of_range("value_at: omega outside grid");
  return spec.values[static_cast<std::size_t>(i)];
}

Peak find_peak(const Spectrum& spec) {
  if (spec.values.empty()) throw std::invalid_argument("find_peak: empty spectrum");
  const auto it = std::max_element(spec.values.begin(), spec.values.end());
  Peak p;
  p.index = static_cast<std::size_t>(it - spec.values.begin());
  p.omega = spec.omega(p.index);
  p.height = *it;
  return p;
}

double half_height_width(const Spectrum& spec) {
  const Peak p = find_peak(spec);
  const double half = 0.5 * p.height;
  // Walk outwards until the value drops below half height, then interpolate.
  std::size_t r = p.index;
  while (r + 1 < spec.size() && spec.values[r + 1] >= half) ++r;
  double right = spec.omega(r);
  if (r + 1 < spec.size()) {
    const double v0 = spec.values[r], v1 = spec.values[r + 1];
    right += spec.d_omega * (v0 - half) / (v0 - v1);
  }
  std::size_t l = p.index;
  while (l > 0 && spec.values[l - 1] >= half) --l;
  double left = spec.omega(l);
  if (l > 0) {
    const double v0 = spec.values[l], v1 = spec.values[l - 1];
    left -= spec.d_omega * (v0 - half) / (v0 - v1);
  }
  return right - left;
}

}  // namespace kuramoto
