#pragma once

#include <complex>
#include <span>

namespace kuramoto::fft {

/// Sign of the exponent in the transform kernel.
enum class Sign { Plus, Minus };

/// out[j] = sum_n in[n] * exp(sign * 2*pi*i * j*n / N), unnormalized.
/// Backed by FFTW with estimate-mode plans (bitwise reproducible between
/// runs); plans are cached per (N, sign) and execution is thread-safe.
void transform(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, Sign sign);

}  // namespace kuramoto::fft
