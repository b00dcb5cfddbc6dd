#pragma once

#include "kuramoto/rng.hpp"
#include "kuramoto/spectral.hpp"

namespace kuramoto {

/// Stationary complex Gaussian noise whose periodogram has expectation
/// `target` in every bin. For each target bin j (in grid order) two standard
/// normals G, G' are drawn and the Fourier coefficient is
/// (G + i G') sqrt(S_j T / 2); the series is its inverse transform scaled
/// so that `periodogram` recovers S_j on average. The output has
/// window / sample_dt samples and is periodic with period `window`. Bins of
/// the output grid outside the target's range are zero.
///
/// The target must lie on the native grid of the window (d_omega = 2 pi / T,
/// bins at integer multiples of d_omega) and fit below the output Nyquist
/// frequency. Negative target values are rejected.
ComplexSeries noise_from_spectrum(const Spectrum& target, double window, double sample_dt, RngStream& stream);

}  // namespace kuramoto
