#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <omp.h>

namespace kuramoto::kernels {

/// Items per block in ordered_sum. Fixed so the floating-point summation
/// order never depends on the thread count.
inline constexpr std::size_t kReduceBlock = 16;

namespace reference {

/// out[l] = sum_m couplings[l*n + m] * x[m]; straightforward complex loop.
void coupling_field(std::span<const double> couplings, std::span<const std::complex<double>> x,
                    std::span<std::complex<double>> out);

/// Sequential sum of fill(i, acc) over all items.
template <typename Fill>
std::vector<double> ordered_sum(std::size_t n_items, std::size_t width, Fill&& fill) {
  std::vector<double> acc(width, 0.0);
  for (std::size_t i = 0; i < n_items; ++i) fill(i, std::span<double>(acc));
  return acc;
}

}  // namespace reference

namespace parallel {

/// Loops shorter than this run serially without entering an OpenMP region.
inline constexpr std::size_t kMinParallelItems = 256;

/// body(i) for i in [0, n): statically scheduled threads for long loops, a
/// plain loop otherwise.
template <typename Body>
void for_each_index(std::size_t n, Body&& body) {
  if (n >= kMinParallelItems) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

/// Row-parallel dense field with the pointer split into real and imaginary
/// arrays. Each row is reduced by one thread, so results do not depend on
/// the thread count.
void coupling_field(std::span<const double> couplings, std::span<const double> x_re, std::span<const double> x_im,
                    std::span<double> out_re, std::span<double> out_im);

/// Sum of fill(i, acc) over items, computed in fixed blocks of
/// kReduceBlock items that are then added in block order. fill must only
/// add into acc and must be safe to call concurrently for distinct items.
template <typename Fill>
std::vector<double> ordered_sum(std::size_t n_items, std::size_t width, Fill&& fill) {
  const std::size_t n_blocks = (n_items + kReduceBlock - 1) / kReduceBlock;
  std::vector<std::vector<double>> partial(n_blocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t b = 0; b < n_blocks; ++b) {
    partial[b].assign(width, 0.0);
    const std::size_t end = std::min(n_items, (b + 1) * kReduceBlock);
    for (std::size_t i = b * kReduceBlock; i < end; ++i) fill(i, std::span<double>(partial[b]));
  }
  std::vector<double> acc(width, 0.0);
  for (const auto& p : partial) {
    for (std::size_t j = 0; j < width; ++j) acc[j] += p[j];
  }
  return acc;
}

}  // namespace parallel

}  // namespace kuramoto::kernels
