#include "kuramoto/kernels.hpp"

#include <stdexcept>

namespace kuramoto::kernels {

namespace reference {

void coupling_field(std::span<const double> couplings, std::span<const std::complex<double>> x,
                    std::span<std::complex<double>> out) {
  const std::size_t n = x.size();
  if (couplings.size() != n * n || out.size() != n) throw std::invalid_argument("coupling_field: size mismatch");
  for (std::size_t l = 0; l < n; ++l) {
    std::complex<double> z{0.0, 0.0};
    for (std::size_t m = 0; m < n; ++m) z += couplings[l * n + m] * x[m];
    out[l] = z;
  }
}

}  // namespace reference

namespace parallel {
namespace {

inline void row_field(const double* __restrict row, const double* __restrict xr, const double* __restrict xi,
                      std::size_t n, double& out_re, double& out_im) {
  // Independent partial sums per lane keep several FMA chains in flight.
  constexpr std::size_t kLanes = 16;
  double ar[kLanes] = {}, ai[kLanes] = {};
  std::size_t m = 0;
  for (; m + kLanes <= n; m += kLanes) {
#pragma omp simd
    for (std::size_t j = 0; j < kLanes; ++j) {
      ar[j] += row[m + j] * xr[m + j];
      ai[j] += row[m + j] * xi[m + j];
    }
  }
  double re = 0.0, im = 0.0;
  for (std::size_t j = 0; j < kLanes; ++j) {
    re += ar[j];
    im += ai[j];
  }
  for (; m < n; ++m) {
    re += row[m] * xr[m];
    im += row[m] * xi[m];
  }
  out_re = re;
  out_im = im;
}

}  // namespace

void coupling_field(std::span<const double> couplings, std::span<const double> x_re, std::span<const double> x_im,
                    std::span<double> out_re, std::span<double> out_im) {
  const std::size_t n = x_re.size();
  if (couplings.size() != n * n || x_im.size() != n || out_re.size() != n || out_im.size() != n) {
    throw std::invalid_argument("coupling_field: size mismatch");
  }
  const double* k = couplings.data();
  const double* xr = x_re.data();
  const double* xi = x_im.data();
  if (n >= kMinParallelItems) {
#pragma omp parallel for schedule(static)
    for (std::size_t l = 0; l < n; ++l) row_field(k + l * n, xr, xi, n, out_re[l], out_im[l]);
  } else {
    for (std::size_t l = 0; l < n; ++l) row_field(k + l * n, xr, xi, n, out_re[l], out_im[l]);
  }
}

}  // namespace parallel

}  // namespace kuramoto::kernels
