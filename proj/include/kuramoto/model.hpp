#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kuramoto/params.hpp"
#include "kuramoto/rng.hpp"

namespace kuramoto {

/// One quenched draw of natural frequencies and the dense coupling matrix.
struct DisorderRealization {
  std::uint64_t seed = 0;               // seed the draw was generated from
  std::vector<double> freqs;            // omega_l
  std::vector<double> couplings;        // K_lm, row-major N x N

  std::size_t size() const { return freqs.size(); }
  double coupling(std::size_t l, std::size_t m) const { return couplings[l * freqs.size() + m]; }
  std::span<const double> row(std::size_t l) const {
    return std::span<const double>(couplings).subspan(l * freqs.size(), freqs.size());
  }
};

/// Phases are kept unwrapped; wrapped_phases() maps them to [0, 2 pi).
struct PhaseState {
  std::vector<double> phases;
  double time = 0.0;

  std::vector<double> wrapped_phases() const;
};

struct OrderParameterSample {
  double r = 0.0;
  double psi = 0.0;  // in [-pi, pi)
};

/// freqs[l] = sigma * G_l, couplings[l][m] = K/N + k * G_lm / sqrt(N), all G
/// iid standard normal, drawn from stream (Disorder, 0) of params.seed.
DisorderRealization sample_disorder(const SimParams& params);
DisorderRealization sample_disorder(const SimParams& params, RngStream& stream);

/// Phases iid uniform on [0, 2pi), time 0, from stream (InitialPhases, 0).
PhaseState init_phases(const SimParams& params);
PhaseState init_phases(const SimParams& params, RngStream& stream);

OrderParameterSample order_parameter(std::span<const double> phases);
inline OrderParameterSample order_parameter(const PhaseState& state) { return order_parameter(state.phases); }

/// zeta_l = sum_m K_lm exp(i theta_m).
std::complex<double> network_noise(const PhaseState& state, const DisorderRealization& disorder, std::size_t l);

/// Wrap an angle into [-pi, pi).
double wrap_angle(double theta);

// Binary layout (host byte order):
//   "KURDIS01" | u64 N | u64 seed | f64 freqs[N] | f64 couplings[N*N]
void save_disorder(const DisorderRealization& disorder, const std::filesystem::path& path);
DisorderRealization load_disorder(const std::filesystem::path& path);

}  // namespace kuramoto
