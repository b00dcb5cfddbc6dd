#include "kuramoto/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kuramoto {
namespace {

constexpr char kDisorderMagic[8] = {'K', 'U', 'R', 'D', 'I', 'S', '0', '1'};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

std::vector<double> PhaseState::wrapped_phases() const {
  std::vector<double> out(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i) {
    double w = std::fmod(phases[i], kTwoPi);
    if (w < 0.0) w += kTwoPi;
    out[i] = w < kTwoPi ? w : 0.0;
  }
  return out;
}

double wrap_angle(double theta) {
  double w = std::fmod(theta + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w - std::numbers::pi;
}

DisorderRealization sample_disorder(const SimParams& params) {
  RngStream stream(params.seed, {Purpose::Disorder});
  return sample_disorder(params, stream);
}

DisorderRealization sample_disorder(const SimParams& params, RngStream& stream) {
  params.validate();
  const std::size_t n = params.n_osc;
  DisorderRealization d;
  d.seed = params.seed;
  d.freqs.resize(n);
  for (auto& w : d.freqs) w = params.freq_spread * stream.normal();
  d.couplings.resize(n * n);
  const double mean = params.mean_coupling / static_cast<double>(n);
  const double spread = params.coupling_disorder / std::sqrt(static_cast<double>(n));
  for (auto& c : d.couplings) c = mean + spread * stream.normal();
  return d;
}

PhaseState init_phases(const SimParams& params) {
  RngStream stream(params.seed, {Purpose::InitialPhases});
  return init_phases(params, stream);
}

PhaseState init_phases(const SimParams& params, RngStream& stream) {
  PhaseState s;
  s.phases.resize(params.n_osc);
  for (auto& p : s.phases) p = kTwoPi * stream.uniform();
  return s;
}

OrderParameterSample order_parameter(std::span<const double> phases) {
  if (phases.empty()) throw std::invalid_argument("order_parameter needs at least one phase");
  double re = 0.0, im = 0.0;
  for (double th : phases) {
    re += std::cos(th);
    im += std::sin(th);
  }
  const double inv = 1.0 / static_cast<double>(phases.size());
  re *= inv;
  im *= inv;
  OrderParameterSample out;
  out.r = std::hypot(re, im);
  out.psi = out.r > 0.0 ? wrap_angle(std::atan2(im, re)) : 0.0;
  return out;
}

std::complex<double> network_noise(const PhaseState& state, const DisorderRealization& disorder, std::size_t l) {
  const std::size_t n = disorder.size();
  if (l >= n) throw std::out_of_range("oscillator index out of range");
  if (state.phases.size() != n) throw std::invalid_argument("state and disorder sizes differ");
  std::complex<double> z{0.0, 0.0};
  const auto row = disorder.row(l);
  for (std::size_t m = 0; m < n; ++m) z += row[m] * std::polar(1.0, state.phases[m]);
  return z;
}

void save_disorder(const DisorderRealization& disorder, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  const std::uint64_t n = disorder.size();
  if (disorder.couplings.size() != n * n) throw std::invalid_argument("coupling matrix is not N x N");
  out.write(kDisorderMagic, sizeof kDisorderMagic);
  write_pod(out, n);
  write_pod(out, disorder.seed);
  out.write(reinterpret_cast<const char*>(disorder.freqs.data()), static_cast<std::streamsize>(n * sizeof(double)));
  out.write(reinterpret_cast<const char*>(disorder.couplings.data()),
            static_cast<std::streamsize>(n * n * sizeof(double)));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

DisorderRealization load_disorder(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kDisorderMagic, sizeof magic) != 0) {
    throw std::runtime_error("'" + path.string() + "' is not a disorder file");
  }
  std::uint64_t n = 0;
  DisorderRealization d;
  read_pod(in, n);
  read_pod(in, d.seed);
  d.freqs.resize(n);
  d.couplings.resize(n * n);
  in.read(reinterpret_cast<char*>(d.freqs.data()), static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(d.couplings.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
  if (!in) throw std::runtime_error("'" + path.string() + "' is truncated");
  return d;
}

}  // namespace kuramoto
