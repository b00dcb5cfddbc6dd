#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <numeric>

#include "kuramoto/model.hpp"
#include "kuramoto/params.hpp"
#include "kuramoto/rng.hpp"

using namespace kuramoto;

namespace {

SimParams small(std::size_t n, double K, double k, double sigma = 1.0) {
  SimParams p;
  p.n_osc = n;
  p.mean_coupling = K;
  p.coupling_disorder = k;
  p.freq_spread = sigma;
  p.seed = 42;
  return p;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

}  // namespace

TEST_CASE("params validation") {
  SimParams p;
  CHECK_NOTHROW(p.validate());
  p.noise_intensity = 0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.integrator = Integrator::EulerMaruyama;
  CHECK_NOTHROW(p.validate());
  p.window = 1000.005;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.window = 1000.0;
  p.n_osc = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK(integrator_from_string("rk4") == Integrator::RungeKutta4);
  CHECK(integrator_from_string("euler_maruyama") == Integrator::EulerMaruyama);
  CHECK_THROWS(integrator_from_string("leapfrog"));
  CHECK(SimParams::noise_scale(1.0, 2.0, 8) == doctest::Approx(1.5));
}

TEST_CASE("homogeneous couplings are exact") {
  const auto d = sample_disorder(small(4, 1.0, 0.0));
  for (double c : d.couplings) CHECK(c == 0.25);
}

TEST_CASE("zero frequency spread gives zero frequencies") {
  const auto d = sample_disorder(small(16, 0.0, 1.0, 0.0));
  for (double w : d.freqs) CHECK(w == 0.0);
}

TEST_CASE("coupling moments") {
  SUBCASE("k=1 K=0 N=1e4 variance 1/N within 5%") {
    const auto d = sample_disorder(small(10000, 0.0, 1.0));
    CHECK(std::abs(variance(d.couplings) * 1e4 - 1.0) < 0.05);
  }
  SUBCASE("N=1e3 mean K/N and variance k^2/N within 5 standard errors") {
    const double K = 2.0, k = 0.7;
    const std::size_t n = 1000;
    const auto d = sample_disorder(small(n, K, k));
    const double m = mean(d.couplings), v = variance(d.couplings);
    const double entries = static_cast<double>(n * n);
    const double var_true = k * k / n;
    CHECK(std::abs(m - K / n) < 5.0 * std::sqrt(var_true / entries));
    // var of the sample variance for a Gaussian: 2 sigma^4 / (n - 1)
    CHECK(std::abs(v - var_true) < 5.0 * var_true * std::sqrt(2.0 / (entries - 1)));
  }
  SUBCASE("transposed entries are uncorrelated") {
    const std::size_t n = 400;
    const auto d = sample_disorder(small(n, 0.0, 1.0));
    double sxy = 0.0, sxx = 0.0;
    std::size_t pairs = 0;
    for (std::size_t l = 0; l < n; ++l) {
      for (std::size_t m = l + 1; m < n; ++m) {
        sxy += d.coupling(l, m) * d.coupling(m, l);
        sxx += d.coupling(l, m) * d.coupling(l, m);
        ++pairs;
      }
    }
    const double corr = sxy / sxx;
    CHECK(std::abs(corr) < 5.0 / std::sqrt(static_cast<double>(pairs)));
  }
  SUBCASE("frequency moments at tolerance 5/sqrt(N)") {
    const std::size_t n = 20000;
    const double sigma = 1.5;
    const auto d = sample_disorder(small(n, 0.0, 0.0, sigma));
    CHECK(std::abs(mean(d.freqs)) < 5.0 * sigma / std::sqrt(n));
    CHECK(std::abs(variance(d.freqs) / (sigma * sigma) - 1.0) < 5.0 / std::sqrt(n));
  }
}

TEST_CASE("disorder is deterministic and seed dependent") {
  auto p = small(50, 0.5, 1.0);
  const auto a = sample_disorder(p);
  const auto b = sample_disorder(p);
  CHECK(a.freqs == b.freqs);
  CHECK(a.couplings == b.couplings);
  p.seed = 43;
  CHECK(sample_disorder(p).freqs != a.freqs);
}

TEST_CASE("initial phases") {
  SUBCASE("N=1e4 mean pointer modulus below 0.05") {
    const auto s = init_phases(small(10000, 0, 0));
    CHECK(order_parameter(s).r < 0.05);
    for (double th : s.phases) {
      CHECK(th >= 0.0);
      CHECK(th < 2.0 * std::numbers::pi);
    }
  }
  SUBCASE("N=1") {
    const auto s = init_phases(small(1, 0, 0));
    REQUIRE(s.phases.size() == 1);
    CHECK(s.phases[0] >= 0.0);
    CHECK(s.phases[0] < 2.0 * std::numbers::pi);
    CHECK(s.time == 0.0);
  }
  SUBCASE("same seed same state") {
    CHECK(init_phases(small(100, 0, 0)).phases == init_phases(small(100, 0, 0)).phases);
  }
}

TEST_CASE("order parameter") {
  PhaseState s;
  s.phases = {1.3, 1.3, 1.3};
  CHECK(order_parameter(s).r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(order_parameter(s).psi == doctest::Approx(1.3));
  s.phases = {0.0, std::numbers::pi};
  CHECK(order_parameter(s).r < 1e-15);

  SUBCASE("<r^2> ~ 1/N for random phases") {
    const std::size_t n = 10000;
    double acc = 0.0;
    for (std::uint64_t draw = 0; draw < 100; ++draw) {
      RngStream stream(7, {Purpose::Check, draw});
      const double r = order_parameter(init_phases(small(n, 0, 0), stream)).r;
      acc += r * r;
    }
    const double ratio = acc / 100.0 * n;
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
  }
  SUBCASE("psi lies in [-pi, pi)") {
    s.phases = {std::numbers::pi, std::numbers::pi};
    const double psi = order_parameter(s).psi;
    CHECK(psi >= -std::numbers::pi);
    CHECK(psi < std::numbers::pi);
  }
}

TEST_CASE("wrapping") {
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(-std::numbers::pi));
  CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - 2.0 * std::numbers::pi));
  PhaseState s;
  s.phases = {100.0, -100.0};
  for (double w : s.wrapped_phases()) {
    CHECK(w >= 0.0);
    CHECK(w < 2.0 * std::numbers::pi);
  }
  CHECK(wrap_angle(-1e-17) < std::numbers::pi);
}

TEST_CASE("network noise") {
  SUBCASE("homogeneous K=1, aligned phases") {
    const auto d = sample_disorder(small(10, 1.0, 0.0));
    PhaseState s;
    s.phases.assign(10, 0.0);
    const auto z = network_noise(s, d, 3);
    CHECK(z.real() == doctest::Approx(1.0));
    CHECK(z.imag() == doctest::Approx(0.0));
  }
  SUBCASE("zero couplings") {
    const auto d = sample_disorder(small(5, 0.0, 0.0));
    CHECK(network_noise(init_phases(small(5, 0, 0)), d, 2) == std::complex<double>(0.0, 0.0));
  }
  SUBCASE("N=8 matches direct summation") {
    const auto p = small(8, 0.3, 1.0);
    const auto d = sample_disorder(p);
    const auto s = init_phases(p);
    for (std::size_t l = 0; l < 8; ++l) {
      double re = 0.0, im = 0.0;
      for (std::size_t m = 0; m < 8; ++m) {
        re += d.couplings[l * 8 + m] * std::cos(s.phases[m]);
        im += d.couplings[l * 8 + m] * std::sin(s.phases[m]);
      }
      const auto z = network_noise(s, d, l);
      CHECK(std::abs(z.real() - re) < 1e-14);
      CHECK(std::abs(z.imag() - im) < 1e-14);
    }
  }
}

TEST_CASE("disorder file round trip") {
  const auto d = sample_disorder(small(12, 0.4, 1.0));
  const auto path = std::filesystem::temp_directory_path() / "kuramoto_disorder_test.bin";
  save_disorder(d, path);
  const auto e = load_disorder(path);
  CHECK(e.seed == d.seed);
  CHECK(e.freqs == d.freqs);
  CHECK(e.couplings == d.couplings);
  std::filesystem::remove(path);
  CHECK_THROWS(load_disorder(path));
}

TEST_CASE("stream derivation") {
  CHECK(derive_seed(1, {Purpose::Disorder}) == derive_seed(1, {Purpose::Disorder}));
  CHECK(derive_seed(1, {Purpose::Disorder}) != derive_seed(1, {Purpose::InitialPhases}));
  CHECK(derive_seed(1, {Purpose::Replicate, 1}) != derive_seed(1, {Purpose::Replicate, 2}));
  CHECK(derive_seed(1, {Purpose::Replicate, 1, 0}) != derive_seed(1, {Purpose::Replicate, 0, 1}));
  RngStream a(5, {Purpose::Check}), b(5, {Purpose::Check});
  for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
}
