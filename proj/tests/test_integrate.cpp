#include <doctest.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>

#include <omp.h>

#include "kuramoto/errors.hpp"
#include "kuramoto/integrate.hpp"
#include "kuramoto/model.hpp"
#include "kuramoto/spectral.hpp"

using namespace kuramoto;

namespace {

SimParams net(std::size_t n, double K, double k, double sigma, double window = 10.0, double transient = 0.0) {
  SimParams p;
  p.n_osc = n;
  p.mean_coupling = K;
  p.coupling_disorder = k;
  p.freq_spread = sigma;
  p.window = window;
  p.transient = transient;
  p.dt = 0.01;
  p.seed = 11;
  return p;
}

PhaseState reference_run(const SimParams& p, const DisorderRealization& d, PhaseState s) {
  const auto drift = network_drift(d);
  const std::size_t steps = p.steps_for(p.transient + p.window);
  for (std::size_t i = 0; i < steps; ++i) rk4_step(s, drift, p.dt);
  return s;
}

}  // namespace

TEST_CASE("rk4 step basics") {
  PhaseState s;
  s.phases = {0.3};
  const DriftFn constant = [](std::span<const double>, std::span<double> out) { out[0] = 1.7; };
  for (int i = 0; i < 1000; ++i) rk4_step(s, constant, 0.01);
  CHECK(s.phases[0] == doctest::Approx(0.3 + 17.0).epsilon(1e-13));
  CHECK(s.time == doctest::Approx(10.0));

  PhaseState z;
  z.phases = {0.1, -2.0};
  const DriftFn zero = [](std::span<const double>, std::span<double> out) { out[0] = out[1] = 0.0; };
  rk4_step(z, zero, 0.5);
  CHECK(z.phases == std::vector<double>{0.1, -2.0});
}

TEST_CASE("rk4 self-convergence is fourth order") {
  const auto p = net(4, 1.0, 1.0, 1.0);
  const auto d = sample_disorder(p);
  const auto init = init_phases(p);
  const auto drift = network_drift(d);
  auto endpoint = [&](double dt) {
    PhaseState s = init;
    const auto steps = static_cast<std::size_t>(std::llround(2.0 / dt));
    for (std::size_t i = 0; i < steps; ++i) rk4_step(s, drift, dt);
    return s.phases;
  };
  const double dt = 0.1;
  const auto ref = endpoint(dt / 8.0);
  auto err = [&](const std::vector<double>& x) {
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(x[i] - ref[i]));
    return e;
  };
  const double ratio = err(endpoint(dt)) / err(endpoint(dt / 2.0));
  MESSAGE("rk4 error ratio " << ratio);
  CHECK(ratio > 13.0);
  CHECK(ratio < 19.0);
}

TEST_CASE("euler-maruyama step") {
  SUBCASE("D=0 is explicit Euler") {
    PhaseState s;
    s.phases = {1.0};
    const DriftFn f = [](std::span<const double> x, std::span<double> out) { out[0] = -x[0]; };
    RngStream stream(1, {Purpose::Check});
    euler_maruyama_step(s, f, 0.0, 0.1, stream);
    CHECK(s.phases[0] == doctest::Approx(0.9).epsilon(1e-15));
  }
  SUBCASE("Brownian variance 2 D t within 3 standard errors") {
    const std::size_t trials = 1000;
    const double D = 1.0, dt = 0.01, t = 2.0;
    PhaseState s;
    s.phases.assign(trials, 0.0);
    const DriftFn none = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
    RngStream stream(2, {Purpose::Check});
    for (int i = 0; i < 200; ++i) euler_maruyama_step(s, none, D, dt, stream);
    double m2 = 0.0;
    for (double x : s.phases) m2 += x * x;
    m2 /= trials;
    const double expected = 2.0 * D * t;
    // var of x^2 for a centred Gaussian is 2 sigma^4
    CHECK(std::abs(m2 - expected) < 3.0 * expected * std::sqrt(2.0 / trials));
  }
  SUBCASE("fixed seed reproduces the path") {
    const DriftFn none = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    PhaseState a, b;
    a.phases = b.phases = {0.0};
    RngStream sa(9, {Purpose::Check}), sb(9, {Purpose::Check});
    for (int i = 0; i < 50; ++i) {
      euler_maruyama_step(a, none, 0.3, 0.01, sa);
      euler_maruyama_step(b, none, 0.3, 0.01, sb);
    }
    CHECK(a.phases == b.phases);
  }
}

TEST_CASE("network integrator agrees with the reference drift") {
  // dense, homogeneous and uncoupled field paths
  for (auto [K, k] : {std::pair{0.7, 1.0}, std::pair{1.5, 0.0}, std::pair{0.0, 0.0}}) {
    auto p = net(300, K, k, 1.0, 2.0, 1.0);
    const auto d = sample_disorder(p);
    const auto init = init_phases(p);
    const auto fast = advance_network(p, d, init, p.transient + p.window);
    const auto ref = reference_run(p, d, init);
    double e = 0.0;
    for (std::size_t l = 0; l < p.n_osc; ++l) e = std::max(e, std::abs(fast.phases[l] - ref.phases[l]));
    INFO("K=" << K << " k=" << k);
    CHECK(e < 1e-9);
  }
}

TEST_CASE("uncoupled rotation") {
  auto p = net(3, 0.0, 0.0, 0.0, 100.0, 5.0);
  auto d = sample_disorder(p);
  const double dw = 2.0 * std::numbers::pi / p.window;
  d.freqs = {3 * dw, -7 * dw, 0.0};
  const auto init = init_phases(p);
  const auto rec = simulate_network(p, d, init, {});
  REQUIRE(rec.n_samples == 10000);
  for (std::size_t t = 0; t < rec.n_samples; t += 997) {
    for (std::size_t l = 0; l < 3; ++l) {
      const double theta = init.phases[l] + d.freqs[l] * (p.transient + t * p.dt);
      CHECK(std::abs(rec.pointer(t, l) - std::polar(1.0, theta)) < 1e-10);
    }
  }
  for (std::size_t l = 0; l < 3; ++l) {
    const Spectrum s = periodogram(rec.pointer_series(l));
    const Peak peak = find_peak(s);
    CHECK(peak.omega == doctest::Approx(d.freqs[l]).epsilon(1e-9));
    CHECK(peak.height == doctest::Approx(p.window).epsilon(1e-9));
  }
}

TEST_CASE("recording layout and normalization") {
  auto p = net(50, 0.5, 1.0, 1.0, 20.0, 2.0);
  const auto d = sample_disorder(p);
  RecordingRequest req;
  req.sample_dt = 0.05;
  req.oscillators = std::vector<std::size_t>{1, 7, 30};
  req.record_noise = true;
  req.record_order = true;
  const auto rec = simulate_network(p, d, init_phases(p), req);
  CHECK(rec.n_samples == 400);
  CHECK(rec.start_time == doctest::Approx(2.0));
  CHECK(rec.order.size() == 400);
  CHECK(rec.noise.size() == 1200);
  for (auto x : rec.pointers) CHECK(std::abs(std::abs(x) - 1.0) < 1e-12);
  for (double r : rec.order) {
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  // recorded noise matches the direct sum at the final sample
  PhaseState s = advance_network(p, d, init_phases(p), p.transient + p.window - req.sample_dt);
  const auto z = network_noise(s, d, 7);
  CHECK(std::abs(rec.noise[(rec.n_samples - 1) * 3 + 1] - z) < 1e-9);
}

TEST_CASE("Kubo autocorrelation") {
  auto p = net(2000, 0.0, 0.0, 0.0, 20.0, 0.0);
  p.noise_intensity = 0.5;
  p.integrator = Integrator::EulerMaruyama;
  const auto d = sample_disorder(p);
  RecordingRequest req;
  req.sample_dt = 0.05;
  const auto rec = simulate_network(p, d, init_phases(p), req);
  for (std::size_t lag : {10u, 20u, 40u}) {
    std::complex<double> c = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t + lag < rec.n_samples; t += 20) {
      for (std::size_t l = 0; l < p.n_osc; ++l) {
        c += rec.pointer(t + lag, l) * std::conj(rec.pointer(t, l));
        ++count;
      }
    }
    c /= static_cast<double>(count);
    const double tau = lag * req.sample_dt;
    INFO("tau " << tau);
    CHECK(std::abs(c - std::exp(-p.noise_intensity * tau)) < 0.03);
  }
}

TEST_CASE("two oscillators lock") {
  auto p = net(2, 10.0, 0.0, 0.0, 10.0, 10.0);
  const auto rec = simulate_network(p, sample_disorder(p), init_phases(p), RecordingRequest{0.0, {}, false, true});
  for (double r : rec.order) CHECK(r > 0.999);
}

TEST_CASE("guards") {
  SUBCASE("step bound") {
    auto p = net(10, 0.0, 0.0, 1.0);
    p.dt = 0.5;
    auto d = sample_disorder(p);
    d.freqs[3] = 5.0;
    CHECK_THROWS_AS(simulate_network(p, d, init_phases(p), {}), NumericalError);
  }
  SUBCASE("non-finite phases") {
    auto p = net(4, 0.0, 0.0, 1.0);
    auto d = sample_disorder(p);
    d.freqs[1] = std::nan("");
    CHECK_THROWS_AS(simulate_network(p, d, init_phases(p), {}), NumericalError);
  }
  SUBCASE("aliasing") {
    auto p = net(4, 0.0, 0.0, 0.0, 100.0);
    auto d = sample_disorder(p);
    d.freqs = {5.0, 5.0, 5.0, 5.0};
    RecordingRequest req;
    req.sample_dt = 1.0;
    CHECK_THROWS_AS(simulate_network(p, d, init_phases(p), req), NumericalError);
    req.sample_dt = 0.5;
    CHECK_NOTHROW(simulate_network(p, d, init_phases(p), req));
  }
  SUBCASE("rk4 with noise") {
    auto p = net(4, 0.0, 0.0, 1.0);
    p.noise_intensity = 0.1;
    CHECK_THROWS_AS(simulate_network(p, sample_disorder(p), init_phases(p), {}), std::invalid_argument);
  }
}

TEST_CASE("mass above nyquist") {
  std::vector<std::complex<double>> tone(4096);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::polar(1.0, 2.0 * i * 0.01);
  CHECK(mass_above_nyquist(tone, 0.01, 0.1) < 1e-3);
  CHECK(mass_above_nyquist(tone, 0.01, 2.0) > 0.99);
}

TEST_CASE("rk4 step selection") {
  auto p = net(20, 0.5, 1.0, 1.0);
  p.dt = 0.2;
  const auto d = sample_disorder(p);
  const auto init = init_phases(p);
  const double dt = select_rk4_dt(p, d, init, 1e-6);
  CHECK(dt < 0.2);
  p.dt = dt;
  CHECK(rk4_self_convergence_error(p, d, init) < 1e-6);
}

TEST_CASE("euler and rk4 give matching statistics without noise") {
  // same disorder; the yardstick is the spread between two RK4 runs from
  // different initial phases
  auto p = net(200, 0.5, 1.0, 1.0, 400.0, 50.0);
  const auto d = sample_disorder(p);
  RecordingRequest req;
  req.sample_dt = 0.2;
  auto spectrum = [&](Integrator integrator, std::uint64_t seed) {
    SimParams q = p;
    q.integrator = integrator;
    q.seed = seed;
    return smooth_spectrum(mean_pointer_spectrum(simulate_network(q, d, init_phases(q), req)));
  };
  const Spectrum rk4 = spectrum(Integrator::RungeKutta4, 11);
  const double euler = spectral_distance(spectrum(Integrator::EulerMaruyama, 11), rk4);
  const double replicate = spectral_distance(spectrum(Integrator::RungeKutta4, 12), rk4);
  MESSAGE("euler vs rk4 " << euler << ", rk4 replicate " << replicate);
  CHECK(euler < 2.0 * replicate);
}

TEST_CASE("thread count does not change trajectories") {
  auto p = net(400, 0.3, 1.0, 1.0, 5.0, 1.0);
  p.noise_intensity = 0.2;
  p.integrator = Integrator::EulerMaruyama;
  const auto d = sample_disorder(p);
  RecordingRequest req;
  req.record_noise = true;
  req.record_order = true;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = simulate_network(p, d, init_phases(p), req);
  omp_set_num_threads(4);
  const auto b = simulate_network(p, d, init_phases(p), req);
  omp_set_num_threads(saved);
  CHECK(a.pointers == b.pointers);
  CHECK(a.noise == b.noise);
  CHECK(a.order == b.order);
}

TEST_CASE("dense step cost grows quadratically") {
  auto seconds = [](std::size_t n) {
    auto p = net(n, 0.3, 1.0, 1.0, 2.0, 0.0);
    p.dt = 0.002;
    const auto d = sample_disorder(p);
    const auto init = init_phases(p);
    double best = 1e30;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      advance_network(p, d, init, p.window);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double ratio = seconds(400) / seconds(200);
  omp_set_num_threads(saved);
  MESSAGE("N=400 / N=200 time ratio " << ratio);
  CHECK(ratio >= 2.5);
  CHECK(ratio <= 5.5);
}
