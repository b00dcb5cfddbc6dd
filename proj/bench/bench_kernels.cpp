// Serial reference kernels against the OpenMP versions.

#include <benchmark/benchmark.h>

#include <complex>
#include <span>
#include <vector>

#include "kuramoto/integrate.hpp"
#include "kuramoto/kernels.hpp"
#include "kuramoto/model.hpp"
#include "kuramoto/spectral.hpp"

using namespace kuramoto;

namespace {

struct FieldInput {
  DisorderRealization disorder;
  std::vector<std::complex<double>> x;
  std::vector<double> re, im;

  explicit FieldInput(std::size_t n) {
    SimParams p;
    p.n_osc = n;
    disorder = sample_disorder(p);
    const auto s = init_phases(p);
    for (double th : s.phases) {
      x.push_back(std::polar(1.0, th));
      re.push_back(x.back().real());
      im.push_back(x.back().imag());
    }
  }
};

void BM_FieldReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  FieldInput in(n);
  std::vector<std::complex<double>> out(n);
  for (auto _ : state) {
    kernels::reference::coupling_field(in.disorder.couplings, in.x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}

void BM_FieldParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  FieldInput in(n);
  std::vector<double> out_re(n), out_im(n);
  for (auto _ : state) {
    kernels::parallel::coupling_field(in.disorder.couplings, in.re, in.im, out_re, out_im);
    benchmark::DoNotOptimize(out_re.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}

template <bool Parallel>
void BM_PeriodogramSum(benchmark::State& state) {
  const std::size_t trials = 64, n = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<std::complex<double>>> series(trials, std::vector<std::complex<double>>(n));
  for (std::size_t q = 0; q < trials; ++q) {
    for (std::size_t i = 0; i < n; ++i) series[q][i] = std::polar(1.0, 0.01 * static_cast<double>(i * (q + 1)));
  }
  auto fill = [&](std::size_t q, std::span<double> acc) {
    std::vector<std::complex<double>> scratch(n);
    accumulate_periodogram(series[q], 0.1, acc, scratch);
  };
  for (auto _ : state) {
    auto acc = Parallel ? kernels::parallel::ordered_sum(trials, n, fill) : kernels::reference::ordered_sum(trials, n, fill);
    benchmark::DoNotOptimize(acc.data());
  }
}

void BM_NetworkStep(benchmark::State& state) {
  SimParams p;
  p.n_osc = static_cast<std::size_t>(state.range(0));
  p.mean_coupling = 0.5;
  p.window = 1.0;
  const auto d = sample_disorder(p);
  const auto init = init_phases(p);
  for (auto _ : state) benchmark::DoNotOptimize(advance_network(p, d, init, 1.0));
  state.SetItemsProcessed(state.iterations() * 100);
}

}  // namespace

BENCHMARK(BM_FieldReference)->Arg(256)->Arg(1000)->Arg(4000);
BENCHMARK(BM_FieldParallel)->Arg(256)->Arg(1000)->Arg(4000);
BENCHMARK(BM_PeriodogramSum<false>)->Arg(1 << 14);
BENCHMARK(BM_PeriodogramSum<true>)->Arg(1 << 14);
BENCHMARK(BM_NetworkStep)->Arg(200)->Arg(1000);

BENCHMARK_MAIN();
