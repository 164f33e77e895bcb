// Serial reference kernels against the OpenMP versions on grid-sized arrays.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "fluidspan/kernels.hpp"

namespace k = fluidspan::kernels;

namespace {

std::vector<double> filled(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

template <bool Parallel>
void BM_Lincomb(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0) * st.range(0));
  auto a = filled(n, 1), b = filled(n, 2);
  std::vector<double> out(n);
  for (auto _ : st) {
    if constexpr (Parallel) k::lincomb(out, 0.5, a, 2.0, b);
    else k::serial::lincomb(out, 0.5, a, 2.0, b);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetBytesProcessed(static_cast<int64_t>(st.iterations() * n * 3 * sizeof(double)));
}

template <bool Parallel>
void BM_SumAbsPow(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0) * st.range(0));
  auto a = filled(n, 3);
  for (auto _ : st) {
    double r = Parallel ? k::sum_abs_pow(a, 4.0) : k::serial::sum_abs_pow(a, 4.0);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Parallel>
void BM_OpNorm(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0) * st.range(0));
  auto a = filled(n, 4), b = filled(n, 5), c = filled(n, 6), d = filled(n, 7);
  for (auto _ : st) {
    double r = Parallel ? k::max_opnorm2x2(a, b, c, d) : k::serial::max_opnorm2x2(a, b, c, d);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Parallel>
void BM_Derivative(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto ns = static_cast<std::size_t>(n / 2 + 1) * n;
  auto re = filled(ns, 8), im = filled(ns, 9);
  std::vector<k::cplx> in(ns), out(ns);
  for (std::size_t i = 0; i < ns; ++i) in[i] = {re[i], im[i]};
  for (auto _ : st) {
    if constexpr (Parallel) k::spectral_derivative(in, out, n, n, 1, 1);
    else k::serial::spectral_derivative(in, out, n, n, 1, 1);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_Interpolate(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  auto f = filled(static_cast<std::size_t>(n) * n, 10);
  auto xs = filled(static_cast<std::size_t>(n) * n, 11), ys = filled(static_cast<std::size_t>(n) * n, 12);
  for (auto& x : xs) x = (x + 1.0) * M_PI;
  for (auto& y : ys) y = (y + 1.0) * M_PI;
  std::vector<double> out(xs.size());
  const double* fields[] = {f.data()};
  double* outs[] = {out.data()};
  for (auto _ : st) {
    if constexpr (Parallel) k::interpolate_cubic(n, n, fields, xs, ys, outs);
    else k::serial::interpolate_cubic(n, n, fields, xs, ys, outs);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_Lincomb<false>)->Arg(128)->Arg(512);
BENCHMARK(BM_Lincomb<true>)->Arg(128)->Arg(512);
BENCHMARK(BM_SumAbsPow<false>)->Arg(128)->Arg(512);
BENCHMARK(BM_SumAbsPow<true>)->Arg(128)->Arg(512);
BENCHMARK(BM_OpNorm<false>)->Arg(128)->Arg(512);
BENCHMARK(BM_OpNorm<true>)->Arg(128)->Arg(512);
BENCHMARK(BM_Derivative<false>)->Arg(128)->Arg(512);
BENCHMARK(BM_Derivative<true>)->Arg(128)->Arg(512);
BENCHMARK(BM_Interpolate<false>)->Arg(128)->Arg(256);
BENCHMARK(BM_Interpolate<true>)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
