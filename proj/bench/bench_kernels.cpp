// Serial twin against OpenMP kernel for each data-parallel scan. Run with
// OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "sslab/bandset.hpp"
#include "sslab/dos.hpp"
#include "sslab/kernels.hpp"

using namespace sslab;

namespace {

std::vector<Word> words(std::size_t count, std::size_t len) {
  std::mt19937_64 g(1);
  std::vector<Word> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(len);
    for (auto& x : v) x = static_cast<double>(g() % 2);
    out.emplace_back(v);
  }
  return out;
}

std::vector<double> potential(std::size_t n) {
  std::mt19937_64 g(2);
  std::vector<double> v(n);
  for (auto& x : v) x = 3.0 * static_cast<double>(g() % 2);
  return v;
}

std::string symbols(std::size_t n) {
  std::mt19937_64 g(3);
  std::string s(n, 'a');
  for (auto& c : s) c = static_cast<char>('a' + g() % 2);
  return s;
}

template <auto F>
void band_spectra_bm(benchmark::State& st) {
  const auto w = words(static_cast<std::size_t>(st.range(0)), 12);
  for (auto _ : st) benchmark::DoNotOptimize(F(w));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <auto F>
void count_scan_bm(benchmark::State& st) {
  const auto v = potential(static_cast<std::size_t>(st.range(0)));
  const auto e = default_energy_grid(0, 3, 512);
  for (auto _ : st) benchmark::DoNotOptimize(F(v, e));
}

template <auto F>
void lyapunov_scan_bm(benchmark::State& st) {
  const auto v = potential(static_cast<std::size_t>(st.range(0)));
  const auto e = default_energy_grid(0, 3, 512);
  for (auto _ : st) benchmark::DoNotOptimize(F(v, e));
}

template <auto F>
void count_factors_bm(benchmark::State& st) {
  const auto s = symbols(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(F(s, 16));
}

template <auto F>
void ids_curve_bm(benchmark::State& st) {
  const auto sampler = periodic_sampler(Word{0, 1, 1});
  const auto e = default_energy_grid(0, 1, 401);
  for (auto _ : st) benchmark::DoNotOptimize(F(sampler, static_cast<std::size_t>(st.range(0)), e, 8));
}

template <auto F>
void poly_bounded_bm(benchmark::State& st) {
  const auto v = potential(2 * static_cast<std::size_t>(st.range(0)) + 1);
  const auto lambda = BandSet::single(-2, 5);
  for (auto _ : st) benchmark::DoNotOptimize(F(v, 4.0, lambda, 1e-3, 256));
}

}  // namespace

BENCHMARK(band_spectra_bm<band_spectra_serial>)->Name("band_spectra/serial")->Arg(256);
BENCHMARK(band_spectra_bm<band_spectra>)->Name("band_spectra/omp")->Arg(256);
BENCHMARK(count_scan_bm<count_scan_serial>)->Name("count_scan/serial")->Arg(4000);
BENCHMARK(count_scan_bm<count_scan>)->Name("count_scan/omp")->Arg(4000);
BENCHMARK(lyapunov_scan_bm<lyapunov_scan_serial>)->Name("lyapunov_scan/serial")->Arg(20000);
BENCHMARK(lyapunov_scan_bm<lyapunov_scan>)->Name("lyapunov_scan/omp")->Arg(20000);
BENCHMARK(count_factors_bm<count_factors_serial>)->Name("count_factors/serial")->Arg(1 << 20);
BENCHMARK(count_factors_bm<count_factors>)->Name("count_factors/omp")->Arg(1 << 20);
BENCHMARK(ids_curve_bm<ids_curve_serial>)->Name("ids_curve/serial")->Arg(1000);
BENCHMARK(ids_curve_bm<ids_curve>)->Name("ids_curve/omp")->Arg(1000);
BENCHMARK(poly_bounded_bm<poly_bounded_energy_set_serial>)->Name("poly_bounded/serial")->Arg(50);
BENCHMARK(poly_bounded_bm<poly_bounded_energy_set>)->Name("poly_bounded/omp")->Arg(50);

BENCHMARK_MAIN();
