#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sslab/codings.hpp"
#include "sslab/dos.hpp"
#include "sslab/kernels.hpp"
#include "sslab/periodic.hpp"
#include "sslab/rng.hpp"
#include "sslab/sl2.hpp"

using namespace sslab;

TEST_CASE("eigenvalue count") {
  const std::vector<double> zero(5, 0.0);
  CHECK(eigenvalue_count(zero, 2.0) == 5);
  CHECK(eigenvalue_count(zero, 2.5) == 5);
  CHECK(eigenvalue_count(zero, 0.0) == 2);
  bool retried = false;
  eigenvalue_count(zero, 0.0, &retried);
  CHECK(retried);

  std::mt19937_64 g(41);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 30; ++t) {
    std::vector<double> v(1 + g() % 40);
    for (auto& x : v) x = u(g);
    const auto ev = oracle::tridiagonal_eigenvalues(v);
    std::size_t prev = 0;
    for (double E = -5; E <= 5; E += 0.01) {
      const auto c = eigenvalue_count(v, E);
      CHECK(c >= prev);
      prev = c;
      // Skip energies within 1e-9 of an eigenvalue, where either side is fine.
      bool near = false;
      for (double e : ev) near = near || std::abs(e - E) < 1e-9;
      if (!near) CHECK(c == oracle::count_below(ev, E));
    }
  }
}

TEST_CASE("count scans agree with the serial reference") {
  std::mt19937_64 g(42);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(3000);
  for (auto& x : v) x = u(g);
  const auto grid = default_energy_grid(-1, 1, 501);
  CHECK(count_scan(v, grid) == count_scan_serial(v, grid));
  CHECK(lyapunov_scan(v, grid) == lyapunov_scan_serial(v, grid));
}

TEST_CASE("free IDS") {
  const auto grid = EnergyGrid(-1.9, 1.9 + 1e-9, 0.01).points();
  const auto ids = ids_curve(periodic_sampler(Word{0}), 2000, grid, 1);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(ids.k[i] - oracle::free_ids(grid[i])) < 5e-3);
  const std::vector<double> zero{0.0};
  CHECK(ids_curve(periodic_sampler(Word{0}), 2000, zero, 1).k[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("IDS curve invariants") {
  const Word w{0, 1};
  const auto grid = default_energy_grid(0, 1, 801);
  const auto ids = ids_curve(periodic_sampler(w), 1000, grid, 2);
  CHECK(ids.k.front() <= 2.0 / 1000);
  CHECK(ids.k.back() >= 1 - 2.0 / 1000);
  for (std::size_t i = 1; i < ids.k.size(); ++i) CHECK(ids.k[i] >= ids.k[i - 1]);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(ids.k[i] - periodic_ids(w, grid[i])) <= 2.0 / 1000);
    if (grid[i] > 0.05 && grid[i] < 0.95) CHECK(ids.k[i] == doctest::Approx(0.5).epsilon(2e-3));
  }
  CHECK(ids_curve_serial(periodic_sampler(w), 1000, grid, 2).k == ids.k);

  // No atoms: the largest jump shrinks as N grows with the grid refined alongside.
  double prev = 1.0;
  for (std::size_t N : {200u, 800u, 3200u}) {
    const auto s = ids_curve(periodic_sampler(Word{0, 1, 1}), N, default_energy_grid(0, 1, N / 2 + 1), 3);
    const double jmp = max_jump(s);
    CHECK(jmp <= prev + 1e-12);
    prev = jmp;
  }
}

TEST_CASE("periodic words against the exact IDS") {
  std::mt19937_64 g(43);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> v(1 + g() % 8);
    for (auto& x : v) x = static_cast<double>(g() % 3001) / 1000.0;
    const Word w(v);
    const std::size_t N = 2000;
    const auto grid = default_energy_grid(w.min(), w.max(), 401);
    const auto ids = ids_curve(periodic_sampler(w), N, grid, w.size());
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(ids.k[i] - periodic_ids(w, grid[i])) <= 2.0 / N);
  }
}

TEST_CASE("log potential and Thouless formula") {
  const double l3 = std::log((3 + std::sqrt(5.0)) / 2);
  ThoulessOptions opt;
  opt.N = 1000;
  opt.phases = 1;
  opt.grid_points = 2001;
  opt.lyapunov_length = 40000;
  const std::vector<double> es{3.0, 0.0, 1.0};
  const auto rep = thouless_check(Word{0}, es, opt);
  CHECK(rep.lyapunov[0] == doctest::Approx(l3).epsilon(1e-2));
  CHECK(std::abs(rep.integral[0] - l3) < 1e-2);
  CHECK(std::abs(rep.integral[1]) < 1e-2);
  CHECK(std::abs(rep.lyapunov[1]) < 1e-2);
  CHECK(rep.max_error < 1e-2);

  const std::vector<double> e2{-2.5, -1.0, 0.5, 1.5, 3.0};
  double prev = 1e9;
  for (std::size_t N : {60u, 120u, 240u}) {
    ThoulessOptions o = opt;
    o.N = N;
    o.phases = 2;
    const auto r = thouless_check(Word{0, 1}, e2, o);
    CHECK(r.max_error < prev);
    prev = r.max_error;
  }
}

TEST_CASE("kotani diagnostic") {
  const Word w{0, 1};
  const auto spec = band_spectrum(w).set;
  std::vector<double> sample;
  for (int i = 0; i < 20000; ++i) sample.push_back(w[static_cast<std::size_t>(i) % 2]);
  const auto grid = default_energy_grid(0, 1, 801);
  const auto r = kotani_diagnostic(sample, grid, spec, 0.02);
  CHECK(r.in_spectrum > 100);
  CHECK(r.fraction > 0.95);

  Rng rng(44);
  std::vector<double> iid(10000);
  for (auto& x : iid) x = rng.uniform() < 0.5 ? 0.0 : 3.0;
  const auto spec_iid = BandSet::single(-2, 5);
  const auto grid_iid = default_energy_grid(0, 3, 601);
  CHECK(kotani_diagnostic(iid, grid_iid, spec_iid, 0.02).fraction < 0.1);
  double prev = 0;
  for (double d : {0.001, 0.01, 0.05, 0.2}) {
    const double f = kotani_diagnostic(iid, grid_iid, spec_iid, d).fraction;
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("polynomially bounded energy sets") {
  const std::size_t N = 60;
  const std::vector<double> zero(2 * N + 1, 0.0);
  CHECK(poly_bound_objective(zero, 0.0) <= 1.0 + 1e-9);

  // Outside the spectrum the transfer norm forces growth on one half-line.
  const double E = 2.6;
  const double grow = norm(transfer(std::vector<double>(N, 0.0), E));
  REQUIRE(grow > 10 * (1 + N));
  CHECK(poly_bound_objective(zero, E) > 1.0);

  const auto lambda = BandSet::single(-2.4, 2.4);
  const auto s1 = poly_bounded_energy_set(zero, 1.5, lambda, 1e-3);
  CHECK(s1.estimate.difference(lambda).measure() == 0.0);
  CHECK_FALSE(s1.estimate.contains(E));
  CHECK(s1.estimate.contains(0.0));

  const auto s2 = poly_bounded_energy_set(zero, 3.0, lambda, 1e-3);
  CHECK(s1.estimate.difference(s2.estimate).measure() < 1e-12);

  // Nested in N for a fixed sequence.
  Rng rng(45);
  std::vector<double> v(2 * 200 + 1);
  for (auto& x : v) x = rng.uniform() < 0.5 ? 0.0 : 3.0;
  double prev = 1e9;
  for (std::size_t n : {25u, 50u, 100u, 200u}) {
    const std::span<const double> win(v.data() + (200 - n), 2 * n + 1);
    const auto s = poly_bounded_energy_set(win, 4.0, BandSet::single(-2, 5), 1e-3);
    CHECK(s.measure <= prev + 1e-12);
    prev = s.measure;
  }
  const std::span<const double> w50(v.data() + 150, 101);
  const auto par = poly_bounded_energy_set(w50, 4.0, BandSet::single(-2, 5), 1e-3);
  const auto ser = poly_bounded_energy_set_serial(w50, 4.0, BandSet::single(-2, 5), 1e-3);
  CHECK(par.estimate == ser.estimate);
}

TEST_CASE("singularity indicator") {
  IdsSample uniform;
  for (int i = 0; i <= 1000; ++i) {
    uniform.energies.push_back(i / 1000.0);
    uniform.k.push_back(i / 1000.0);
  }
  for (double m : {0.25, 0.5, 0.9}) CHECK(singularity_indicator(uniform, m) == doctest::Approx(m).epsilon(1e-9));

  IdsSample atoms = uniform;
  for (std::size_t i = 0; i < atoms.k.size(); ++i) atoms.k[i] = atoms.energies[i] < 0.3 ? 0.0 : atoms.energies[i] < 0.7 ? 0.5 : 1.0;
  CHECK(singularity_indicator(atoms, 0.9) < 3e-3);

  // Fibonacci coding: the indicator at mass 0.9 shrinks as the grid refines.
  const auto sys = CodingSystem::sturmian((std::sqrt(5.0L) - 1) / 2, 0.0, 3.0);
  double prev = 1e9;
  for (std::size_t pts : {201u, 801u, 3201u}) {
    const auto ids = ids_curve(coding_sampler(sys, 7), 2000, default_energy_grid(0, 3, pts), 4);
    const double v = singularity_indicator(ids, 0.9);
    CHECK(v < prev);
    prev = v;
  }
}
