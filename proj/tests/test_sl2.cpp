#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sslab/errors.hpp"
#include "sslab/rng.hpp"
#include "sslab/sl2.hpp"

using namespace sslab;

namespace {

constexpr double pi = std::numbers::pi;

Mat2 rotation(double phi) { return {std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi)}; }

// R_a diag(s, 1/s) R_b with log s uniform in [0, log smax].
Mat2 random_polar(std::mt19937_64& g, double smax) {
  std::uniform_real_distribution<double> u(0, 1);
  const double s = std::exp(u(g) * std::log(smax));
  return rotation(2 * pi * u(g)) * Mat2{s, 0, 0, 1 / s} * rotation(2 * pi * u(g));
}

Mat2 random_sl2(std::mt19937_64& g, double spread = 3.0) {
  std::normal_distribution<double> n(0.0, spread);
  for (;;) {
    Mat2 m{n(g), n(g), n(g), n(g)};
    const double det = m.det();
    if (std::abs(det) < 1e-2) continue;
    if (det < 0) m = {m.b, m.a, m.d, m.c};
    return m.scaled(1.0 / std::sqrt(std::abs(m.det())));
  }
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::precondition;
}

}  // namespace

TEST_CASE("schrodinger step") {
  CHECK(schrodinger_step(0, 0) == Mat2{0, -1, 1, 0});
  CHECK(schrodinger_step(3, 1) == Mat2{2, -1, 1, 0});
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 1000; ++i) CHECK(schrodinger_step(u(g), u(g)).det() == 1.0);
}

TEST_CASE("transfer products") {
  const std::vector<double> w00{0, 0};
  CHECK(transfer(w00, 0.0) == Mat2{-1, 0, 0, -1});
  const std::vector<double> w01{0, 1};
  CHECK(transfer(w01, 0.0).trace() == doctest::Approx(oracle::trace(w01, 0.0)));
  CHECK(transfer(w01, 0.0).trace() == doctest::Approx(-2.0));
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int i = 0; i < 50; ++i) {
    const double a = u(g), E = u(g);
    CHECK(transfer(std::vector<double>{a}, E).trace() == doctest::Approx(E - a));
  }
  SUBCASE("matches the direct product oracle") {
    for (int i = 0; i < 50; ++i) {
      std::vector<double> w(1 + g() % 12);
      for (auto& x : w) x = u(g) / 2;
      const double E = u(g);
      const auto m = transfer(w, E);
      const auto o = oracle::product(w, E);
      const double s = std::max(1.0, std::abs(o.a) + std::abs(o.b) + std::abs(o.c) + std::abs(o.d));
      CHECK(std::abs(m.a - o.a) / s < 1e-10);
      CHECK(std::abs(m.b - o.b) / s < 1e-10);
      CHECK(std::abs(m.c - o.c) / s < 1e-10);
      CHECK(std::abs(m.d - o.d) / s < 1e-10);
    }
  }
  CHECK(kind_of([] { transfer(std::vector<double>{}, 0.0); }) == ErrorKind::domain);
}

TEST_CASE("determinant stays 1 over long products") {
  // Products that stay in double range: weak disorder near the band center
  // and a periodic word inside its bands.
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  std::vector<double> w(10000);
  for (auto& x : w) x = u(g);
  for (double E : {-0.5, 0.0, 0.3}) {
    const auto m = transfer(w, E);
    CHECK(std::abs(m.det() - 1.0) < 1e-9);
  }
  const std::vector<double> periodic = Word{0, 1}.power(5000).symbols();
  for (double E : {-1.2, 1.7, 2.2}) {
    const auto m = transfer(periodic, E);
    CHECK(std::abs(m.det() - 1.0) < 1e-9);
  }
}

TEST_CASE("cocycle composition") {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 40; ++i) {
    std::vector<double> v(1 + g() % 6), w(1 + g() % 6);
    for (auto& x : v) x = u(g);
    for (auto& x : w) x = u(g);
    std::vector<double> vw = v;
    vw.insert(vw.end(), w.begin(), w.end());
    const double E = u(g);
    const Mat2 lhs = transfer(vw, E);
    const Mat2 rhs = transfer(w, E) * transfer(v, E);
    CHECK(lhs.a == doctest::Approx(rhs.a).epsilon(1e-10));
    CHECK(lhs.b == doctest::Approx(rhs.b).epsilon(1e-10));
    CHECK(lhs.c == doctest::Approx(rhs.c).epsilon(1e-10));
    CHECK(lhs.d == doctest::Approx(rhs.d).epsilon(1e-10));
  }
}

TEST_CASE("two-sided transfer") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<double> vals(8);
  for (auto& x : vals) x = u(g);
  const TwoSidedWindow win(vals);
  const double E = 0.37;
  CHECK(two_sided_transfer(win, E, 0) == Mat2::identity());
  CHECK(two_sided_transfer(win, E, 1) == schrodinger_step(E, win(0)));
  const Mat2 back = two_sided_transfer(win, E, -1) * schrodinger_step(E, win(-1));
  CHECK(back.a == doctest::Approx(1.0));
  CHECK(back.b == doctest::Approx(0.0));
  CHECK(back.c == doctest::Approx(0.0));
  CHECK(back.d == doctest::Approx(1.0));
  CHECK(kind_of([&] { two_sided_transfer(win, E, 5); }) == ErrorKind::index);
  CHECK(kind_of([&] { two_sided_transfer(win, E, -5); }) == ErrorKind::index);
}

TEST_CASE("classification") {
  CHECK(classify(Mat2{0, -1, 1, 0}) == Conjugacy::elliptic);
  CHECK(classify(Mat2::identity()) == Conjugacy::parabolic);
  CHECK(classify(Mat2{2, 0, 0, 0.5}) == Conjugacy::hyperbolic);
  CHECK(classify_trace(2.0 + 0.5 * kParabolicTolerance) == Conjugacy::parabolic);
  CHECK(classify_trace(-2.0 - 2 * kParabolicTolerance) == Conjugacy::hyperbolic);

  // Invariance under conjugation.
  std::mt19937_64 g(6);
  int tested = 0;
  for (int i = 0; i < 300; ++i) {
    const Mat2 A = random_sl2(g, 1.0), P = random_sl2(g, 1.0);
    if (std::abs(std::abs(A.trace()) - 2) < 1e-3) continue;
    const Mat2 B = P * A * P.sl_inverse();
    CHECK(classify(A) == classify(B));
    ++tested;
  }
  CHECK(tested > 200);
}

TEST_CASE("most contracted direction") {
  CHECK(most_contracted_direction(Mat2{2, 0, 0, 0.5}).angle() == doctest::Approx(pi / 2));
  for (double phi : {0.3, 1.1, 2.5, -0.7})
    CHECK(most_contracted_direction(rotation(phi) * Mat2{2, 0, 0, 0.5}).angle() == doctest::Approx(pi / 2));
  CHECK(kind_of([] { most_contracted_direction(rotation(0.4)); }) == ErrorKind::undefined_direction);

  // Dense angle-grid minimization oracle.
  std::mt19937_64 g(7);
  for (int i = 0; i < 30; ++i) {
    const Mat2 A = random_sl2(g);
    if (norm(A) < 1.5) continue;
    const double s = most_contracted_direction(A).angle();
    const auto len = [&](double t) { return std::hypot(A.a * std::cos(t) + A.b * std::sin(t), A.c * std::cos(t) + A.d * std::sin(t)); };
    double best = 1e300;
    for (int k = 0; k < 100000; ++k) best = std::min(best, len(pi * k / 100000.0));
    CHECK(len(s) <= best + 1e-9);
    CHECK(len(s) == doctest::Approx(min_singular_value(A)).epsilon(1e-9));
  }
}

TEST_CASE("stable direction") {
  CHECK(stable_direction(Mat2{2, 0, 0, 0.5}).angle() == doctest::Approx(pi / 2));
  CHECK(kind_of([] { stable_direction(rotation(0.4)); }) == ErrorKind::classification);
  std::mt19937_64 g(8);
  for (int i = 0; i < 30; ++i) {
    const Mat2 P = random_sl2(g, 1.0);
    const Mat2 A = P * Mat2{2, 0, 0, 0.5} * P.sl_inverse();
    // Image of the vertical axis under P.
    const Direction expected(std::atan2(P.d, P.b));
    CHECK(stable_direction(A).distance(expected) < 1e-9);
  }
  SUBCASE("stable and most contracted agree for large norms") {
    int tested = 0;
    for (int i = 0; i < 2000 && tested < 40; ++i) {
      const Mat2 A = random_polar(g, 1e6);
      if (norm(A) < 1e3 || classify(A) != Conjugacy::hyperbolic) continue;
      const double d = stable_direction(A).distance(most_contracted_direction(A));
      CHECK(d < 1e-4);
      // The gap between the two directions scales like 1 / (|Tr| ||A||), so
      // the 10 ||A||^-2 form needs |Tr| comparable to ||A||.
      if (std::abs(A.trace()) >= norm(A) / 10) CHECK(d <= 10.0 / (norm(A) * norm(A)) + 1e-15);
      ++tested;
    }
    CHECK(tested > 10);
  }
}

TEST_CASE("hyperbolicity certificate from norm growth") {
  std::mt19937_64 g(9);
  int tested = 0;
  for (int i = 0; i < 5000; ++i) {
    const Mat2 A = random_polar(g, 1e6);
    if (norm(A) <= 1e3) continue;
    if (norm(A * A) > std::pow(norm(A), 1.5)) {
      CHECK(classify(A) == Conjugacy::hyperbolic);
      ++tested;
    }
  }
  CHECK(tested > 10);
}

TEST_CASE("rotation angle") {
  CHECK(rotation_angle(Mat2{0, -1, 1, 0}) == doctest::Approx(0.25));
  const double t = 2 * std::cos(2 * pi * 0.1);
  CHECK(rotation_angle(Mat2{t, -1, 1, 0}) == doctest::Approx(0.1));
  CHECK(rotation_angle(rotation(2 * pi * 0.3)) == doctest::Approx(0.3));
  CHECK(kind_of([] { rotation_angle(Mat2{2, 0, 0, 0.5}); }) == ErrorKind::classification);
}

TEST_CASE("direction derivative signs") {
  SUBCASE("free potential above the spectrum") {
    const TwoSidedWindow win(std::vector<double>(6, 0.0));
    const auto rep = direction_derivative_signs(win, EnergyGrid::with_points(2.5, 4.0, 400), 3, 3);
    CHECK(rep.retained == rep.grid_points);
    CHECK(rep.forward_violations.empty());
    CHECK(rep.backward_violations.empty());
    CHECK(rep.ok());
  }
  SUBCASE("k = 1 closed form") {
    // For A = [[x, -1], [1, 0]] the stable eigenvector is (mu, 1), mu = (x - sqrt(x^2 - 4)) / 2.
    double prev = -1e9;
    for (double E = 2.2; E < 6.0; E += 0.1) {
      const double mu = (E - std::sqrt(E * E - 4)) / 2;
      const double closed = std::atan2(1.0, mu);
      CHECK(stable_direction(schrodinger_step(E, 0.0)).angle() == doctest::Approx(closed));
      CHECK(closed > prev);
      prev = closed;
    }
  }
  SUBCASE("random windows keep the signs") {
    Rng rng(11);
    for (int t = 0; t < 30; ++t) {
      const int n = 1 + static_cast<int>(rng.below(6));
      std::vector<double> vals(static_cast<std::size_t>(2 * n));
      for (auto& x : vals) x = rng.uniform() < 0.5 ? 0.0 : 3.0;
      const auto rep = direction_derivative_signs(TwoSidedWindow(vals), EnergyGrid::with_points(-3, 6, 1000), n, n);
      CHECK(rep.ok());
    }
  }
  SUBCASE("even windows reflect") {
    // v_l = v_{-1-l} and S(v)^-1 = K S(v) K with K the coordinate swap, so
    // A_{-k} = K A_k K and the two stable directions mirror about pi/4.
    std::vector<double> vals{1, 0, 2, 2, 0, 1};
    const TwoSidedWindow win(vals);
    for (double E : {3.7, 4.5, -2.9}) {
      const double f = stable_direction(two_sided_transfer(win, E, 3)).angle();
      const double b = stable_direction(two_sided_transfer(win, E, -3)).angle();
      CHECK(Direction(b).distance(Direction(pi / 2 - f)) < 1e-9);
    }
  }
}

TEST_CASE("lyapunov estimates") {
  const auto zero = [](long) { return 0.0; };
  CHECK(lyapunov_estimate(zero, 0.0, 10000) < 1e-3);
  CHECK(lyapunov_estimate(zero, 3.0, 10000) == doctest::Approx(std::log((3 + std::sqrt(5.0)) / 2)).epsilon(1e-3));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    std::vector<double> v(100000);
    Rng rng(seed);
    for (auto& x : v) x = rng.uniform() < 0.5 ? 0.0 : 3.0;
    CHECK(lyapunov_estimate([&](long j) { return v[static_cast<std::size_t>(j)]; }, 0.0, 100000) > 0.05);
  }
  // Products large enough to overflow without the log accumulation.
  CHECK(std::isfinite(lyapunov_estimate(zero, 100.0, 5000)));
  CHECK(lyapunov_estimate(zero, 100.0, 5000) == doctest::Approx(std::log((100 + std::sqrt(9996.0)) / 2)).epsilon(1e-3));
}

TEST_CASE("uniform growth outside the spectrum") {
  const Word w{0, 1};
  // Gap (0, 1) and outside [(1 - sqrt17)/2, (1 + sqrt17)/2].
  for (double E : {0.5, -2.5, 3.5}) {
    const auto fit = fit_uniform_growth(w, E);
    CHECK(fit.c > 0.0);
    CHECK(fit.lambda > 1.0);
  }
}

TEST_CASE("energy grid") {
  const auto g = EnergyGrid::with_points(-1, 1, 5);
  CHECK(g.size() == 5);
  CHECK(g[4] == doctest::Approx(1.0));
  const auto p = g.points();
  for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] > p[i - 1]);
  CHECK_THROWS_AS(EnergyGrid(1, 0, 0.1), Error);
  CHECK_THROWS_AS(EnergyGrid(0, 1, 0.0), Error);
}

TEST_CASE("directions live in [0, pi)") {
  CHECK(Direction(-0.1).angle() == doctest::Approx(pi - 0.1));
  CHECK(Direction(pi + 0.2).angle() == doctest::Approx(0.2));
  CHECK(Direction(0.1).distance(Direction(pi - 0.1)) == doctest::Approx(0.2));
}
