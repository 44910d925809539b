#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sslab/errors.hpp"
#include "sslab/periodic.hpp"
#include "sslab/quasiperiodic.hpp"
#include "sslab/sl2.hpp"

using namespace sslab;

namespace {

constexpr double pi = std::numbers::pi;

// Bump support as a union of intervals of [0, 1), splitting at the wrap.
BandSet support_set(const std::vector<Bump>& bumps) {
  std::vector<Interval> raw;
  for (const auto& b : bumps) {
    double lo = b.center - b.half_width, hi = b.center + b.half_width;
    lo -= std::floor(lo);
    hi = lo + 2 * b.half_width;
    if (hi <= 1.0) {
      raw.push_back({lo, hi});
    } else {
      raw.push_back({lo, 1.0});
      raw.push_back({0.0, hi - 1.0});
    }
  }
  return BandSet::normalize(raw);
}

const SamplingFunction& two_step() {
  static const auto g = SamplingFunction::step({{0, 1}, {1, 2}}, {0.0, 4.02});
  return g;
}

}  // namespace

TEST_CASE("rationals and sampling functions") {
  CHECK(make_rational(2, 4) == Rational{1, 2});
  CHECK(make_rational(-3, 9) == Rational{-1, 3});
  CHECK_THROWS_AS(make_rational(1, 0), Error);
  CHECK_THROWS_AS(SamplingFunction::step({{1, 2}, {1, 3}}, {0, 1}), Error);

  const auto f = SamplingFunction::trig(0.5, {1.0, 0.25}, {0.0, -0.5});
  for (double x : {0.0, 0.13, 0.77}) {
    const double expect = 0.5 + std::cos(2 * pi * x) + 0.25 * std::cos(4 * pi * x) - 0.5 * std::sin(4 * pi * x);
    CHECK(f(x) == doctest::Approx(expect));
    CHECK(f(x + 3.0) == doctest::Approx(expect));
  }
  const auto tab = SamplingFunction::tabulated({0.0, 1.0, 0.0, -1.0});
  CHECK(tab(0.125) == doctest::Approx(0.5));
  CHECK(tab(0.875) == doctest::Approx(-0.5));
  CHECK(tab.sup_norm() == 1.0);
  CHECK(tab.lipschitz() == doctest::Approx(4.0));

  const auto w = qp_word(SamplingFunction::step({{0, 1}, {1, 2}}, {0.0, 1.0}), {1, 2}, 0.25);
  CHECK(w == Word{0.0, 1.0});
}

TEST_CASE("rational spectrum") {
  SUBCASE("constant potential") {
    for (Rational a : {Rational{0, 1}, Rational{1, 3}, Rational{2, 7}}) {
      const auto s = rational_spectrum(a, SamplingFunction::constant(0.7));
      REQUIRE(s.inner.size() == 1);
      CHECK(s.inner[0].lo == doctest::Approx(-1.3));
      CHECK(s.inner[0].hi == doctest::Approx(2.7));
      CHECK(s.exact);
    }
  }
  SUBCASE("two-valued step at zero frequency") {
    const auto s = rational_spectrum({0, 1}, SamplingFunction::step({{0, 1}, {1, 2}}, {0.0, 1.0}));
    REQUIRE(s.inner.size() == 1);
    CHECK(s.inner[0].lo == doctest::Approx(-2.0));
    CHECK(s.inner[0].hi == doctest::Approx(3.0));
  }
  SUBCASE("inner estimate inside the outer one, outer close to a fine sampling") {
    const auto f = SamplingFunction::trig(0, {1.0}, {});
    const auto s = rational_spectrum({2, 5}, f);
    CHECK(s.inner.difference(s.outer).measure() == 0.0);
    BandSet fine;
    for (int j = 0; j < 4000; ++j) fine = fine.unite(band_spectrum(qp_word(f, {2, 5}, j / 4000.0)).set);
    CHECK(fine.difference(s.outer).measure() < 1e-9);
    CHECK(hausdorff_distance(fine, s.inner) < 1e-3);
  }
  SUBCASE("phase translation invariance") {
    std::mt19937_64 g(51);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 4; ++t) {
      const double c = u(g);
      // cos(2 pi (x + c)) = cos(2 pi c) cos(2 pi x) - sin(2 pi c) sin(2 pi x).
      const auto f = SamplingFunction::trig(0, {1.0}, {});
      const auto fc = SamplingFunction::trig(0, {std::cos(2 * pi * c)}, {-std::sin(2 * pi * c)});
      const auto a = rational_spectrum({1, 3}, f), b = rational_spectrum({1, 3}, fc);
      CHECK(hausdorff_distance(a.inner, b.inner) <= a.widening + b.widening);
      CHECK(std::abs(a.inner.measure() - b.inner.measure()) < 1e-2);
    }
  }
  SUBCASE("orbit identity p -> -p mod q") {
    const auto f = SamplingFunction::trig(0.2, {1.0, 0.3}, {0.1});
    for (auto [p, q] : {std::pair{1L, 5L}, {2L, 5L}, {3L, 7L}}) {
      const auto a = rational_spectrum({p, q}, f), b = rational_spectrum({q - p, q}, f);
      CHECK(hausdorff_distance(a.inner, b.inner) <= a.widening + b.widening);
    }
  }
  SUBCASE("unreachable tolerance is a resolution error") {
    RationalSpectrumOptions o;
    o.tol = 1e-14;
    o.P_max = 64;
    try {
      rational_spectrum({1, 2}, SamplingFunction::trig(0, {1.0}, {}), o);
      FAIL("expected a resolution error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::resolution);
    }
  }
}

TEST_CASE("step approximation") {
  const auto c = step_approximation(SamplingFunction::constant(2.0), 7);
  CHECK(c.error_bound == 0.0);
  for (double x : {0.0, 0.3, 0.99}) CHECK(c.s(x) == 2.0);

  const auto f = SamplingFunction::trig(0, {1.0}, {});
  const auto a = step_approximation(f, 100);
  CHECK(a.error_bound <= 2 * pi / 100 + 1e-12);
  CHECK(a.s.kind() == SamplingKind::step);
  double err = 0;
  for (int j = 0; j < 100000; ++j) err = std::max(err, std::abs(a.s(j / 100000.0) - f(j / 100000.0)));
  CHECK(err <= a.error_bound);
  double prev = 1e9;
  for (std::size_t B : {10u, 20u, 40u, 80u}) {
    const double e = step_approximation(f, B).error_bound;
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("gap closing perturbation") {
  SUBCASE("nothing to close") {
    const auto g = SamplingFunction::step({{0, 1}, {1, 2}}, {0.0, 1.0});
    const auto gc = gap_closing_perturbation({0, 1}, g, {-1.5, 2.5});
    CHECK(gc.gaps.empty());
    CHECK(gc.bumps.empty());
    CHECK(gc.sup_difference == 0.0);
    for (double x : {0.1, 0.6}) CHECK(gc.h(x) == g(x));
  }
  SUBCASE("one small gap between constant bands") {
    const auto gc = gap_closing_perturbation({0, 1}, two_step(), {-1, 5});
    REQUIRE(gc.gaps.size() == 1);
    CHECK(gc.gaps[0].gap.lo == doctest::Approx(2.0));
    CHECK(gc.gaps[0].gap.hi == doctest::Approx(2.02));
    CHECK(gc.gaps[0].located);
    CHECK(gc.verified);
    CHECK(gc.uncovered.empty());
    CHECK(gc.sup_difference <= gc.epsilon);
    CHECK(gc.support_total < gc.r);
    const auto supp = support_set(gc.bumps);
    CHECK(supp.measure() == doctest::Approx(gc.support_total));
    CHECK(rational_spectrum({0, 1}, gc.h).inner.contains(2.01));
  }
  SUBCASE("supports are invariant under the rotation") {
    GapClosingOptions o;
    o.epsilon = 0.2;
    o.r = 0.05;
    const auto f = SamplingFunction::step({{0, 1}, {1, 2}}, {0.0, 0.05});
    const auto base = rational_spectrum({1, 2}, f).inner;
    REQUIRE_FALSE(base.gaps().empty());
    const auto gc = gap_closing_perturbation({1, 2}, f, {base.lo() + 0.1, base.hi() - 0.1}, o);
    REQUIRE_FALSE(gc.bumps.empty());
    const auto supp = support_set(gc.bumps);
    std::vector<Bump> moved = gc.bumps;
    for (auto& b : moved) b.center += 0.5;
    CHECK(hausdorff_distance(supp, support_set(moved)) < 1e-12);
    CHECK(supp.measure() == doctest::Approx(gc.support_total));
    CHECK(gc.support_total < gc.r);
    CHECK(gc.sup_difference <= o.epsilon);
    CHECK(gc.verified);
  }
  SUBCASE("preconditions") {
    GapClosingOptions o;
    o.epsilon = 0.01;
    try {
      gap_closing_perturbation({0, 1}, two_step(), {-1, 5}, o);
      FAIL("wide gap accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::construction_precondition);
    }
    CHECK_THROWS_AS(gap_closing_perturbation({0, 1}, two_step(), {-3, 5}), Error);
  }
}

TEST_CASE("DOS perturbation bound") {
  const auto same = dos_perturbation_bound({0, 1}, two_step(), two_step(), 4, 100, 1);
  for (double d : same.discrepancy) CHECK(d == 0.0);
  CHECK(same.ok);

  std::vector<double> first;
  for (double r : {1e-3, 5e-4}) {
    GapClosingOptions o;
    o.r = r;
    const auto gc = gap_closing_perturbation({0, 1}, two_step(), {-1, 5}, o);
    const auto rep = dos_perturbation_bound({0, 1}, two_step(), gc.h, 4, 300, 2);
    CHECK(rep.ok);
    for (double d : rep.discrepancy) CHECK(d <= 2 * rep.r);
    if (first.empty()) {
      first = rep.discrepancy;
    } else {
      for (std::size_t i = 0; i < first.size(); ++i) {
        const double noise = 3 * (rep.sigma[i] + 1e-12);
        CHECK(std::abs(rep.discrepancy[i] - first[i] / 2) <= noise + 0.1 * first[i]);
      }
    }
  }
}

TEST_CASE("periodic DOS integral") {
  // psi = 1 integrates to 1, psi = E to the mean of the diagonal.
  const Word w{0, 1, 3};
  const auto one = [](double) { return 1.0; };
  const auto zero = [](double) { return 0.0; };
  const auto id = [](double E) { return E; };
  CHECK(periodic_dos_integral(w, one, zero, -3, 6) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(periodic_dos_integral(w, id, one, -3, 6) == doctest::Approx(4.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("continuity probes") {
  const auto f = SamplingFunction::trig(0, {1.0}, {});
  SUBCASE("constant sequence") {
    const std::vector<ApproximantStep> steps(3, ApproximantStep{{2, 5}, f});
    const auto h = hausdorff_continuity_probe(steps);
    for (double d : h.consecutive) CHECK(d == 0.0);
    const auto e = EnergyGrid::with_points(-3, 3, 201).points();
    const auto i = ids_continuity_probe(steps, e, 16);
    for (double d : i.consecutive) CHECK(d == 0.0);
  }
  SUBCASE("golden convergents") {
    const auto conv = golden_convergents(34);
    REQUIRE(conv.size() >= 5);
    CHECK(conv[0] == Rational{1, 2});
    CHECK(conv[1] == Rational{2, 3});
    CHECK(conv[2] == Rational{3, 5});
    std::vector<ApproximantStep> steps;
    for (const auto& a : conv)
      if (a.q >= 3) steps.push_back({a, f});
    CHECK(hausdorff_continuity_probe(steps).decreasing);
    const auto e = EnergyGrid::with_points(-3.2, 3.2, 801).points();
    const auto ip = ids_continuity_probe(steps, e, 32);
    CHECK(ip.decreasing);
    for (const auto& c : ip.curves) {
      for (std::size_t j = 0; j < c.size(); ++j) {
        CHECK(c[j] >= 0.0);
        CHECK(c[j] <= 1.0);
        if (j) CHECK(c[j] >= c[j - 1]);
      }
    }
  }
  SUBCASE("perturbing f by delta moves the spectrum by at most delta") {
    for (double delta : {0.05, 0.2}) {
      const auto g = SamplingFunction::trig(delta, {1.0}, {});
      const auto a = rational_spectrum({3, 8}, f), b = rational_spectrum({3, 8}, g);
      CHECK(hausdorff_distance(a.inner, b.inner) <= delta + a.widening + b.widening);
      const auto h = SamplingFunction::trig(0, {1.0 + delta}, {});
      const auto c = rational_spectrum({3, 8}, h);
      CHECK(hausdorff_distance(a.inner, c.inner) <= delta + a.widening + c.widening);
    }
  }
}
