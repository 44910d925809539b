#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sslab/errors.hpp"
#include "sslab/kernels.hpp"
#include "sslab/periodic.hpp"

using namespace sslab;

namespace {

const double s17 = std::sqrt(17.0);

Word random_word(std::mt19937_64& g, std::size_t n, std::vector<double> alphabet = {0.0, 1.0}) {
  std::vector<double> v(n);
  for (auto& x : v) x = alphabet[g() % alphabet.size()];
  return Word(v);
}

}  // namespace

TEST_CASE("discriminant") {
  for (double E : {-3.0, -0.4, 0.0, 1.3, 5.0}) {
    CHECK(discriminant(Word{0.7}, E) == doctest::Approx(E - 0.7));
    CHECK(discriminant(Word{0, 0}, E) == doctest::Approx(E * E - 2));
    CHECK(discriminant(Word{0, 1}, E) == doctest::Approx(E * (E - 1) - 2));
  }
  // Degree-n polynomial with leading coefficient 1.
  std::mt19937_64 g(31);
  for (int t = 0; t < 20; ++t) {
    const Word w = random_word(g, 1 + g() % 10, {0.0, 1.0, 2.5});
    const double E = 1e4;
    CHECK(discriminant(w, E) / std::pow(E, static_cast<double>(w.size())) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(discriminant(w, 0.37) == doctest::Approx(oracle::trace(w.symbols(), 0.37)));
  }
}

TEST_CASE("closed-form spectra") {
  const auto s0 = band_spectrum(Word{0});
  CHECK(s0.band_count == 1);
  REQUIRE(s0.set.size() == 1);
  CHECK(s0.set[0].lo == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(s0.set[0].hi == doctest::Approx(2.0).epsilon(1e-12));

  const auto s00 = band_spectrum(Word{0, 0});
  CHECK(s00.band_count == 2);
  REQUIRE(s00.set.size() == 1);
  CHECK(s00.set[0].lo == doctest::Approx(-2.0));
  CHECK(s00.set[0].hi == doctest::Approx(2.0));
  REQUIRE(s00.tangencies.size() == 1);
  CHECK(std::abs(s00.tangencies[0]) < 1e-6);

  const auto s01 = band_spectrum(Word{0, 1});
  CHECK(s01.band_count == 2);
  REQUIRE(s01.set.size() == 2);
  CHECK(std::abs(s01.set[0].lo - (1 - s17) / 2) < 1e-9);
  CHECK(std::abs(s01.set[0].hi - 0.0) < 1e-9);
  CHECK(std::abs(s01.set[1].lo - 1.0) < 1e-9);
  CHECK(std::abs(s01.set[1].hi - (1 + s17) / 2) < 1e-9);
  CHECK(s01.set.measure() == doctest::Approx(s17 - 1));
}

TEST_CASE("band count and edges on random words") {
  std::mt19937_64 g(32);
  for (int t = 0; t < 200; ++t) {
    const Word w = random_word(g, 1 + g() % 30, {0.0, 1.0, -0.5, 2.0});
    const auto s = band_spectrum(w);
    CHECK(s.band_count == w.size());
    CHECK(s.bands.size() == w.size());
    // Long words have steep discriminants; the residual is judged against
    // the slope times the bisection tolerance.
    const auto residual_ok = [&](double E) {
      const double h = 1e-7;
      const double slope = std::abs(discriminant(w, E + h) - discriminant(w, E - h)) / (2 * h);
      return std::abs(std::abs(discriminant(w, E)) - 2) < 1e-8 + 1e-10 * slope;
    };
    for (const auto& b : s.bands) {
      CHECK(residual_ok(b.lo));
      CHECK(residual_ok(b.hi));
      CHECK(b.lo >= w.min() - 2 - 1e-9);
      CHECK(b.hi <= w.max() + 2 + 1e-9);
    }
  }
}

TEST_CASE("edges of short binary words satisfy |D| = 2 to 1e-8") {
  std::mt19937_64 g(37);
  for (int t = 0; t < 300; ++t) {
    const Word w = random_word(g, 1 + g() % 14);
    for (const auto& b : band_spectrum(w).bands) {
      CHECK(std::abs(std::abs(discriminant(w, b.lo)) - 2) < 1e-8);
      CHECK(std::abs(std::abs(discriminant(w, b.hi)) - 2) < 1e-8);
    }
  }
}

TEST_CASE("dense scan cross-check") {
  std::mt19937_64 g(33);
  for (int t = 0; t < 10; ++t) {
    const Word w = random_word(g, 2 + g() % 5);
    const auto s = band_spectrum(w);
    const double step = 1e-4;
    const auto scan = oracle::band_scan(w.symbols(), w.min() - 2.5, w.max() + 2.5, step);
    // Each scanned run sits inside the solver set and every solver band is seen.
    for (const auto& [a, b] : scan) {
      CHECK(s.set.contains(a, 1e-9));
      CHECK(s.set.contains(b, 1e-9));
    }
    std::vector<Interval> raw;
    for (auto [a, b] : scan) raw.push_back({a, b});
    const auto scanned = BandSet::normalize(raw);
    CHECK(hausdorff_distance(scanned, s.set) <= step);
    CHECK(std::abs(scanned.measure() - s.set.measure()) <= 2 * step * static_cast<double>(s.set.size()));
  }
}

TEST_CASE("spectral invariances") {
  std::mt19937_64 g(34);
  for (int t = 0; t < 30; ++t) {
    const Word w = random_word(g, 1 + g() % 8, {0.0, 1.0, 3.0});
    const auto base = band_spectrum(w).set;
    for (std::size_t k : {2u, 3u}) CHECK(hausdorff_distance(band_spectrum(w.power(k)).set, base) < 1e-7);
    CHECK(hausdorff_distance(band_spectrum(w.rotate(1 + g() % w.size())).set, base) < 1e-9);
  }
}

TEST_CASE("rotation number") {
  CHECK(rotation_number(Word{0}, 0.0) == doctest::Approx(0.25));
  CHECK(rotation_number(Word{0}, std::sqrt(2.0)) == doctest::Approx(0.125));
  CHECK_THROWS_AS(rotation_number(Word{0, 1}, 0.5), Error);
  const Word w{0, 1};
  for (const auto& b : band_spectrum(w).bands) {
    double prev = 0;
    int dir = 0;
    for (int i = 1; i <= 100; ++i) {
      const double E = b.lo + (b.hi - b.lo) * i / 101.0;
      const double th = rotation_number(w, E);
      if (i > 1) {
        const int d = th > prev ? 1 : -1;
        CHECK(th != prev);
        if (dir == 0) dir = d;
        CHECK(d == dir);
      }
      prev = th;
    }
  }
}

TEST_CASE("periodic IDS") {
  CHECK(periodic_ids(Word{0}, 0.0) == doctest::Approx(0.5));
  CHECK(periodic_ids(Word{0}, 2.0) == 1.0);
  CHECK(periodic_ids(Word{0}, 7.0) == 1.0);
  CHECK(periodic_ids(Word{0}, -7.0) == 0.0);
  for (double E : {0.1, 0.5, 0.9}) CHECK(periodic_ids(Word{0, 1}, E) == doctest::Approx(0.5));
  for (double E = -2.0; E <= 2.0; E += 0.1) CHECK(periodic_ids(Word{0}, E) == doctest::Approx(oracle::free_ids(E)).epsilon(1e-9));
}

TEST_CASE("gap midpoints are hyperbolic") {
  std::mt19937_64 g(35);
  for (int t = 0; t < 30; ++t) {
    const Word w = random_word(g, 2 + g() % 10);
    for (const auto& gap : band_spectrum(w).set.gaps())
      CHECK(std::abs(discriminant(w, (gap.lo + gap.hi) / 2)) > 2.0);
  }
}

TEST_CASE("length cap") {
  CHECK_THROWS_AS(band_spectrum(Word{0}.power(kMaxBandWordLength + 1)), Error);
}

TEST_CASE("parallel band spectra match the serial reference") {
  std::mt19937_64 g(36);
  std::vector<Word> words;
  for (int t = 0; t < 64; ++t) words.push_back(random_word(g, 1 + g() % 12));
  const auto a = band_spectra(words), b = band_spectra_serial(words);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].set == b[i].set);
    CHECK(a[i].bands == b[i].bands);
  }
}
