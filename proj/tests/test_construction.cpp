#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "sslab/construction.hpp"
#include "sslab/errors.hpp"
#include "sslab/periodic.hpp"

using namespace sslab;

namespace {

const std::vector<Stage>& three_stages() {
  static const auto s = build_stages({Word{0}, Word{1}}, 3);
  return s;
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

TEST_CASE("initial stage") {
  const Stage s = initial_stage({Word{0}, Word{1}});
  CHECK(s.level == 1);
  REQUIRE(s.spectrum.size() == 1);
  CHECK(s.spectrum[0].lo == doctest::Approx(-2.0));
  CHECK(s.spectrum[0].hi == doctest::Approx(3.0));
  CHECK(s.spectrum_measure == doctest::Approx(5.0));
  CHECK(s.W == Word{0, 1});

  const Stage t = initial_stage({Word{0, 0}, Word{0, 1}});
  const BandSet expect = band_spectrum(Word{0, 0}).set.unite(band_spectrum(Word{0, 1}).set);
  CHECK(hausdorff_distance(t.spectrum, expect) < 1e-12);

  CHECK(kind_of([] { initial_stage({Word{0}}); }) == ErrorKind::construction_precondition);
  CHECK(kind_of([] { initial_stage({Word{1}, Word{1, 1}}); }) == ErrorKind::construction_precondition);
}

TEST_CASE("choose power") {
  const Word w{0}, v{1};
  const double total = band_spectrum(w).set.measure();
  const auto same = choose_power(w, w, 1e-6);
  CHECK(same.m == 2);
  CHECK(same.residual < 1e-9);

  const auto c = choose_power(v, w, 0.05 * total, 40);
  CHECK(c.m >= 2);
  CHECK(c.m <= 40);
  CHECK(c.residual < 0.05 * total);
  for (std::size_t i = 1; i < c.history.size(); ++i) CHECK(c.history[i] <= c.history[i - 1] + 1e-12);

  // Residual history against a direct recomputation with the band solver.
  BandSet covered;
  for (int k = 1; k <= c.m; ++k) covered = covered.unite(band_spectrum(v.concat(w.power(static_cast<std::size_t>(k)))).set);
  CHECK(band_spectrum(w).set.difference(covered).measure() == doctest::Approx(c.residual).epsilon(1e-9));

  SUBCASE("nonincreasing through m = 40") {
    try {
      choose_power(v, w, 1e-300, 40);
      FAIL("budget should be out of reach");
    } catch (const BudgetError& e) {
      CHECK(e.best_residual() >= 0.0);
      CHECK(e.kind() == ErrorKind::budget_failure);
    }
  }
}

TEST_CASE("next stage shape") {
  const auto& st = three_stages();
  REQUIRE(st.size() == 3);
  const Stage& s1 = st[0];
  const Stage& s2 = st[1];
  CHECK(s2.words.size() == static_cast<std::size_t>(s2.powers[0] + s2.powers[1]));
  for (const auto& w : s2.words) CHECK(w.starts_with(s1.W));
  for (int p : s2.powers) CHECK(p >= 2);

  for (std::size_t l = 1; l < st.size(); ++l) {
    const Stage& cur = st[l];
    const Stage& prev = st[l - 1];
    Word W;
    for (const auto& w : cur.words) W = W.concat(w);
    CHECK(W == cur.W);
    for (std::size_t i = 0; i < cur.words.size(); ++i) {
      const auto [k, sp] = cur.parents[i];
      CHECK(sp >= 1);
      CHECK(sp <= cur.powers[k]);
      CHECK(cur.words[i] == prev.W.concat(prev.words[k].power(static_cast<std::size_t>(sp))));
      CHECK(is_concatenation(cur.words[i], prev.words));
    }
    CHECK(cur.ledger.satisfied());
    CHECK(cur.ledger.measured_loss == doctest::Approx(prev.spectrum.difference(cur.spectrum).measure()));
    CHECK(cur.ledger.budget <= prev.base_measure * std::ldexp(1.0, -(1 + prev.level)) + 1e-12);
    BandSet u;
    for (const auto& w : cur.words) u = u.unite(band_spectrum(w).set);
    CHECK(hausdorff_distance(u, cur.spectrum) < 1e-12);
  }
}

TEST_CASE("budget ledger and certificate") {
  const auto& st = three_stages();
  const double base = st[0].spectrum_measure;
  double loss = 0, allowed = 0;
  for (std::size_t l = 1; l < st.size(); ++l) {
    loss += st[l].ledger.measured_loss;
    allowed += base * std::ldexp(1.0, -(1 + static_cast<int>(l)));
  }
  CHECK(loss < allowed);
  CHECK(allowed < base / 2);

  CHECK(lower_bound_certificate({st[0]}) == doctest::Approx(base));
  const double c2 = lower_bound_certificate({st[0], st[1]});
  const double c3 = lower_bound_certificate(st);
  CHECK(c3 <= c2 + 1e-12);
  CHECK(c2 <= base + 1e-12);
  CHECK(c3 >= base * (1 - 0.25 - 0.125));
  CHECK(c3 > base / 2);
  // The certified set lies inside the last spectrum.
  const BandSet cert = certified_set(st);
  CHECK(cert.difference(st.back().spectrum).measure() < 1e-9);
  CHECK(c3 <= st.back().spectrum_measure + 1e-9);
  CHECK(kind_of([&] { lower_bound_certificate({st[0], st[2]}); }) == ErrorKind::domain);
}

TEST_CASE("gap midpoints of the last stage are hyperbolic for every word") {
  const auto& st = three_stages();
  for (const auto& gap : st.back().spectrum.gaps()) {
    const double E = (gap.lo + gap.hi) / 2;
    for (const auto& w : st.back().words) CHECK(std::abs(discriminant(w, E)) > 2.0);
  }
}

TEST_CASE("window checks") {
  const auto& st = three_stages();
  const auto rep = minimality_window_check(st[2], st[1], st[0]);
  CHECK(rep.structure_ok);
  CHECK(rep.max_gap <= rep.gap_bound);
  CHECK(rep.missing_factors.empty());
  CHECK(rep.factor_length == st[0].W.size());
  CHECK(rep.ok());

  Stage bad = st[2];
  bad.words[0] = Word(std::vector<double>(bad.words[0].symbols().begin(), bad.words[0].symbols().end() - 1));
  CHECK_FALSE(minimality_window_check(bad, st[1], st[0]).ok());

  const Stage s1 = initial_stage({Word{0}, Word{1}});
  const auto w1 = aperiodicity_check(s1, 1);
  CHECK(w1.found);
  const auto w2 = aperiodicity_check(st[1], st[0].W.size());
  CHECK(w2.found);
  CHECK(w2.factor.size() >= st[0].W.size());
  CHECK(w2.ext_a != w2.ext_b);

  // Periodic control: one word repeated.
  Stage periodic = s1;
  periodic.words = {Word{0, 1}, Word{0, 1}};
  periodic.W = Word{0, 1, 0, 1};
  const auto none = aperiodicity_check(periodic, 2);
  CHECK_FALSE(none.found);
  CHECK(none.max_length_searched > 0);
}

TEST_CASE("stage persistence") {
  const auto& st = three_stages();
  const auto dir = std::filesystem::temp_directory_path() / "sslab_stage_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "stage2.json").string();
  persist_stage(st[1], path);
  const Stage back = load_stage(path);
  CHECK(back == st[1]);

  auto j = nlohmann::json::parse(stage_to_json(st[1]));
  j["powers"][0] = 1;
  CHECK(kind_of([&] { stage_from_json(j.dump()); }) == ErrorKind::parse);

  auto k = nlohmann::json::parse(stage_to_json(st[1]));
  k["spectrum"][0][0] = k["spectrum"][0][0].get<double>() - 0.01;
  CHECK_THROWS_AS(stage_from_json(k.dump()), Error);

  try {
    stage_from_json("{\"level\": 2,\n \"words\": [}");
    FAIL("malformed input accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
