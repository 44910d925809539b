#include "battery.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sslab/codings.hpp"
#include "sslab/construction.hpp"
#include "sslab/dos.hpp"
#include "sslab/errors.hpp"
#include "sslab/kernels.hpp"
#include "sslab/periodic.hpp"
#include "sslab/quasiperiodic.hpp"
#include "sslab/rng.hpp"
#include "sslab/sl2.hpp"

namespace sslab::battery {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

Word binary_word(std::uint64_t bits, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>((bits >> i) & 1u);
  return Word(std::move(v));
}

}  // namespace

CheckResult band_structure(std::uint64_t) {
  CheckResult r{1, "band structure", true, "", {}};
  std::vector<Word> words;
  for (std::size_t n = 1; n <= 14; ++n)
    for (std::uint64_t b = 0; b < (1ull << n); ++b) words.push_back(binary_word(b, n));
  const auto spectra = band_spectra(words);
  std::size_t bad_count = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (spectra[i].band_count != words[i].size()) ++bad_count;
    for (const auto& b : spectra[i].bands)
      for (double e : {b.lo, b.hi}) worst = std::max(worst, std::abs(std::abs(discriminant(words[i], e)) - 2.0));
  }
  r.pass = bad_count == 0 && worst <= 1e-8;
  r.summary = std::to_string(words.size()) + " words, band count mismatches " + std::to_string(bad_count) +
              ", worst ||D|-2| at edges " + fmt(worst);
  r.data = {{"words", words.size()}, {"band_count_mismatches", bad_count}, {"worst_edge_residual", worst}};
  return r;
}

CheckResult closed_forms(std::uint64_t) {
  CheckResult r{2, "closed forms", true, "", {}};
  const auto s0 = band_spectrum(Word{0.0});
  const double e0 = std::max(std::abs(s0.set.lo() + 2.0), std::abs(s0.set.hi() - 2.0));
  const auto s1 = band_spectrum(Word{0.0, 1.0});
  const double q = std::sqrt(17.0);
  const std::vector<double> expect{(1.0 - q) / 2.0, 0.0, 1.0, (1.0 + q) / 2.0};
  double e1 = s1.set.size() == 2 ? 0.0 : INFINITY;
  if (s1.set.size() == 2) {
    const std::vector<double> got{s1.set[0].lo, s1.set[0].hi, s1.set[1].lo, s1.set[1].hi};
    for (std::size_t i = 0; i < 4; ++i) e1 = std::max(e1, std::abs(got[i] - expect[i]));
  }
  r.pass = s0.set.size() == 1 && e0 <= 1e-9 && e1 <= 1e-9;
  r.summary = "Sigma([0]) error " + fmt(e0) + ", Sigma([0,1]) edge error " + fmt(e1);
  r.data = {{"zero_word", s0.set.to_string()}, {"zero_word_error", e0},
            {"period_two", s1.set.to_string()}, {"period_two_error", e1}};
  return r;
}

CheckResult power_residual(std::uint64_t) {
  CheckResult r{3, "power residual", true, "", {}};
  const Word v{1.0}, w{0.0};
  const double total = band_spectrum(w).set.measure();
  const double target = 0.05 * total;
  PowerChoice pc;
  bool reached = true;
  try {
    pc = choose_power(v, w, target, 64);
  } catch (const BudgetError& e) {
    reached = false;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < pc.history.size(); ++i)
    if (pc.history[i] > pc.history[i - 1] + 1e-12) monotone = false;
  r.pass = reached && monotone;
  r.summary = "residual below 0.05 measure(Sigma(w)) at m = " + std::to_string(pc.m) + " (" +
              fmt(pc.residual) + "), nonincreasing " + (monotone ? "yes" : "no");
  r.data = {{"target", target}, {"m", pc.m}, {"residual", pc.residual}, {"history", pc.history},
            {"monotone", monotone}};
  return r;
}

namespace {

std::vector<Stage> three_stages() { return build_stages({Word{0.0}, Word{1.0}}, 3); }

}  // namespace

CheckResult construction_certificate(std::uint64_t) {
  CheckResult r{4, "construction certificate", true, "", {}};
  const auto stages = three_stages();
  bool ledger = stages.size() == 3;
  json rows = json::array();
  for (const auto& s : stages) {
    if (s.level > 1) ledger = ledger && s.ledger.satisfied();
    rows.push_back({{"level", s.level},
                    {"words", s.words.size()},
                    {"W_length", s.W.size()},
                    {"measure", s.spectrum_measure},
                    {"budget", s.ledger.budget},
                    {"loss", s.ledger.measured_loss},
                    {"powers", s.powers}});
  }
  const double base = stages.front().spectrum_measure;
  const double cert = lower_bound_certificate(stages);
  const double need = base * (1.0 - 0.25 - 0.125);
  r.pass = ledger && cert >= need && cert > base / 2.0;
  r.summary = "certificate " + fmt(cert) + " >= " + fmt(need) + ", ledger " + (ledger ? "satisfied" : "violated");
  r.data = {{"stages", rows}, {"certificate", cert}, {"required", need}, {"ledger_satisfied", ledger}};
  return r;
}

CheckResult window_checks(std::uint64_t) {
  CheckResult r{5, "window checks", true, "", {}};
  const auto stages = three_stages();
  const auto rep = minimality_window_check(stages[2], stages[1], stages[0]);
  const auto wit = aperiodicity_check(stages[1], stages[0].W.size());
  // Negative control: one stage-3 word truncated by a symbol.
  Stage bad = stages[2];
  std::vector<double> sym = bad.words[0].symbols();
  sym.pop_back();
  bad.words[0] = Word(sym);
  const auto neg = minimality_window_check(bad, stages[1], stages[0]);
  r.pass = rep.ok() && wit.found && !neg.ok();
  r.summary = "minimality " + std::string(rep.ok() ? "ok" : "failed") + " (max gap " + std::to_string(rep.max_gap) +
              " <= " + std::to_string(rep.gap_bound) + ", " + std::to_string(rep.factors_checked) +
              " factors), aperiodicity witness " + (wit.found ? "found" : "missing") + ", corrupted stage " +
              (neg.ok() ? "accepted" : "rejected");
  r.data = {{"max_gap", rep.max_gap},
            {"gap_bound", rep.gap_bound},
            {"factor_length", rep.factor_length},
            {"factors_checked", rep.factors_checked},
            {"missing_factors", rep.missing_factors.size()},
            {"witness_found", wit.found},
            {"witness_length", wit.factor.size()},
            {"negative_control_rejected", !neg.ok()},
            {"negative_control_errors", neg.structure_errors}};
  return r;
}

CheckResult direction_monotonicity(std::uint64_t seed) {
  CheckResult r{6, "direction monotonicity", true, "", {}};
  Rng rng(mix64(seed ^ 6));
  const auto grid = EnergyGrid::with_points(-3.0, 6.0, 2000);
  json rows = json::array();
  std::size_t failures = 0, retained = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + static_cast<int>(rng.below(10));
    std::vector<double> v(2 * static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.below(2) ? 3.0 : 0.0;
    std::string text;
    for (double x : v) text += x == 0.0 ? '0' : '3';
    const auto rep = direction_derivative_signs(TwoSidedWindow(v), grid, n, n);
    failures += !rep.ok();
    retained += rep.retained;
    rows.push_back({{"window", text},
                    {"k", n},
                    {"retained", rep.retained},
                    {"forward_violations", rep.forward_violations.size()},
                    {"backward_violations", rep.backward_violations.size()},
                    {"sign_changes", rep.sign_changes},
                    {"bound", rep.sign_change_bound}});
  }
  r.pass = failures == 0;
  r.summary = "20 windows, " + std::to_string(retained) + " retained grid points, " + std::to_string(failures) +
              " windows with violations";
  r.data = {{"windows", rows}, {"failures", failures}};
  return r;
}

CheckResult complexity_formulas(std::uint64_t seed) {
  CheckResult r{7, "complexity formulas", true, "", {}};
  Rng rng(mix64(seed ^ 7));
  json iets = json::array();
  bool iet_ok = true;
  std::vector<std::size_t> n30(30);
  for (std::size_t i = 0; i < 30; ++i) n30[i] = i + 1;
  for (int rr : {3, 4}) {
    const auto lengths = random_simplex(rr, rng.next());
    const auto sys = CodingSystem::reversal_iet(lengths);
    Phase x0;
    x0.x = {static_cast<long double>(rng.uniform())};
    const auto prof = complexity_bound_check(sys, n30, 1000000, x0);
    bool geometric = true;
    for (std::size_t n : {10u, 20u, 30u})
      geometric = geometric && cylinder_measures(sys, n).cylinders.size() == static_cast<std::size_t>(rr - 1) * n + 1;
    std::vector<double> lam(lengths.begin(), lengths.end());
    iets.push_back({{"r", rr}, {"lengths", lam}, {"p", prof.p}, {"affine_exact", prof.affine_exact},
                    {"geometric_exact", geometric}});
    iet_ok = iet_ok && prof.affine_exact && geometric;
  }
  const long double golden = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  std::vector<std::size_t> n50(50);
  for (std::size_t i = 0; i < 50; ++i) n50[i] = i + 1;
  Phase xs;
  xs.x = {static_cast<long double>(rng.uniform())};
  const auto sturm = complexity_bound_check(CodingSystem::sturmian(golden), n50, 100000, xs);
  bool sturm_ok = true;
  for (std::size_t i = 0; i < 50; ++i) sturm_ok = sturm_ok && sturm.p[i] == sturm.n[i] + 1;

  std::vector<std::size_t> n40(40);
  for (std::size_t i = 0; i < 40; ++i) n40[i] = i + 1;
  Phase xk;
  xk.x = {static_cast<long double>(rng.uniform()), static_cast<long double>(rng.uniform())};
  const auto skew = complexity_bound_check(CodingSystem::skew_grid(golden, 2), n40, 2000000, xk);
  double C = 0.0;
  for (std::size_t i = 0; i < 10; ++i) C = std::max(C, static_cast<double>(skew.p[i]) / std::pow(double(i + 1), 3.0));
  bool skew_ok = true;
  std::size_t first_bad = 0;
  for (std::size_t i = 0; i < 40; ++i)
    if (static_cast<double>(skew.p[i]) > C * std::pow(double(i + 1), 3.0)) {
      skew_ok = false;
      if (!first_bad) first_bad = i + 1;
    }
  r.pass = iet_ok && sturm_ok && skew_ok;
  r.summary = std::string("IET (r-1)n+1 ") + (iet_ok ? "exact" : "violated") + ", Sturmian n+1 " +
              (sturm_ok ? "exact" : "violated") + ", skew p(n) <= " + fmt(C) + " n^3 " +
              (skew_ok ? "holds" : "fails at n=" + std::to_string(first_bad)) + " through n=40";
  r.data = {{"iet", iets}, {"sturmian_p", sturm.p}, {"sturmian_ok", sturm_ok},
            {"skew_p", skew.p}, {"skew_C", C}, {"skew_ok", skew_ok}};
  return r;
}

CheckResult ids_oracles(std::uint64_t seed) {
  CheckResult r{8, "IDS oracles", true, "", {}};
  const std::size_t N = 2000;
  std::vector<double> inner;
  for (int i = 0; i <= 380; ++i) inner.push_back(-1.9 + 0.01 * i);
  const auto free_ids = ids_curve(periodic_sampler(Word{0.0}), N, inner, 1);
  double free_err = 0.0;
  for (std::size_t i = 0; i < inner.size(); ++i)
    free_err = std::max(free_err, std::abs(free_ids.k[i] - std::acos(-inner[i] / 2.0) / std::acos(-1.0)));

  Rng rng(mix64(seed ^ 8));
  double periodic_err = 0.0;
  json words = json::array();
  for (int t = 0; t < 10; ++t) {
    const std::size_t len = 1 + rng.below(8);
    std::vector<double> v(len);
    for (auto& x : v) x = std::round(rng.uniform(0.0, 3.0) * 1000.0) / 1000.0;
    const Word w(v);
    const auto grid = default_energy_grid(w.min(), w.max(), 801);
    const auto ids = ids_curve(periodic_sampler(w), N, grid, len);
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) err = std::max(err, std::abs(ids.k[i] - periodic_ids(w, grid[i])));
    periodic_err = std::max(periodic_err, err);
    words.push_back({{"word", v}, {"max_error", err}});
  }

  json thouless = json::array();
  double th_err = 0.0;
  for (const Word& w : {Word{0.0}, Word{0.0, 1.0}}) {
    const auto bs = band_spectrum(w);
    std::vector<double> es;
    for (int i = 0; i <= 60; ++i) {
      const double E = w.min() - 3.0 + (w.max() - w.min() + 6.0) * i / 60.0;
      bool near = false;
      for (const auto& b : bs.set.intervals())
        near = near || std::abs(E - b.lo) < 1e-2 || std::abs(E - b.hi) < 1e-2;
      if (!near) es.push_back(E);
    }
    const auto rep = thouless_check(w, es);
    th_err = std::max(th_err, rep.max_error);
    thouless.push_back({{"word", w.symbols()}, {"energies", es.size()}, {"max_error", rep.max_error}});
  }
  const double tol = 2.0 / static_cast<double>(N);
  r.pass = free_err <= 5e-3 && periodic_err <= tol && th_err < 1e-2;
  r.summary = "free IDS error " + fmt(free_err) + ", periodic vs truncation " + fmt(periodic_err) + " (2/N = " +
              fmt(tol) + "), Thouless error " + fmt(th_err);
  r.data = {{"free_error", free_err}, {"periodic_words", words}, {"periodic_error", periodic_err},
            {"thouless", thouless}, {"thouless_error", th_err}};
  return r;
}

CheckResult poly_bounded_decay(std::uint64_t seed) {
  CheckResult r{9, "poly-bounded energy sets", true, "", {}};
  const long double golden = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  const auto sys = CodingSystem::sturmian(golden, 0.0, 3.0);
  const double margin = diophantine_margin({golden}, 1.0, 200);
  BandSet lambda;
  for (long q : {5L, 8L}) {
    Phase p;
    p.x = {0.0L};
    const Word w(symbol_values(sys, orbit_coding(sys, p, 1, q).symbols));
    lambda = lambda.unite(band_spectrum(w).set);
  }
  Rng rng(mix64(seed ^ 9));
  Phase x0;
  x0.x = {static_cast<long double>(rng.uniform())};
  std::vector<double> measures;
  for (long N : {50L, 100L, 200L, 400L}) {
    const auto v = symbol_values(sys, orbit_coding(sys, x0, -N, N).symbols);
    measures.push_back(poly_bounded_energy_set(v, 4.0, lambda, 1e-4).measure);
  }
  bool dec = true;
  for (std::size_t i = 1; i < measures.size(); ++i) dec = dec && measures[i] < measures[i - 1];
  r.pass = dec && margin > 0.0;
  std::string ms;
  for (double m : measures) ms += (ms.empty() ? "" : ", ") + fmt(m);
  r.summary = "measures " + ms + " for N = 50, 100, 200, 400 (Lambda measure " + fmt(lambda.measure()) + ")";
  r.data = {{"lambda", lambda.to_string()}, {"lambda_measure", lambda.measure()}, {"diophantine_margin", margin},
            {"N", {50, 100, 200, 400}}, {"measures", measures}, {"strictly_decreasing", dec}};
  return r;
}

CheckResult gap_closing(std::uint64_t seed) {
  CheckResult r{10, "gap closing", true, "", {}};
  const Rational beta{0, 1};
  const auto g = SamplingFunction::step({{0, 1}, {1, 2}}, {0.0, 4.02});
  const Interval I{-1.0, 5.0};
  const auto gc = gap_closing_perturbation(beta, g, I);
  const auto dr = dos_perturbation_bound(beta, g, gc.h, 10, 1000, mix64(seed ^ 10));
  double worst = 0.0;
  for (std::size_t i = 0; i < dr.discrepancy.size(); ++i)
    worst = std::max(worst, dr.discrepancy[i] - 3.0 * dr.sigma[i]);
  const bool gap_small = !gc.gaps.empty() && gc.gaps[0].gap.length() < gc.epsilon;
  r.pass = gap_small && gc.sup_difference <= gc.epsilon && gc.support_total < gc.r && gc.verified && dr.ok;
  r.summary = std::to_string(gc.gaps.size()) + " gap(s) closed with epsilon " + fmt(gc.epsilon) + ", ||g-h|| " +
              fmt(gc.sup_difference) + ", support " + fmt(gc.support_total) + " < r = " + fmt(gc.r) +
              ", uncovered " + std::to_string(gc.uncovered.size()) + "/" + std::to_string(gc.verify_points) +
              ", DOS bound " + (dr.ok ? "respected" : "violated");
  json gaps = json::array();
  for (const auto& f : gc.gaps)
    gaps.push_back({{"lo", f.gap.lo}, {"hi", f.gap.hi}, {"omega", f.omega}, {"abut_edge", f.abut_edge},
                    {"located", f.located}});
  r.data = {{"gaps", gaps}, {"epsilon", gc.epsilon}, {"half_width", gc.half_width},
            {"support_total", gc.support_total}, {"r", gc.r}, {"sup_difference", gc.sup_difference},
            {"verify_points", gc.verify_points}, {"uncovered", gc.uncovered.size()},
            {"dos_discrepancy", dr.discrepancy}, {"dos_sigma", dr.sigma}, {"dos_bound", dr.bound},
            {"worst_minus_3sigma", worst}};
  return r;
}

CheckResult continuity_probes(std::uint64_t) {
  CheckResult r{11, "continuity probes", true, "", {}};
  const auto f = SamplingFunction::trig(0.0, {1.0}, {});
  std::vector<ApproximantStep> steps;
  for (const auto& a : golden_convergents(89))
    if (a.q >= 3) steps.push_back({a, f});
  const auto hp = hausdorff_continuity_probe(steps);
  std::vector<double> energies;
  for (int i = 0; i <= 2000; ++i) energies.push_back(-3.2 + 6.4 * i / 2000.0);
  const auto ip = ids_continuity_probe(steps, energies, 64);
  r.pass = hp.decreasing && ip.decreasing;
  r.summary = std::string("Hausdorff distances ") + (hp.decreasing ? "decreasing" : "not decreasing") + " (last " +
              fmt(hp.consecutive.back()) + "), IDS distances " + (ip.decreasing ? "decreasing" : "not decreasing") +
              " (last " + fmt(ip.consecutive.back()) + ")";
  json qs = json::array();
  for (const auto& s : steps) qs.push_back(std::to_string(s.alpha.p) + "/" + std::to_string(s.alpha.q));
  r.data = {{"convergents", qs}, {"hausdorff", hp.consecutive}, {"hausdorff_to_last", hp.to_last},
            {"ids", ip.consecutive}, {"ids_to_last", ip.to_last}};
  return r;
}

const std::vector<Check>& checks() {
  static const std::vector<Check> all{
      {1, "band structure", band_structure},
      {2, "closed forms", closed_forms},
      {3, "power residual", power_residual},
      {4, "construction certificate", construction_certificate},
      {5, "window checks", window_checks},
      {6, "direction monotonicity", direction_monotonicity},
      {7, "complexity formulas", complexity_formulas},
      {8, "IDS oracles", ids_oracles},
      {9, "poly-bounded energy sets", poly_bounded_decay},
      {10, "gap closing", gap_closing},
      {11, "continuity probes", continuity_probes},
  };
  return all;
}

const Check& find_check(int id) {
  for (const auto& c : checks())
    if (c.id == id) return c;
  fail(ErrorKind::domain, "no check with id " + std::to_string(id));
}

}  // namespace sslab::battery
