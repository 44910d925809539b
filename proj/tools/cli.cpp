#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "battery.hpp"
#include "json.hpp"
#include "sslab/codings.hpp"
#include "sslab/construction.hpp"
#include "sslab/dos.hpp"
#include "sslab/errors.hpp"
#include "sslab/kernels.hpp"
#include "sslab/parallel.hpp"
#include "sslab/periodic.hpp"
#include "sslab/quasiperiodic.hpp"
#include "sslab/rng.hpp"
#include "sslab/sl2.hpp"

namespace sslab::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Thrown for anything the user can fix in the invocation or config file.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---- parameter parsing ----

Word parse_word(const std::string& text, const std::string& key) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("config key '" + key + "': cannot parse word symbol '" + item + "'");
    }
  }
  if (v.empty()) throw UsageError("config key '" + key + "': empty word");
  return Word(std::move(v));
}

std::vector<Word> parse_words(const std::string& text, const std::string& key) {
  std::vector<Word> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(parse_word(item, key));
  if (out.empty()) throw UsageError("config key '" + key + "': no words");
  return out;
}

std::string type_name(const json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

// Merges `given` into `defaults`, rejecting unknown keys and type changes.
void merge_checked(json& defaults, const json& given, const std::string& where) {
  if (!given.is_object()) throw UsageError("config " + (where.empty() ? "/" : where) + " must be an object");
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string path = where + "/" + it.key();
    if (!defaults.contains(it.key())) throw UsageError("unknown config key '" + path + "'");
    json& slot = defaults[it.key()];
    const json& v = it.value();
    if (slot.is_object()) {
      merge_checked(slot, v, path);
      continue;
    }
    const bool ok = (slot.is_number_integer() && (v.is_number_integer() || v.is_number_unsigned())) ||
                    (slot.is_number_float() && v.is_number()) ||
                    (slot.is_boolean() && v.is_boolean()) || (slot.is_string() && v.is_string()) ||
                    (slot.is_array() && v.is_array());
    if (!ok)
      throw UsageError("config key '" + path + "' must be " + type_name(slot) + ", got " + type_name(v));
    slot = v;
  }
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

// ---- subcommand parameter blocks ----

const double kGolden = 0.6180339887498948482;

json defaults_for(const std::string& sub) {
  if (sub == "bands") return {{"word", "0,1"}, {"discriminant_points", 0}};
  if (sub == "construct")
    return {{"seed_words", "0;1"}, {"stages", 3}, {"power_cap", kDefaultPowerCap}, {"window_checks", true}};
  if (sub == "coding")
    return {{"system", "sturmian"},
            {"alpha", kGolden},
            {"alpha2", 0.41421356237309504880},
            {"values", json::array()},
            {"r", 3},
            {"lengths", json::array()},
            {"grid", 2},
            {"probabilities", {0.5, 0.5}},
            {"n_max", 30},
            {"sample_length", 1000000},
            {"transitivity", false},
            {"transitivity_n", 4},
            {"transitivity_C", 1.0},
            {"phases", 16}};
  if (sub == "dos")
    return {{"source", "word"},
            {"word", "0"},
            {"alpha", kGolden},
            {"values", {0.0, 1.0}},
            {"N", 2000},
            {"phases", 64},
            {"grid_points", 4001},
            {"lyapunov_length", 100000},
            {"masses", {0.5, 0.9}},
            {"thouless", false}};
  if (sub == "qp")
    return {{"mode", "spectrum"},
            {"p", 1},
            {"q", 2},
            {"f", {{"kind", "trig"}, {"a0", 0.0}, {"cos", {1.0}}, {"sin", json::array()},
                   {"breakpoints", json::array()}, {"values", json::array()}}},
            {"tol", 1e-4},
            {"interval", {-1.0, 5.0}},
            {"epsilon", 0.0},
            {"r", 1e-3},
            {"verify_tol", 1e-4},
            {"dos_test_functions", 10},
            {"dos_samples", 1000},
            {"min_q", 3},
            {"max_q", 89},
            {"ids_points", 2001},
            {"ids_phases", 64}};
  if (sub == "verify") return {{"checks", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}}};
  if (sub == "report") return {{"input", ""}};
  throw UsageError("unknown subcommand '" + sub + "'");
}

// ---- output helpers ----

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void text(const std::string& name, const std::string& body) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) fail(ErrorKind::domain, "cannot write " + (dir_ / name).string());
    f << body;
    files_.push_back(name);
  }
  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

// CSV with '#' metadata lines so a curve carries its own resolution.
class Table {
 public:
  Table(std::vector<std::string> columns, const json& meta) : columns_(std::move(columns)) {
    for (auto it = meta.begin(); it != meta.end(); ++it)
      head_ += "# " + it.key() + "=" + (it->is_string() ? it->get<std::string>() : it->dump()) + "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) body_ += (i ? "," : "") + cells[i];
    body_ += "\n";
  }
  std::string str() const {
    std::string s = head_;
    for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
    return s + "\n" + body_;
  }

 private:
  std::vector<std::string> columns_;
  std::string head_, body_;
};

struct CheckLog {
  json entries = json::array();
  bool all = true;
  void add(const std::string& name, bool pass, const std::string& detail) {
    entries.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    all = all && pass;
  }
};

// ---- subcommands ----

void run_bands(const json& cfg, std::uint64_t, Outputs& out, CheckLog& checks) {
  const Word w = parse_word(cfg["word"], "word");
  const auto bs = band_spectrum(w);
  json meta = {{"subcommand", "bands"}, {"word", cfg["word"]}, {"edge_tolerance", "1e-13 relative"},
               {"merge_tolerance", kMergeTolerance}};
  Table t({"band", "lo", "hi"}, meta);
  for (std::size_t i = 0; i < bs.bands.size(); ++i) t.row({std::to_string(i), num(bs.bands[i].lo), num(bs.bands[i].hi)});
  out.text("bands.csv", t.str());
  json set = json::array();
  for (const auto& iv : bs.set.intervals()) set.push_back({iv.lo, iv.hi});
  out.json_file("spectrum.json", {{"word", w.symbols()},
                                  {"band_count", bs.band_count},
                                  {"spectrum", set},
                                  {"measure", bs.set.measure()},
                                  {"tangencies", bs.tangencies}});
  const int points = cfg["discriminant_points"];
  if (points > 1) {
    Table d({"E", "D"}, {{"subcommand", "bands"}, {"points", points}});
    const auto grid = EnergyGrid::with_points(w.min() - 2.5, w.max() + 2.5, static_cast<std::size_t>(points));
    for (std::size_t i = 0; i < grid.size(); ++i) d.row({num(grid[i]), num(discriminant(w, grid[i]))});
    out.text("discriminant.csv", d.str());
  }
  checks.add("band_count", bs.band_count == w.size(),
             std::to_string(bs.band_count) + " bands for |w| = " + std::to_string(w.size()));
}

void run_construct(const json& cfg, std::uint64_t, Outputs& out, CheckLog& checks) {
  const auto seeds = parse_words(cfg["seed_words"], "seed_words");
  const int levels = cfg["stages"];
  const int cap = cfg["power_cap"];
  if (levels < 1) throw UsageError("config key 'stages' must be >= 1");
  if (cap < 2) throw UsageError("config key 'power_cap' must be >= 2");
  const auto stages = build_stages(seeds, levels, cap);
  Table t({"level", "words", "W_length", "measure", "budget", "loss", "powers"},
          {{"subcommand", "construct"}, {"seed_words", cfg["seed_words"]}, {"power_cap", cap},
           {"budget_schedule", "measure(Sigma_1) 2^-(1+level)"}});
  bool ledger = true;
  for (const auto& s : stages) {
    std::string powers;
    for (int m : s.powers) powers += (powers.empty() ? "" : ";") + std::to_string(m);
    t.row({std::to_string(s.level), std::to_string(s.words.size()), std::to_string(s.W.size()),
           num(s.spectrum_measure), s.level > 1 ? num(s.ledger.budget) : "",
           s.level > 1 ? num(s.ledger.measured_loss) : "", powers});
    if (s.level > 1) ledger = ledger && s.ledger.satisfied();
    out.text("stage_" + std::to_string(s.level) + ".json", stage_to_json(s) + "\n");
  }
  out.text("ledger.csv", t.str());
  const double base = stages.front().spectrum_measure;
  double need = base;
  for (int l = 1; l < levels; ++l) need -= base * std::ldexp(1.0, -(1 + l));
  const double cert = lower_bound_certificate(stages);
  json report = {{"base_measure", base}, {"certificate", cert}, {"required", need}, {"ledger_satisfied", ledger}};
  checks.add("ledger", ledger, "every stage loss below its budget");
  checks.add("certificate", cert >= need, num(cert) + " >= " + num(need));
  if (cfg["window_checks"].get<bool>() && levels >= 2) {
    const auto wit = aperiodicity_check(stages[1], stages[0].W.size());
    report["aperiodicity_witness"] = {{"found", wit.found}, {"length", wit.factor.size()},
                                      {"max_length_searched", wit.max_length_searched}};
    checks.add("aperiodicity_witness", wit.found, "stage 2, l0 = |W_1|");
  }
  if (cfg["window_checks"].get<bool>() && levels >= 3) {
    const auto rep = minimality_window_check(stages[2], stages[1], stages[0]);
    report["minimality"] = {{"ok", rep.ok()}, {"max_gap", rep.max_gap}, {"gap_bound", rep.gap_bound},
                            {"factor_length", rep.factor_length}, {"factors_checked", rep.factors_checked},
                            {"missing_factors", rep.missing_factors.size()},
                            {"structure_errors", rep.structure_errors}};
    checks.add("minimality_window", rep.ok(), "stages 3, 2, 1");
  }
  out.json_file("certificate.json", report);
}

CodingSystem coding_from(const json& cfg, std::uint64_t seed) {
  const std::string kind = cfg["system"];
  const auto alpha = static_cast<long double>(cfg["alpha"].get<double>());
  const auto values = cfg["values"].get<std::vector<double>>();
  if (kind == "sturmian") {
    if (!values.empty() && values.size() != 2) throw UsageError("config key 'values' needs two entries");
    return values.empty() ? CodingSystem::sturmian(alpha) : CodingSystem::sturmian(alpha, values[0], values[1]);
  }
  if (kind == "iet") {
    auto lengths = cfg["lengths"].get<std::vector<double>>();
    std::vector<long double> l(lengths.begin(), lengths.end());
    if (l.empty()) l = random_simplex(cfg["r"].get<int>(), seed);
    return CodingSystem::reversal_iet(l);
  }
  if (kind == "skew") return CodingSystem::skew_grid(alpha, cfg["grid"].get<int>());
  if (kind == "torus") {
    const auto a2 = static_cast<long double>(cfg["alpha2"].get<double>());
    TorusCoding t;
    t.alpha = {alpha, a2};
    t.cells = {{{0.0, 0.0}, {0.5, 1.0}}, {{0.5, 0.0}, {1.0, 1.0}}};
    t.labels = {0.0, 1.0};
    return CodingSystem::torus(t);
  }
  if (kind == "bernoulli") {
    BernoulliCoding b;
    b.probabilities = cfg["probabilities"].get<std::vector<double>>();
    b.labels = values;
    if (b.labels.empty())
      for (std::size_t i = 0; i < b.probabilities.size(); ++i) b.labels.push_back(static_cast<double>(i));
    return CodingSystem::bernoulli(b);
  }
  throw UsageError("config key 'system' must be sturmian, iet, skew, torus or bernoulli");
}

void run_coding(const json& cfg, std::uint64_t seed, Outputs& out, CheckLog& checks) {
  const auto sys = coding_from(cfg, seed);
  const int n_max = cfg["n_max"];
  const long long N = cfg["sample_length"];
  if (n_max < 1 || N < 1) throw UsageError("n_max and sample_length must be positive");
  std::vector<std::size_t> ns;
  for (int n = 1; n <= n_max; ++n) ns.push_back(static_cast<std::size_t>(n));
  Rng rng(seed);
  Phase x0;
  x0.x.assign(static_cast<std::size_t>(sys.dimension()), 0.0L);
  for (auto& x : x0.x) x = static_cast<long double>(rng.uniform());
  x0.seed = rng.next();
  const auto prof = complexity_bound_check(sys, ns, static_cast<std::size_t>(N), x0);
  double C = 0.0;
  for (std::size_t i = 0; i < prof.n.size() && prof.n[i] <= 10; ++i)
    C = std::max(C, static_cast<double>(prof.p[i]) / std::pow(static_cast<double>(prof.n[i]), prof.exponent));
  Table t({"n", "p", "bound"}, {{"subcommand", "coding"}, {"system", cfg["system"]}, {"sample_length", N},
                                {"exponent", prof.exponent}, {"C_fit_n_le_10", C}});
  bool bound_ok = true;
  for (std::size_t i = 0; i < prof.n.size(); ++i) {
    const double b = C * std::pow(static_cast<double>(prof.n[i]), prof.exponent);
    bound_ok = bound_ok && static_cast<double>(prof.p[i]) <= b;
    t.row({std::to_string(prof.n[i]), std::to_string(prof.p[i]), num(b)});
  }
  out.text("complexity.csv", t.str());
  json summary = {{"exponent", prof.exponent}, {"C", C}, {"monotone", prof.monotone},
                  {"window_sufficient", prof.window_sufficient}, {"p", prof.p}};
  const std::string kind = cfg["system"];
  if (kind == "sturmian") {
    bool ok = true;
    for (std::size_t i = 0; i < prof.n.size(); ++i) ok = ok && prof.p[i] == prof.n[i] + 1;
    checks.add("sturmian_complexity", ok, "p(n) = n + 1");
  } else if (kind == "iet") {
    summary["affine_exact"] = prof.affine_exact;
    checks.add("iet_complexity", prof.affine_exact, "p(n) = (r - 1) n + 1");
  } else if (kind != "bernoulli") {
    checks.add("polynomial_bound", bound_ok, "p(n) <= C n^e with C fitted over n <= 10");
  }
  checks.add("monotone", prof.monotone, "p nondecreasing in n");
  if (cfg["transitivity"].get<bool>()) {
    const int n = cfg["transitivity_n"];
    const auto tp = transitivity_profile(sys, static_cast<std::size_t>(n), cfg["transitivity_C"].get<double>(),
                                         prof.exponent, static_cast<std::size_t>(cfg["phases"].get<int>()), seed);
    Table tt({"phase", "visited_mass"}, {{"n", n}, {"window", tp.window}, {"method", tp.method}});
    for (std::size_t i = 0; i < tp.visited_mass.size(); ++i) tt.row({std::to_string(i), num(tp.visited_mass[i])});
    out.text("transitivity.csv", tt.str());
    summary["transitivity"] = {{"n", n}, {"window", tp.window}, {"delta_hat", tp.delta_hat},
                               {"min_mass", tp.min_mass}, {"method", tp.method}};
  }
  out.json_file("profile.json", summary);
}

void run_dos(const json& cfg, std::uint64_t seed, Outputs& out, CheckLog& checks) {
  const std::string source = cfg["source"];
  const long long N = cfg["N"];
  const int phases = cfg["phases"];
  const int points = cfg["grid_points"];
  if (N < 100) throw UsageError("config key 'N' must be >= 100");
  if (phases < 1 || points < 2) throw UsageError("phases and grid_points must be positive");
  WindowSampler sampler;
  std::optional<Word> word;
  double vmin = 0.0, vmax = 0.0;
  std::optional<CodingSystem> sys;
  if (source == "word") {
    word = parse_word(cfg["word"], "word");
    sampler = periodic_sampler(*word);
    vmin = word->min();
    vmax = word->max();
  } else if (source == "sturmian") {
    const auto v = cfg["values"].get<std::vector<double>>();
    if (v.size() != 2) throw UsageError("config key 'values' needs two entries");
    sys = CodingSystem::sturmian(static_cast<long double>(cfg["alpha"].get<double>()), v[0], v[1]);
    sampler = coding_sampler(*sys, seed);
    vmin = std::min(v[0], v[1]);
    vmax = std::max(v[0], v[1]);
  } else {
    throw UsageError("config key 'source' must be word or sturmian");
  }
  const auto grid = default_energy_grid(vmin, vmax, static_cast<std::size_t>(points));
  const auto ids = ids_curve(sampler, static_cast<std::size_t>(N), grid, static_cast<std::size_t>(phases));
  json meta = {{"subcommand", "dos"}, {"source", source}, {"N", N}, {"phases", phases}, {"grid_points", points},
               {"boundary", "dirichlet"}};
  Table t({"E", "k"}, meta);
  bool monotone = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.row({num(grid[i]), num(ids.k[i])});
    if (i && ids.k[i] < ids.k[i - 1]) monotone = false;
  }
  out.text("ids.csv", t.str());
  checks.add("ids_monotone", monotone && ids.k.front() >= 0.0 && ids.k.back() <= 1.0, "k nondecreasing in [0,1]");

  // Lyapunov scan over one long sample.
  const long long L = cfg["lyapunov_length"];
  std::vector<double> sample;
  if (word) {
    for (long long j = 0; j < L; ++j) sample.push_back((*word)[static_cast<std::size_t>(j) % word->size()]);
  } else {
    sample = sampler(0, static_cast<std::size_t>(L));
  }
  const auto lyap = lyapunov_scan(sample, grid);
  Table lt({"E", "L"}, {{"subcommand", "dos"}, {"lyapunov_length", L}});
  for (std::size_t i = 0; i < grid.size(); ++i) lt.row({num(grid[i]), num(lyap[i])});
  out.text("lyapunov.csv", lt.str());

  Table it({"mass", "length"}, {{"subcommand", "dos"}, {"grid_points", points}});
  for (double m : cfg["masses"].get<std::vector<double>>()) it.row({num(m), num(singularity_indicator(ids, m))});
  out.text("indicators.csv", it.str());

  json summary = {{"max_jump", max_jump(ids)}};
  if (word) {
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) err = std::max(err, std::abs(ids.k[i] - periodic_ids(*word, grid[i])));
    summary["periodic_ids_error"] = err;
    const double tol = 2.0 / static_cast<double>(N) + 1.0 / static_cast<double>(phases);
    checks.add("periodic_ids", err <= tol, num(err) + " <= " + num(tol));
    if (cfg["thouless"].get<bool>()) {
      const auto bs = band_spectrum(*word);
      std::vector<double> es;
      for (std::size_t i = 0; i < grid.size(); i += 40) {
        bool near = false;
        for (const auto& b : bs.set.intervals())
          near = near || std::abs(grid[i] - b.lo) < 1e-2 || std::abs(grid[i] - b.hi) < 1e-2;
        if (!near) es.push_back(grid[i]);
      }
      ThoulessOptions opt;
      opt.N = static_cast<std::size_t>(N);
      opt.phases = static_cast<std::size_t>(phases);
      opt.grid_points = static_cast<std::size_t>(points);
      opt.lyapunov_length = static_cast<long>(L);
      const auto rep = thouless_check(*word, es, opt);
      summary["thouless_error"] = rep.max_error;
      checks.add("thouless", rep.max_error < 1e-2, num(rep.max_error) + " < 0.01");
    }
  }
  out.json_file("summary.json", summary);
}

SamplingFunction function_from(const json& f) {
  const std::string kind = f["kind"];
  if (kind == "trig")
    return SamplingFunction::trig(f["a0"].get<double>(), f["cos"].get<std::vector<double>>(),
                                  f["sin"].get<std::vector<double>>());
  if (kind == "tabulated") return SamplingFunction::tabulated(f["values"].get<std::vector<double>>());
  if (kind == "step") {
    std::vector<Rational> br;
    for (const auto& b : f["breakpoints"]) {
      if (!b.is_string()) throw UsageError("config key '/f/breakpoints' holds strings like \"1/2\"");
      const std::string s = b;
      const auto slash = s.find('/');
      try {
        br.push_back(slash == std::string::npos ? Rational{std::stol(s), 1}
                                                : make_rational(std::stol(s.substr(0, slash)), std::stol(s.substr(slash + 1))));
      } catch (const std::logic_error&) {
        throw UsageError("config key '/f/breakpoints': cannot parse '" + s + "'");
      }
    }
    return SamplingFunction::step(br, f["values"].get<std::vector<double>>());
  }
  throw UsageError("config key '/f/kind' must be trig, tabulated or step");
}

void run_qp(const json& cfg, std::uint64_t seed, Outputs& out, CheckLog& checks) {
  const std::string mode = cfg["mode"];
  const auto f = function_from(cfg["f"]);
  const long p = cfg["p"], q = cfg["q"];
  if (q < 1) throw UsageError("config key 'q' must be >= 1");
  const Rational alpha = make_rational(p, q);
  RationalSpectrumOptions ropt;
  ropt.tol = cfg["tol"];
  if (mode == "spectrum") {
    const auto s = rational_spectrum(alpha, f, ropt);
    Table t({"set", "lo", "hi"}, {{"subcommand", "qp"}, {"alpha", std::to_string(alpha.p) + "/" + std::to_string(alpha.q)},
                                  {"f", f.describe()}, {"P", s.P}, {"tol", ropt.tol}, {"widening", s.widening}});
    for (const auto& iv : s.inner.intervals()) t.row({"inner", num(iv.lo), num(iv.hi)});
    for (const auto& iv : s.outer.intervals()) t.row({"outer", num(iv.lo), num(iv.hi)});
    out.text("spectrum.csv", t.str());
    out.json_file("spectrum.json", {{"inner_measure", s.inner.measure()}, {"outer_measure", s.outer.measure()},
                                    {"P", s.P}, {"samples", s.samples}, {"exact", s.exact},
                                    {"last_change", s.last_change}, {"widening", s.widening}});
    checks.add("inner_in_outer", s.inner.difference(s.outer).measure() == 0.0, "inner estimate inside outer");
  } else if (mode == "gap_closing") {
    const auto I = cfg["interval"].get<std::vector<double>>();
    if (I.size() != 2) throw UsageError("config key 'interval' needs [lo, hi]");
    GapClosingOptions gopt;
    gopt.epsilon = cfg["epsilon"];
    gopt.r = cfg["r"];
    gopt.verify_tol = cfg["verify_tol"];
    const auto gc = gap_closing_perturbation(alpha, f, {I[0], I[1]}, gopt);
    const auto dr = dos_perturbation_bound(alpha, f, gc.h, static_cast<std::size_t>(cfg["dos_test_functions"].get<int>()),
                                           static_cast<std::size_t>(cfg["dos_samples"].get<int>()), seed);
    json gaps = json::array(), bumps = json::array();
    for (const auto& g : gc.gaps)
      gaps.push_back({{"lo", g.gap.lo}, {"hi", g.gap.hi}, {"omega", g.omega}, {"abut_edge", g.abut_edge},
                      {"located", g.located}});
    for (const auto& b : gc.bumps) bumps.push_back({b.center - b.half_width, b.center + b.half_width});
    out.json_file("gap_closing.json", {{"epsilon", gc.epsilon}, {"r", gc.r}, {"half_width", gc.half_width},
                                       {"gaps", gaps}, {"supports", bumps}, {"support_total", gc.support_total},
                                       {"sup_difference", gc.sup_difference}, {"adjusted", gc.adjusted},
                                       {"verify_points", gc.verify_points}, {"uncovered", gc.uncovered},
                                       {"dos_discrepancy", dr.discrepancy}, {"dos_sigma", dr.sigma},
                                       {"dos_bound", dr.bound}});
    checks.add("sup_norm", gc.sup_difference <= gc.epsilon, num(gc.sup_difference) + " <= " + num(gc.epsilon));
    checks.add("support", gc.bumps.empty() || gc.support_total < gc.r, num(gc.support_total) + " < " + num(gc.r));
    checks.add("verification", gc.verified, std::to_string(gc.uncovered.size()) + " uncovered grid points");
    checks.add("dos_bound", dr.ok, "discrepancy <= 2r + 3 sigma");
  } else if (mode == "continuity") {
    std::vector<ApproximantStep> steps;
    for (const auto& a : golden_convergents(cfg["max_q"].get<long>()))
      if (a.q >= cfg["min_q"].get<long>()) steps.push_back({a, f});
    if (steps.size() < 2) throw UsageError("continuity probe needs at least two convergents in [min_q, max_q]");
    const auto hp = hausdorff_continuity_probe(steps, ropt);
    const double bound = f.sup_norm() + 2.0;
    const int pts = cfg["ids_points"];
    const auto energies = EnergyGrid::with_points(-bound - 0.2, bound + 0.2, static_cast<std::size_t>(pts)).points();
    const auto ip = ids_continuity_probe(steps, energies, static_cast<std::size_t>(cfg["ids_phases"].get<int>()));
    Table t({"p", "q", "hausdorff_next", "hausdorff_last", "ids_next", "ids_last"},
            {{"subcommand", "qp"}, {"f", f.describe()}, {"tol", ropt.tol}, {"ids_points", pts}});
    for (std::size_t i = 0; i < steps.size(); ++i)
      t.row({std::to_string(steps[i].alpha.p), std::to_string(steps[i].alpha.q),
             i < hp.consecutive.size() ? num(hp.consecutive[i]) : "", num(hp.to_last[i]),
             i < ip.consecutive.size() ? num(ip.consecutive[i]) : "", num(ip.to_last[i])});
    out.text("continuity.csv", t.str());
    checks.add("hausdorff_decreasing", hp.decreasing, "consecutive Hausdorff distances");
    checks.add("ids_decreasing", ip.decreasing, "consecutive IDS sup distances");
  } else {
    throw UsageError("config key 'mode' must be spectrum, gap_closing or continuity");
  }
}

void run_verify(const json& cfg, std::uint64_t seed, Outputs& out, CheckLog& checks) {
  json results = json::array();
  Table t({"id", "name", "pass"}, {{"subcommand", "verify"}, {"seed", seed}});
  for (const auto& id : cfg["checks"]) {
    if (!id.is_number_integer()) throw UsageError("config key 'checks' holds integers 1..11");
    const auto& c = battery::find_check(id.get<int>());
    const auto r = c.run(seed);
    results.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"summary", r.summary}, {"data", r.data}});
    t.row({std::to_string(r.id), r.name, r.pass ? "1" : "0"});
    checks.add(std::to_string(r.id) + " " + r.name, r.pass, r.summary);
  }
  out.json_file("results.json", results);
  out.text("results.csv", t.str());
}

// CSV (with '#' metadata) to whitespace-separated gnuplot columns.
std::string gnuplot_columns(const std::string& csv) {
  std::stringstream in(csv);
  std::string line, outs;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      outs += line + "\n";
      continue;
    }
    std::string row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row += (row.empty() ? "" : " ") + (cell.empty() ? std::string("?") : cell);
    outs += (header ? "# " : "") + row + "\n";
    header = false;
  }
  return outs;
}

bool is_resolution_kind(ErrorKind k) {
  switch (k) {
    case ErrorKind::refinement_needed:
    case ErrorKind::solver_resolution:
    case ErrorKind::budget_failure:
    case ErrorKind::stage_too_deep:
    case ErrorKind::resolution:
    case ErrorKind::support_budget:
      return true;
    default:
      return false;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral experiments for one-dimensional Schrodinger operators", "sslab"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path, out_dir = "sslab-out";
  int n_threads = 0;
  std::optional<std::uint64_t> seed_flag;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "JSON parameter file")->check(CLI::ExistingFile);
  app.add_option("--threads", n_threads, "worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed_flag, "64-bit RNG seed");
  app.add_option("--set", sets, "parameter override key=value (value parsed as JSON)");

  std::map<std::string, std::string> flag_values;
  auto flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(name, [&flag_values, key](const std::string& v) { flag_values[key] = v; }, help);
  };
  auto* bands = app.add_subcommand("bands", "band spectrum of a periodic word");
  flag(bands, "--word", "word", "comma-separated symbols");
  auto* construct = app.add_subcommand("construct", "staged construction with budget ledger and certificate");
  flag(construct, "--seed-words", "seed_words", "seed words, ';'-separated, symbols ','-separated");
  flag(construct, "--stages", "stages", "number of stages");
  flag(construct, "--power-cap", "power_cap", "largest power tried");
  auto* coding = app.add_subcommand("coding", "factor complexity and transitivity profiles");
  flag(coding, "--system", "system", "sturmian, iet, skew, torus or bernoulli");
  flag(coding, "--n-max", "n_max", "largest factor length");
  auto* dos = app.add_subcommand("dos", "IDS, Lyapunov and indicator scans");
  flag(dos, "--word", "word", "periodic word (source = word)");
  flag(dos, "--N", "N", "truncation size");
  auto* qp = app.add_subcommand("qp", "rational spectra, gap closing, continuity probes");
  flag(qp, "--mode", "mode", "spectrum, gap_closing or continuity");
  auto* verify = app.add_subcommand("verify", "run the check battery");
  flag(verify, "--checks", "checks", "JSON array of check ids");
  auto* report = app.add_subcommand("report", "CSV result file to gnuplot columns");
  flag(report, "--input", "input", "CSV file written by another subcommand");
  for (auto* s : {bands, construct, coding, dos, qp, verify, report}) s->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  json params, resolved;
  std::uint64_t seed = 2024;
  fs::path dir;
  try {
    params = defaults_for(sub);
    json file_cfg = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      try {
        file_cfg = json::parse(buf.str());
      } catch (const json::parse_error& e) {
        throw UsageError(config_path + ": " + e.what());
      }
      if (!file_cfg.is_object()) throw UsageError(config_path + ": top level must be an object");
      if (file_cfg.contains("seed")) {
        if (!file_cfg["seed"].is_number_unsigned() && !file_cfg["seed"].is_number_integer())
          throw UsageError("config key '/seed' must be an unsigned integer");
        seed = file_cfg["seed"].get<std::uint64_t>();
        file_cfg.erase("seed");
      }
      if (file_cfg.contains("out")) {
        if (!file_cfg["out"].is_string()) throw UsageError("config key '/out' must be a string");
        if (app.get_option("--out")->count() == 0) out_dir = file_cfg["out"].get<std::string>();
        file_cfg.erase("out");
      }
      if (file_cfg.contains("threads")) {
        if (!file_cfg["threads"].is_number_integer()) throw UsageError("config key '/threads' must be an integer");
        if (app.get_option("--threads")->count() == 0) n_threads = file_cfg["threads"].get<int>();
        file_cfg.erase("threads");
      }
      merge_checked(params, file_cfg, "");
    }
    json overrides = json::object();
    for (const auto& [k, v] : flag_values) {
      const json& slot = params[k];
      overrides[k] = slot.is_string() ? json(v) : parse_override_value(v);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
      const std::string key = s.substr(0, eq);
      if (!params.contains(key)) throw UsageError("unknown config key '/" + key + "'");
      overrides[key] = params[key].is_string() ? json(s.substr(eq + 1)) : parse_override_value(s.substr(eq + 1));
    }
    merge_checked(params, overrides, "");
    if (seed_flag) seed = *seed_flag;
    if (n_threads < 0) throw UsageError("--threads must be >= 0");
    if (sub == "report" && params["input"].get<std::string>().empty()) throw UsageError("report needs --input");
    dir = out_dir;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  if (n_threads > 0) set_threads(n_threads);
  resolved = {{"subcommand", sub}, {"seed", seed}, {"threads", n_threads}, {"out", out_dir}, {"params", params}};

  CheckLog checks;
  int code = kOk;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "usage error: cannot create output directory " << dir.string() << ": " << ec.message() << "\n";
    return kUsage;
  }
  Outputs outputs(dir);
  std::string error_text;
  try {
    if (sub == "bands") run_bands(params, seed, outputs, checks);
    else if (sub == "construct") run_construct(params, seed, outputs, checks);
    else if (sub == "coding") run_coding(params, seed, outputs, checks);
    else if (sub == "dos") run_dos(params, seed, outputs, checks);
    else if (sub == "qp") run_qp(params, seed, outputs, checks);
    else if (sub == "verify") run_verify(params, seed, outputs, checks);
    else {
      std::ifstream in(params["input"].get<std::string>());
      if (!in) throw UsageError("cannot read " + params["input"].get<std::string>());
      std::stringstream buf;
      buf << in.rdbuf();
      const std::string name = fs::path(params["input"].get<std::string>()).stem().string() + ".dat";
      outputs.text(name, gnuplot_columns(buf.str()));
    }
    code = checks.all ? kOk : kCheckFailed;
  } catch (const UsageError& e) {
    error_text = std::string("usage error: ") + e.what();
    code = kUsage;
  } catch (const Error& e) {
    error_text = std::string("error: ") + e.what();
    code = is_resolution_kind(e.kind()) ? kResolution : kUsage;
  } catch (const nlohmann::json::exception& e) {
    error_text = std::string("usage error: ") + e.what();
    code = kUsage;
  }
  if (!error_text.empty()) err << error_text << "\n";

  json manifest = {{"tool", "sslab"},
                   {"config", resolved},
                   {"outputs", outputs.files()},
                   {"checks", checks.entries},
                   {"status", code == kOk ? "pass" : code == kCheckFailed ? "check_failed" : "error"},
                   {"exit_code", code}};
  if (!error_text.empty()) manifest["error"] = error_text;
  outputs.json_file("manifest.json", manifest);
  for (const auto& c : checks.entries)
    out << (c["pass"].get<bool>() ? "pass " : "FAIL ") << c["name"].get<std::string>() << ": "
        << c["detail"].get<std::string>() << "\n";
  out << "wrote " << outputs.files().size() << " files to " << dir.string() << "\n";
  return code;
}

}  // namespace sslab::cli
