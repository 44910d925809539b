#include "sslab/construction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "omp_util.hpp"
#include "sslab/errors.hpp"
#include "sslab/kernels.hpp"
#include "sslab/periodic.hpp"

namespace sslab {

namespace {

using Json = nlohmann::json;

std::vector<double> alphabet_of(const std::vector<Word>& words) {
  std::set<double> symbols;
  for (const auto& w : words) symbols.insert(w.symbols().begin(), w.symbols().end());
  return {symbols.begin(), symbols.end()};
}

BandSet union_of(const std::vector<BandSet>& sets) {
  std::vector<Interval> all;
  for (const auto& s : sets) all.insert(all.end(), s.intervals().begin(), s.intervals().end());
  return BandSet::normalize(std::move(all));
}

Word concat_all(const std::vector<Word>& words) {
  std::vector<double> out;
  for (const auto& w : words) out.insert(out.end(), w.symbols().begin(), w.symbols().end());
  return Word(std::move(out));
}

// Symbols as one byte per letter so factors can be hashed as string_views.
std::string encode(const Word& w, const std::vector<double>& alphabet) {
  std::string out(w.size(), '\0');
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto it = std::lower_bound(alphabet.begin(), alphabet.end(), w[i]);
    if (it == alphabet.end() || *it != w[i])
      fail(ErrorKind::domain, "symbol outside the stage alphabet");
    out[i] = static_cast<char>(it - alphabet.begin());
  }
  return out;
}

struct PowerSearch {
  PowerChoice choice;
  std::vector<BandSet> spectra;  // Sigma(v w^k), k = 1..m
};

PowerSearch search_power(const Word& v, const Word& w, double budget, int m_cap) {
  if (!(budget > 0.0)) fail(ErrorKind::domain, "residual budget must be positive");
  if (m_cap < 2) fail(ErrorKind::domain, "m_cap must be >= 2");
  const BandSet target = band_spectrum(w).set;
  PowerSearch out;
  BandSet covered;
  Word vwk = v;
  double best = target.measure();
  int best_m = 0;
  for (int m = 1; m <= m_cap; ++m) {
    vwk = vwk.concat(w);
    if (vwk.size() > kMaxBandWordLength)
      fail(ErrorKind::stage_too_deep, "word v w^" + std::to_string(m) + " exceeds the band cap");
    out.spectra.push_back(band_spectrum(vwk).set);
    covered = covered.unite(out.spectra.back());
    const double residual = target.difference(covered).measure();
    out.choice.history.push_back(residual);
    if (residual < best) {
      best = residual;
      best_m = m;
    }
    if (m >= 2 && residual < budget) {
      out.choice.m = m;
      out.choice.residual = residual;
      return out;
    }
  }
  throw BudgetError("residual " + std::to_string(best) + " not below budget " +
                        std::to_string(budget) + " at m_cap " + std::to_string(m_cap),
                    best, best_m);
}

}  // namespace

Stage initial_stage(const std::vector<Word>& seed_words) {
  if (seed_words.size() < 2)
    fail(ErrorKind::construction_precondition, "need at least two seed words");
  for (const auto& w : seed_words)
    if (w.empty()) fail(ErrorKind::construction_precondition, "seed words must be nonempty");
  Stage s;
  s.level = 1;
  s.alphabet = alphabet_of(seed_words);
  if (s.alphabet.size() < 2)
    fail(ErrorKind::construction_precondition, "alphabet must have at least two symbols");
  // Two words generate non-periodic concatenations iff they do not commute.
  bool free_pair = false;
  for (std::size_t i = 0; i < seed_words.size() && !free_pair; ++i)
    for (std::size_t j = i + 1; j < seed_words.size() && !free_pair; ++j)
      free_pair = seed_words[i].concat(seed_words[j]) != seed_words[j].concat(seed_words[i]);
  if (!free_pair)
    fail(ErrorKind::construction_precondition,
         "seed words pairwise commute; every concatenation would be periodic");
  s.words = seed_words;
  s.W = concat_all(s.words);
  for (const auto& sp : band_spectra(s.words)) s.word_spectra.push_back(sp.set);
  s.spectrum = union_of(s.word_spectra);
  s.spectrum_measure = s.spectrum.measure();
  s.base_measure = s.spectrum_measure;
  return s;
}

PowerChoice choose_power(const Word& v, const Word& w, double budget, int m_cap) {
  return search_power(v, w, budget, m_cap).choice;
}

double geometric_budget(const Stage& s) {
  return s.base_measure * std::ldexp(1.0, -(1 + s.level));
}

Stage next_stage(const Stage& s, double budget, int m_cap) {
  if (!(budget > 0.0)) fail(ErrorKind::domain, "stage budget must be positive");
  if (budget > geometric_budget(s) * (1.0 + 1e-12))
    fail(ErrorKind::domain, "stage budget exceeds measure(Sigma_1) 2^-(1+level)");
  const std::size_t k = s.words.size();
  const double share = budget / static_cast<double>(k);

  std::vector<PowerSearch> found(k);
  detail::ExceptionSlot slot;
  const auto kk = static_cast<long>(k);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < kk; ++i)
    slot.run([&] { found[i] = search_power(s.W, s.words[i], share, m_cap); });
  slot.rethrow();

  Stage next;
  next.level = s.level + 1;
  next.alphabet = s.alphabet;
  next.base_measure = s.base_measure;
  next.ledger.budget = budget;
  for (std::size_t i = 0; i < k; ++i) {
    const int m = found[i].choice.m;
    next.powers.push_back(m);
    next.ledger.residuals.push_back(found[i].choice.residual);
    Word word = s.W;
    for (int p = 1; p <= m; ++p) {
      word = word.concat(s.words[i]);
      next.words.push_back(word);
      next.parents.emplace_back(i, p);
      next.word_spectra.push_back(found[i].spectra[static_cast<std::size_t>(p - 1)]);
    }
  }
  next.W = concat_all(next.words);
  next.spectrum = union_of(next.word_spectra);
  next.spectrum_measure = next.spectrum.measure();
  next.ledger.measured_loss = s.spectrum.difference(next.spectrum).measure();
  if (!next.ledger.satisfied())
    throw BudgetError("measured loss " + std::to_string(next.ledger.measured_loss) +
                          " is not below the stage budget " + std::to_string(budget),
                      next.ledger.measured_loss, 0);
  return next;
}

std::vector<Stage> build_stages(const std::vector<Word>& seed_words, int levels, int m_cap) {
  if (levels < 1) fail(ErrorKind::domain, "need at least one stage");
  std::vector<Stage> stages{initial_stage(seed_words)};
  while (static_cast<int>(stages.size()) < levels) {
    const Stage& last = stages.back();
    stages.push_back(next_stage(last, geometric_budget(last), m_cap));
  }
  return stages;
}

BandSet certified_set(const std::vector<Stage>& stages) {
  if (stages.empty()) fail(ErrorKind::domain, "no stages");
  for (std::size_t i = 1; i < stages.size(); ++i)
    if (stages[i].level != stages[i - 1].level + 1)
      fail(ErrorKind::domain, "stages are not consecutive");
  BandSet cert = stages.front().spectrum;
  for (std::size_t i = 0; i + 1 < stages.size(); ++i)
    cert = cert.difference(stages[i].spectrum.difference(stages[i + 1].spectrum));
  return cert;
}

double lower_bound_certificate(const std::vector<Stage>& stages) {
  return certified_set(stages).measure();
}

bool is_concatenation(const Word& w, const std::vector<Word>& pieces) {
  const std::size_t n = w.size();
  std::vector<char> reach(n + 1, 0);
  reach[0] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!reach[i]) continue;
    for (const auto& p : pieces) {
      if (p.empty() || i + p.size() > n) continue;
      if (std::equal(p.symbols().begin(), p.symbols().end(), w.symbols().begin() + i))
        reach[i + p.size()] = 1;
    }
  }
  return reach[n] != 0;
}

namespace {

// Shape of `next` relative to `cur`: words W_cur w_k^s in (k, s) order,
// powers >= 2, and W the concatenation.
void check_shape(const Stage& next, const Stage& cur, std::vector<std::string>& errors) {
  if (next.level != cur.level + 1) errors.push_back("levels are not consecutive");
  if (next.powers.size() != cur.words.size()) {
    errors.push_back("powers do not match the previous word count");
    return;
  }
  std::size_t idx = 0;
  for (std::size_t k = 0; k < cur.words.size(); ++k) {
    const int m = next.powers[k];
    if (m < 2) errors.push_back("power m_" + std::to_string(k) + " < 2");
    Word expect = cur.W;
    for (int s = 1; s <= m; ++s, ++idx) {
      expect = expect.concat(cur.words[k]);
      if (idx >= next.words.size()) {
        errors.push_back("missing word for (k, s) = (" + std::to_string(k) + ", " +
                         std::to_string(s) + ")");
        return;
      }
      if (next.words[idx] != expect)
        errors.push_back("word " + std::to_string(idx) + " is not W w_" + std::to_string(k) +
                         "^" + std::to_string(s));
    }
  }
  if (idx != next.words.size()) errors.push_back("extra words beyond the (k, s) list");
  if (next.W != concat_all(next.words)) errors.push_back("W is not the concatenation of the words");
}

}  // namespace

MinimalityReport minimality_window_check(const Stage& next, const Stage& cur, const Stage& prev) {
  MinimalityReport r;
  check_shape(next, cur, r.structure_errors);
  check_shape(cur, prev, r.structure_errors);
  r.structure_ok = r.structure_errors.empty();

  for (std::size_t k = 0; k < cur.words.size() && k < next.powers.size(); ++k)
    r.gap_bound = std::max(r.gap_bound, cur.W.size() + cur.words[k].size() *
                                                           static_cast<std::size_t>(next.powers[k]));

  const auto& alphabet = next.alphabet;
  const std::string big = encode(next.W, alphabet);
  const std::string wc = encode(cur.W, alphabet);
  std::vector<std::string> words;
  for (const auto& w : next.words) words.push_back(encode(w, alphabet));

  r.factor_length = prev.W.size();
  const std::size_t len = r.factor_length;
  std::unordered_set<std::string_view> present;
  for (std::size_t i = 0; i + len <= big.size(); ++i)
    present.insert(std::string_view(big).substr(i, len));

  std::set<std::string> missing;
  for (const auto& a : words) {
    for (const auto& b : words) {
      const std::string ab = a + b;
      // Occurrences of W_cur, including the one that starts b.
      std::size_t last = std::string::npos;
      for (std::size_t pos = ab.find(wc); pos != std::string::npos; pos = ab.find(wc, pos + 1)) {
        if (last != std::string::npos) r.max_gap = std::max(r.max_gap, pos - last);
        last = pos;
      }
      if (last == std::string::npos) r.max_gap = std::max(r.max_gap, ab.size());
      for (std::size_t i = 0; i + len <= ab.size(); ++i) {
        ++r.factors_checked;
        const std::string_view f = std::string_view(ab).substr(i, len);
        if (!present.count(f)) missing.insert(std::string(f));
      }
    }
  }
  for (const auto& f : missing) {
    std::vector<double> sym;
    for (char c : f) sym.push_back(alphabet[static_cast<unsigned char>(c)]);
    r.missing_factors.emplace_back(std::move(sym));
  }
  return r;
}

AperiodicityWitness aperiodicity_check(const Stage& s, std::size_t l0) {
  AperiodicityWitness out;
  std::vector<std::string> samples;
  std::vector<std::string> words;
  for (const auto& w : s.words) words.push_back(encode(w, s.alphabet));
  for (const auto& a : words) {
    samples.push_back(a);
    for (const auto& b : words) samples.push_back(a + b);
  }
  std::size_t longest = 0;
  for (const auto& x : samples) longest = std::max(longest, x.size());
  for (std::size_t len = std::max<std::size_t>(l0, 1); len < longest; ++len) {
    out.max_length_searched = len;
    std::map<std::string_view, std::set<char>> ext;
    for (const auto& x : samples) {
      for (std::size_t i = 0; i + len < x.size(); ++i) {
        auto& e = ext[std::string_view(x).substr(i, len)];
        e.insert(x[i + len]);
        if (e.size() >= 2) {
          out.found = true;
          const std::string_view f = std::string_view(x).substr(i, len);
          std::vector<double> sym;
          for (char c : f) sym.push_back(s.alphabet[static_cast<unsigned char>(c)]);
          out.factor = Word(std::move(sym));
          out.ext_a = s.alphabet[static_cast<unsigned char>(*e.begin())];
          out.ext_b = s.alphabet[static_cast<unsigned char>(*e.rbegin())];
          return out;
        }
      }
    }
  }
  return out;
}

// ---- persistence ----

namespace {

std::vector<int> indices_of(const Word& w, const std::vector<double>& alphabet) {
  std::vector<int> out;
  for (char c : encode(w, alphabet)) out.push_back(static_cast<unsigned char>(c));
  return out;
}

Json bands_json(const BandSet& b) {
  Json out = Json::array();
  for (const auto& iv : b.intervals()) out.push_back({iv.lo, iv.hi});
  return out;
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorKind::parse, "stage file " + where + ": " + what);
}

const Json& member(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) bad(path.empty() ? "/" : path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) bad(path + "/" + key, "missing key");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  return j.get<long>();
}

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array");
  return j;
}

Word word_from(const Json& j, const std::vector<double>& alphabet, const std::string& path) {
  std::vector<double> sym;
  std::size_t i = 0;
  for (const auto& x : array(j, path)) {
    const long idx = integer(x, path + "/" + std::to_string(i));
    if (idx < 0 || static_cast<std::size_t>(idx) >= alphabet.size())
      bad(path + "/" + std::to_string(i), "alphabet index out of range");
    sym.push_back(alphabet[static_cast<std::size_t>(idx)]);
    ++i;
  }
  if (sym.empty()) bad(path, "empty word");
  return Word(std::move(sym));
}

BandSet bands_from(const Json& j, const std::string& path) {
  std::vector<Interval> out;
  std::size_t i = 0;
  for (const auto& iv : array(j, path)) {
    const std::string p = path + "/" + std::to_string(i++);
    if (!iv.is_array() || iv.size() != 2) bad(p, "expected [lo, hi]");
    out.push_back({number(iv[0], p + "/0"), number(iv[1], p + "/1")});
    if (!(out.back().lo <= out.back().hi)) bad(p, "lo > hi");
  }
  return BandSet::normalize(std::move(out));
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Internal consistency of a level >= 2 stage without its predecessor: the
// words for parent k are P u_k^s with a common prefix P = u_1 ... u_K.
void validate_shape_alone(const Stage& s) {
  if (s.parents.size() != s.words.size()) bad("/parents", "one parent entry per word required");
  std::vector<Word> units;
  Word prefix;
  std::size_t idx = 0;
  for (std::size_t k = 0; k < s.powers.size(); ++k) {
    const int m = s.powers[k];
    if (m < 2) bad("/powers/" + std::to_string(k), "power must be >= 2");
    if (idx + static_cast<std::size_t>(m) > s.words.size())
      bad("/words", "fewer words than the powers require");
    const Word& w1 = s.words[idx];
    const Word& w2 = s.words[idx + 1];
    if (w2.size() <= w1.size()) bad("/words/" + std::to_string(idx + 1), "word does not grow with s");
    const std::size_t ulen = w2.size() - w1.size();
    if (ulen > w1.size()) bad("/words/" + std::to_string(idx), "word shorter than its unit");
    const Word u(std::vector<double>(w1.symbols().end() - static_cast<std::ptrdiff_t>(ulen),
                                     w1.symbols().end()));
    const Word p(std::vector<double>(w1.symbols().begin(),
                                     w1.symbols().end() - static_cast<std::ptrdiff_t>(ulen)));
    if (k == 0) prefix = p;
    else if (p != prefix) bad("/words/" + std::to_string(idx), "prefix differs from W_prev");
    units.push_back(u);
    for (int sp = 1; sp <= m; ++sp, ++idx) {
      const std::string at = "/words/" + std::to_string(idx);
      if (s.parents[idx] != std::make_pair(k, sp)) bad("/parents/" + std::to_string(idx), "parent out of (k, s) order");
      if (s.words[idx] != p.concat(u.power(static_cast<std::size_t>(sp))))
        bad(at, "word is not W_prev w_k^s");
    }
  }
  if (idx != s.words.size()) bad("/words", "more words than the powers account for");
  if (concat_all(units) != prefix) bad("/words", "common prefix is not the concatenation of the units");
}

}  // namespace

std::string stage_to_json(const Stage& s) {
  Json j;
  j["format"] = "sslab.stage";
  j["version"] = 1;
  j["level"] = s.level;
  j["alphabet"] = s.alphabet;
  Json words = Json::array();
  for (const auto& w : s.words) words.push_back(indices_of(w, s.alphabet));
  j["words"] = words;
  Json parents = Json::array();
  for (const auto& [k, p] : s.parents) parents.push_back({k, p});
  j["parents"] = parents;
  j["powers"] = s.powers;
  j["W"] = indices_of(s.W, s.alphabet);
  j["spectrum"] = bands_json(s.spectrum);
  j["spectrum_measure"] = s.spectrum_measure;
  j["base_measure"] = s.base_measure;
  j["ledger"] = {{"budget", s.ledger.budget},
                 {"residuals", s.ledger.residuals},
                 {"measured_loss", s.ledger.measured_loss}};
  return j.dump(1);
}

Stage stage_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::parse, "stage file malformed at " + line_col(text, e.byte) + ": " + e.what());
  }
  if (!member(j, "format", "").is_string() || j["format"] != "sslab.stage")
    bad("/format", "expected \"sslab.stage\"");
  if (integer(member(j, "version", ""), "/version") != 1) bad("/version", "unsupported version");
  const std::set<std::string> known{"format", "version", "level", "alphabet", "words", "parents",
                                    "powers", "W", "spectrum", "spectrum_measure",
                                    "base_measure", "ledger"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) bad("/" + key, "unknown key");

  Stage s;
  s.level = static_cast<int>(integer(member(j, "level", ""), "/level"));
  if (s.level < 1) bad("/level", "level must be >= 1");
  std::size_t i = 0;
  for (const auto& x : array(member(j, "alphabet", ""), "/alphabet"))
    s.alphabet.push_back(number(x, "/alphabet/" + std::to_string(i++)));
  if (s.alphabet.size() < 2) bad("/alphabet", "need at least two symbols");
  if (!std::is_sorted(s.alphabet.begin(), s.alphabet.end()) ||
      std::adjacent_find(s.alphabet.begin(), s.alphabet.end()) != s.alphabet.end())
    bad("/alphabet", "symbols must be sorted and distinct");
  i = 0;
  for (const auto& w : array(member(j, "words", ""), "/words")) {
    s.words.push_back(word_from(w, s.alphabet, "/words/" + std::to_string(i)));
    ++i;
  }
  if (s.words.empty()) bad("/words", "no words");
  i = 0;
  for (const auto& p : array(member(j, "parents", ""), "/parents")) {
    const std::string at = "/parents/" + std::to_string(i++);
    if (!p.is_array() || p.size() != 2) bad(at, "expected [k, s]");
    const long k = integer(p[0], at + "/0");
    const long sp = integer(p[1], at + "/1");
    if (k < 0 || sp < 1) bad(at, "invalid parent");
    s.parents.emplace_back(static_cast<std::size_t>(k), static_cast<int>(sp));
  }
  i = 0;
  for (const auto& p : array(member(j, "powers", ""), "/powers"))
    s.powers.push_back(static_cast<int>(integer(p, "/powers/" + std::to_string(i++))));
  s.W = word_from(member(j, "W", ""), s.alphabet, "/W");
  if (s.W != concat_all(s.words)) bad("/W", "W is not the concatenation of the words");
  if (s.level == 1) {
    if (!s.parents.empty() || !s.powers.empty()) bad("/powers", "level 1 has no parents or powers");
  } else {
    validate_shape_alone(s);
  }
  const BandSet stored = bands_from(member(j, "spectrum", ""), "/spectrum");
  s.spectrum_measure = number(member(j, "spectrum_measure", ""), "/spectrum_measure");
  s.base_measure = number(member(j, "base_measure", ""), "/base_measure");
  const Json& ledger = member(j, "ledger", "");
  s.ledger.budget = number(member(ledger, "budget", "/ledger"), "/ledger/budget");
  i = 0;
  for (const auto& r : array(member(ledger, "residuals", "/ledger"), "/ledger/residuals"))
    s.ledger.residuals.push_back(number(r, "/ledger/residuals/" + std::to_string(i++)));
  s.ledger.measured_loss =
      number(member(ledger, "measured_loss", "/ledger"), "/ledger/measured_loss");

  // Spectra are recomputed, then compared with what the file claims.
  for (const auto& sp : band_spectra(s.words)) s.word_spectra.push_back(sp.set);
  s.spectrum = union_of(s.word_spectra);
  const double tol = 1e-8;
  if (stored.empty() || hausdorff_distance(stored, s.spectrum) > tol ||
      std::abs(stored.measure() - s.spectrum.measure()) > tol * static_cast<double>(stored.size() + 1))
    bad("/spectrum", "stored spectrum disagrees with the recomputed band spectra");
  if (std::abs(s.spectrum_measure - s.spectrum.measure()) > tol * static_cast<double>(stored.size() + 1))
    bad("/spectrum_measure", "does not match the spectrum");
  // Keep the stored values so persist/load round-trips exactly.
  s.spectrum = stored;
  return s;
}

void persist_stage(const Stage& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::domain, "cannot write " + path);
  out << stage_to_json(s) << '\n';
}

Stage load_stage(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return stage_from_json(buf.str());
}

}  // namespace sslab
