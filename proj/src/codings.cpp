#include "sslab/codings.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "omp_util.hpp"
#include "sslab/errors.hpp"
#include "sslab/kernels.hpp"
#include "sslab/rng.hpp"

namespace sslab {

namespace {

constexpr long double kTwoPi = 2.0L * std::numbers::pi_v<long double>;
constexpr long double kBoundaryTol = 1e-13L;

long double frac(long double x) {
  long double f = x - std::floor(x);
  if (f >= 1.0L) f = 0.0L;
  return f;
}

// Distance from x in [0,1) to the nearest integer translate of b.
long double circle_distance(long double x, long double b) {
  const long double d = frac(x - b);
  return std::min(d, 1.0L - d);
}

bool in_rect(const Rect& r, const std::vector<long double>& x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= r.lo[i] && x[i] < r.hi[i])) return false;
  return true;
}

void check_cells(const std::vector<Rect>& cells, const std::vector<double>& labels, int dim) {
  if (cells.empty()) fail(ErrorKind::domain, "partition has no cells");
  if (labels.size() != cells.size()) fail(ErrorKind::domain, "one label per cell required");
  long double total = 0.0L;
  for (const auto& c : cells) {
    if (c.lo.size() != static_cast<std::size_t>(dim) || c.hi.size() != static_cast<std::size_t>(dim))
      fail(ErrorKind::domain, "cell dimension mismatch");
    long double vol = 1.0L;
    for (int i = 0; i < dim; ++i) {
      if (!(c.lo[i] >= 0.0 && c.lo[i] < c.hi[i] && c.hi[i] <= 1.0))
        fail(ErrorKind::domain, "cell sides must satisfy 0 <= lo < hi <= 1");
      vol *= c.hi[i] - c.lo[i];
    }
    total += vol;
  }
  for (std::size_t a = 0; a < cells.size(); ++a)
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      bool overlap = true;
      for (int i = 0; i < dim; ++i)
        overlap = overlap && cells[a].lo[i] < cells[b].hi[i] && cells[b].lo[i] < cells[a].hi[i];
      if (overlap) fail(ErrorKind::domain, "partition cells overlap");
    }
  if (std::abs(total - 1.0L) > 1e-12L) fail(ErrorKind::domain, "partition cells must cover the torus");
}

Rect box(double x0, double x1) { return Rect{{x0}, {x1}}; }
Rect box(double x0, double x1, double y0, double y1) { return Rect{{x0, y0}, {x1, y1}}; }

}  // namespace

void CodingSystem::finish(const std::vector<double>& labels) {
  std::set<double> distinct(labels.begin(), labels.end());
  alphabet_.assign(distinct.begin(), distinct.end());
  if (alphabet_.size() < 2) fail(ErrorKind::domain, "labels must not all be equal");
  if (alphabet_.size() > 255) fail(ErrorKind::domain, "at most 255 distinct labels");
  cell_symbol_.clear();
  for (double l : labels)
    cell_symbol_.push_back(static_cast<int>(
        std::lower_bound(alphabet_.begin(), alphabet_.end(), l) - alphabet_.begin()));
}

CodingSystem CodingSystem::torus(TorusCoding t) {
  if (t.alpha.empty()) fail(ErrorKind::domain, "torus translation needs a dimension >= 1");
  for (auto& a : t.alpha) a = frac(a);
  check_cells(t.cells, t.labels, static_cast<int>(t.alpha.size()));
  CodingSystem s;
  s.kind_ = CodingKind::torus;
  s.torus_ = std::move(t);
  s.finish(s.torus_.labels);
  return s;
}

CodingSystem CodingSystem::skew(SkewCoding k) {
  k.alpha = frac(k.alpha);
  check_cells(k.cells, k.labels, 2);
  CodingSystem s;
  s.kind_ = CodingKind::skew;
  s.skew_ = std::move(k);
  s.finish(s.skew_.labels);
  return s;
}

CodingSystem CodingSystem::iet(IetCoding i) {
  const std::size_t r = i.perm.size();
  if (r < 2) fail(ErrorKind::domain, "IET needs r >= 2");
  if (i.lengths.size() != r || i.labels.size() != r)
    fail(ErrorKind::domain, "IET lengths and labels must match the permutation size");
  std::vector<int> sorted(i.perm);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t j = 0; j < r; ++j)
    if (sorted[j] != static_cast<int>(j)) fail(ErrorKind::domain, "perm is not a permutation of 0..r-1");
  for (std::size_t k = 1; k < r; ++k) {
    bool closed = true;
    for (std::size_t j = 0; j < k; ++j) closed = closed && i.perm[j] < static_cast<int>(k);
    if (closed) fail(ErrorKind::domain, "IET permutation is reducible");
  }
  long double total = 0.0L;
  for (auto l : i.lengths) {
    if (!(l > 0.0L)) fail(ErrorKind::domain, "IET lengths must be positive");
    total += l;
  }
  if (std::abs(total - 1.0L) > 1e-12L) fail(ErrorKind::domain, "IET lengths must sum to 1");
  CodingSystem s;
  s.kind_ = CodingKind::iet;
  s.iet_ = std::move(i);
  s.iet_left_.assign(r, 0.0L);
  s.iet_image_left_.assign(r, 0.0L);
  for (std::size_t j = 1; j < r; ++j) s.iet_left_[j] = s.iet_left_[j - 1] + s.iet_.lengths[j - 1];
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t q = 0; q < r; ++q)
      if (s.iet_.perm[q] < s.iet_.perm[j]) s.iet_image_left_[j] += s.iet_.lengths[q];
  s.finish(s.iet_.labels);
  return s;
}

CodingSystem CodingSystem::bernoulli(BernoulliCoding b) {
  if (b.labels.size() != b.probabilities.size() || b.labels.size() < 2)
    fail(ErrorKind::domain, "Bernoulli coding needs matching labels and probabilities");
  double total = 0.0;
  for (double p : b.probabilities) {
    if (!(p > 0.0)) fail(ErrorKind::domain, "probabilities must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::domain, "probabilities must sum to 1");
  CodingSystem s;
  s.kind_ = CodingKind::bernoulli;
  s.bernoulli_ = std::move(b);
  s.finish(s.bernoulli_.labels);
  if (s.alphabet_.size() != s.bernoulli_.labels.size())
    fail(ErrorKind::domain, "Bernoulli labels must be distinct");
  return s;
}

CodingSystem CodingSystem::sturmian(long double alpha, double low, double high) {
  const double cut = static_cast<double>(1.0L - frac(alpha));
  return torus({{alpha}, {box(0.0, cut), box(cut, 1.0)}, {low, high}});
}

CodingSystem CodingSystem::reversal_iet(std::vector<long double> lengths) {
  const int r = static_cast<int>(lengths.size());
  IetCoding i;
  for (int j = 0; j < r; ++j) {
    i.perm.push_back(r - 1 - j);
    i.labels.push_back(j);
  }
  i.lengths = std::move(lengths);
  return iet(std::move(i));
}

CodingSystem CodingSystem::skew_grid(long double alpha, int g) {
  if (g < 1) fail(ErrorKind::domain, "grid size must be >= 1");
  SkewCoding k;
  k.alpha = alpha;
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b) {
      k.cells.push_back(box(static_cast<double>(a) / g, static_cast<double>(a + 1) / g,
                            static_cast<double>(b) / g, static_cast<double>(b + 1) / g));
      k.labels.push_back((a + b) % 2);
    }
  return skew(std::move(k));
}

const TorusCoding& CodingSystem::as_torus() const {
  if (kind_ != CodingKind::torus) fail(ErrorKind::domain, "not a torus coding");
  return torus_;
}
const SkewCoding& CodingSystem::as_skew() const {
  if (kind_ != CodingKind::skew) fail(ErrorKind::domain, "not a skew coding");
  return skew_;
}
const IetCoding& CodingSystem::as_iet() const {
  if (kind_ != CodingKind::iet) fail(ErrorKind::domain, "not an IET coding");
  return iet_;
}
const BernoulliCoding& CodingSystem::as_bernoulli() const {
  if (kind_ != CodingKind::bernoulli) fail(ErrorKind::domain, "not a Bernoulli coding");
  return bernoulli_;
}

int CodingSystem::dimension() const {
  switch (kind_) {
    case CodingKind::torus: return static_cast<int>(torus_.alpha.size());
    case CodingKind::skew: return 2;
    case CodingKind::iet: return 1;
    case CodingKind::bernoulli: return 0;
  }
  return 0;
}

Phase CodingSystem::step(const Phase& p) const {
  Phase q = p;
  switch (kind_) {
    case CodingKind::torus:
      for (std::size_t i = 0; i < q.x.size(); ++i) q.x[i] = frac(q.x[i] + torus_.alpha[i]);
      break;
    case CodingKind::skew:
      q.x[1] = frac(p.x[1] + p.x[0]);
      q.x[0] = frac(p.x[0] + skew_.alpha);
      break;
    case CodingKind::iet: {
      const long double x = p.x[0];
      std::size_t j = iet_left_.size() - 1;
      while (j > 0 && x < iet_left_[j]) --j;
      q.x[0] = x - iet_left_[j] + iet_image_left_[j];
      if (q.x[0] >= 1.0L) q.x[0] -= 1.0L;
      break;
    }
    case CodingKind::bernoulli: q.seed = p.seed + 1; break;
  }
  return q;
}

Phase CodingSystem::step_back(const Phase& p) const {
  Phase q = p;
  switch (kind_) {
    case CodingKind::torus:
      for (std::size_t i = 0; i < q.x.size(); ++i) q.x[i] = frac(q.x[i] - torus_.alpha[i]);
      break;
    case CodingKind::skew:
      q.x[0] = frac(p.x[0] - skew_.alpha);
      q.x[1] = frac(p.x[1] - q.x[0]);
      break;
    case CodingKind::iet: {
      const long double y = p.x[0];
      // The image interval containing y is the one with the largest start <= y.
      std::size_t best = iet_image_left_.size();
      for (std::size_t j = 0; j < iet_image_left_.size(); ++j)
        if (iet_image_left_[j] <= y && (best == iet_image_left_.size() || iet_image_left_[j] > iet_image_left_[best]))
          best = j;
      q.x[0] = y - iet_image_left_[best] + iet_left_[best];
      if (q.x[0] < 0.0L) q.x[0] = 0.0L;
      break;
    }
    case CodingKind::bernoulli: q.seed = p.seed - 1; break;
  }
  return q;
}

int CodingSystem::symbol_at(const Phase& p) const {
  switch (kind_) {
    case CodingKind::torus:
      for (std::size_t c = 0; c < torus_.cells.size(); ++c)
        if (in_rect(torus_.cells[c], p.x)) return cell_symbol_[c];
      break;
    case CodingKind::skew:
      for (std::size_t c = 0; c < skew_.cells.size(); ++c)
        if (in_rect(skew_.cells[c], p.x)) return cell_symbol_[c];
      break;
    case CodingKind::iet: {
      std::size_t j = iet_left_.size() - 1;
      while (j > 0 && p.x[0] < iet_left_[j]) --j;
      return cell_symbol_[j];
    }
    case CodingKind::bernoulli: {
      // One fixed i.i.d. sequence indexed by 64-bit time; a phase is a
      // position in it, so shifting commutes with coding.
      const double u = static_cast<double>(mix64(p.seed) >> 11) * 0x1.0p-53;
      double acc = 0.0;
      for (std::size_t j = 0; j < bernoulli_.probabilities.size(); ++j) {
        acc += bernoulli_.probabilities[j];
        if (u < acc) return cell_symbol_[j];
      }
      return cell_symbol_.back();
    }
  }
  fail(ErrorKind::domain, "phase point outside every partition cell");
}

namespace {

bool near_boundary(const CodingSystem& sys, const Phase& p) {
  auto near_cells = [&](const std::vector<Rect>& cells) {
    for (const auto& c : cells)
      for (std::size_t i = 0; i < p.x.size(); ++i)
        if (circle_distance(p.x[i], c.lo[i]) < kBoundaryTol ||
            circle_distance(p.x[i], c.hi[i]) < kBoundaryTol)
          return true;
    return false;
  };
  switch (sys.kind()) {
    case CodingKind::torus: return near_cells(sys.as_torus().cells);
    case CodingKind::skew: return near_cells(sys.as_skew().cells);
    case CodingKind::iet: {
      long double left = 0.0L;
      for (auto l : sys.as_iet().lengths) {
        if (std::abs(p.x[0] - left) < kBoundaryTol) return true;
        left += l;
      }
      return false;
    }
    case CodingKind::bernoulli: return false;
  }
  return false;
}

void check_phase(const CodingSystem& sys, const Phase& p) {
  if (static_cast<int>(p.x.size()) != sys.dimension())
    fail(ErrorKind::domain, "phase point has the wrong dimension");
  for (auto v : p.x)
    if (!(v >= 0.0L && v < 1.0L)) fail(ErrorKind::domain, "phase coordinates must lie in [0, 1)");
}

Phase default_phase(const CodingSystem& sys) {
  Phase p;
  p.x.assign(static_cast<std::size_t>(sys.dimension()), 0.0L);
  return p;
}

Phase random_phase(const CodingSystem& sys, Rng& rng) {
  Phase p = default_phase(sys);
  for (auto& v : p.x) v = static_cast<long double>(rng.uniform());
  p.seed = rng.next();
  return p;
}

}  // namespace

SymbolSequence orbit_coding(const CodingSystem& sys, const Phase& x0, long n_lo, long n_hi) {
  check_phase(sys, x0);
  if (n_hi < n_lo) fail(ErrorKind::domain, "empty orbit range");
  SymbolSequence out;
  out.n_lo = n_lo;
  out.symbols.resize(static_cast<std::size_t>(n_hi - n_lo + 1));
  Phase p = x0;
  if (n_lo > 0) {
    for (long i = 0; i < n_lo; ++i) p = sys.step(p);
  } else {
    for (long i = 0; i > n_lo; --i) p = sys.step_back(p);
  }
  for (long n = n_lo; n <= n_hi; ++n) {
    if (near_boundary(sys, p)) ++out.boundary_hits;
    out.symbols[static_cast<std::size_t>(n - n_lo)] = static_cast<char>(sys.symbol_at(p));
    if (n < n_hi) p = sys.step(p);
  }
  return out;
}

std::vector<double> symbol_values(const CodingSystem& sys, const std::string& symbols) {
  std::vector<double> out;
  out.reserve(symbols.size());
  for (char c : symbols) out.push_back(sys.alphabet().at(static_cast<unsigned char>(c)));
  return out;
}

std::size_t complexity(const std::string& seq, std::size_t n) { return count_factors(seq, n); }

double complexity_exponent(const CodingSystem& sys) {
  switch (sys.kind()) {
    case CodingKind::torus: return sys.dimension();
    case CodingKind::skew: return 3.0;
    case CodingKind::iet: return 1.0;
    case CodingKind::bernoulli: break;
  }
  fail(ErrorKind::domain, "Bernoulli codings have exponential complexity");
}

ComplexityProfile complexity_bound_check(const CodingSystem& sys,
                                         const std::vector<std::size_t>& n_values,
                                         std::size_t sample_length, const Phase& x0) {
  if (n_values.empty()) fail(ErrorKind::domain, "no n values");
  ComplexityProfile prof;
  prof.exponent = complexity_exponent(sys);
  const auto seq = orbit_coding(sys, x0, 0, static_cast<long>(sample_length) - 1).symbols;
  prof.n = n_values;
  std::sort(prof.n.begin(), prof.n.end());
  const std::size_t r = sys.kind() == CodingKind::iet ? sys.as_iet().perm.size() : 0;
  prof.affine_exact = r > 0;
  for (std::size_t n : prof.n) {
    if (n == 0) fail(ErrorKind::domain, "n must be >= 1");
    const std::size_t p = complexity(seq, n);
    if (!prof.p.empty() && p < prof.p.back()) prof.monotone = false;
    prof.p.push_back(p);
    prof.window_sufficient = prof.window_sufficient && complexity_window_sufficient(sample_length, n);
    prof.C = std::max(prof.C, static_cast<double>(p) / std::pow(static_cast<double>(n), prof.exponent));
    if (r > 0 && p != (r - 1) * n + 1) prof.affine_exact = false;
  }
  return prof;
}

double CylinderMeasures::measure(const std::string& word) const {
  auto it = std::lower_bound(cylinders.begin(), cylinders.end(), word,
                             [](const auto& c, const std::string& w) { return c.first < w; });
  return it != cylinders.end() && it->first == word ? it->second : 0.0;
}

namespace {

std::string code_forward(const CodingSystem& sys, Phase p, std::size_t n) {
  std::string w(n, '\0');
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = static_cast<char>(sys.symbol_at(p));
    if (j + 1 < n) p = sys.step(p);
  }
  return w;
}

std::vector<long double> sorted_unique(std::vector<long double> v) {
  std::sort(v.begin(), v.end());
  std::vector<long double> out;
  for (auto x : v)
    if (out.empty() || x - out.back() > 1e-15L) out.push_back(x);
  return out;
}

CylinderMeasures finish_measures(std::map<std::string, long double>& acc, std::string method) {
  CylinderMeasures out;
  out.method = std::move(method);
  for (auto& [w, m] : acc)
    if (m > 0.0L) out.cylinders.emplace_back(w, static_cast<double>(m));
  return out;
}

// Cut points along one coordinate of a translation: boundaries pulled back
// by j alpha, j < n. Cells of the resulting grid lie inside single cylinders.
std::vector<long double> translation_cuts(const std::vector<Rect>& cells, std::size_t coord,
                                          long double alpha, std::size_t n) {
  std::vector<long double> bounds;
  for (const auto& c : cells) {
    bounds.push_back(frac(c.lo[coord]));
    bounds.push_back(frac(c.hi[coord]));
  }
  bounds = sorted_unique(bounds);
  std::vector<long double> cuts{0.0L};
  for (auto b : bounds)
    for (std::size_t j = 0; j < n; ++j) cuts.push_back(frac(b - static_cast<long double>(j) * alpha));
  return sorted_unique(cuts);
}

CylinderMeasures torus_measures(const CodingSystem& sys, std::size_t n) {
  const auto& t = sys.as_torus();
  const std::size_t d = t.alpha.size();
  std::vector<std::vector<long double>> cuts(d);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    cuts[i] = translation_cuts(t.cells, i, t.alpha[i], n);
    total *= cuts[i].size();
    if (total > 20000000) fail(ErrorKind::resolution, "too many geometric cylinder cells");
  }
  std::map<std::string, long double> acc;
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t cell = 0; cell < total; ++cell) {
    Phase p;
    long double vol = 1.0L;
    std::size_t rem = cell;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t k = rem % cuts[i].size();
      rem /= cuts[i].size();
      const long double lo = cuts[i][k];
      const long double hi = k + 1 < cuts[i].size() ? cuts[i][k + 1] : 1.0L;
      p.x.push_back(0.5L * (lo + hi));
      vol *= hi - lo;
    }
    acc[code_forward(sys, p, n)] += vol;
  }
  return finish_measures(acc, "geometric");
}

CylinderMeasures iet_measures(const CodingSystem& sys, std::size_t n) {
  const auto& iet = sys.as_iet();
  std::vector<long double> cuts{0.0L};
  long double left = 0.0L;
  for (std::size_t j = 0; j + 1 < iet.lengths.size(); ++j) {
    left += iet.lengths[j];
    Phase p{{left}, 0};
    for (std::size_t k = 0; k < n; ++k) {
      cuts.push_back(p.x[0]);
      p = sys.step_back(p);
    }
  }
  cuts = sorted_unique(cuts);
  std::map<std::string, long double> acc;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const long double lo = cuts[k];
    const long double hi = k + 1 < cuts.size() ? cuts[k + 1] : 1.0L;
    acc[code_forward(sys, Phase{{0.5L * (lo + hi)}, 0}, n)] += hi - lo;
  }
  return finish_measures(acc, "geometric");
}

CylinderMeasures bernoulli_measures(const CodingSystem& sys, std::size_t n) {
  const auto& b = sys.as_bernoulli();
  const std::size_t a = b.labels.size();
  const double count = std::pow(static_cast<double>(a), static_cast<double>(n));
  if (count > 4194304.0) fail(ErrorKind::resolution, "too many Bernoulli cylinders to enumerate");
  std::vector<double> prob(a);
  for (std::size_t j = 0; j < a; ++j)
    prob[static_cast<std::size_t>(std::lower_bound(sys.alphabet().begin(), sys.alphabet().end(), b.labels[j]) -
                                  sys.alphabet().begin())] = b.probabilities[j];
  CylinderMeasures out;
  out.method = "exact";
  const auto total = static_cast<std::size_t>(count);
  for (std::size_t code = 0; code < total; ++code) {
    std::string w(n, '\0');
    double m = 1.0;
    std::size_t rem = code;
    for (std::size_t j = n; j-- > 0;) {
      w[j] = static_cast<char>(rem % a);
      m *= prob[rem % a];
      rem /= a;
    }
    out.cylinders.emplace_back(std::move(w), m);
  }
  std::sort(out.cylinders.begin(), out.cylinders.end());
  return out;
}

CylinderMeasures birkhoff_measures(const CodingSystem& sys, std::size_t n, const CylinderOptions& opt) {
  Phase start = opt.birkhoff_start;
  if (start.x.empty() && sys.dimension() > 0) {
    start = default_phase(sys);
    // Generic default start: irrational offsets away from cell boundaries.
    for (std::size_t i = 0; i < start.x.size(); ++i)
      start.x[i] = frac(0.5L * (std::sqrt(2.0L) + static_cast<long double>(i) * std::sqrt(3.0L)));
  }
  const std::size_t iters = opt.birkhoff_iterates;
  if (iters < 1) fail(ErrorKind::domain, "Birkhoff estimate needs iterates");
  const auto seq = orbit_coding(sys, start, 0, static_cast<long>(iters + n) - 2).symbols;
  std::unordered_map<std::string_view, std::size_t> counts;
  for (std::size_t i = 0; i < iters; ++i) ++counts[std::string_view(seq).substr(i, n)];
  CylinderMeasures out;
  out.method = "birkhoff";
  out.iterates = iters;
  for (const auto& [w, c] : counts)
    out.cylinders.emplace_back(std::string(w), static_cast<double>(c) / static_cast<double>(iters));
  std::sort(out.cylinders.begin(), out.cylinders.end());
  return out;
}

}  // namespace

CylinderMeasures cylinder_measures(const CodingSystem& sys, std::size_t n, const CylinderOptions& opt) {
  if (n == 0) fail(ErrorKind::domain, "cylinder length must be >= 1");
  switch (sys.kind()) {
    case CodingKind::torus: return torus_measures(sys, n);
    case CodingKind::iet: return iet_measures(sys, n);
    case CodingKind::bernoulli: return bernoulli_measures(sys, n);
    case CodingKind::skew: return birkhoff_measures(sys, n, opt);
  }
  fail(ErrorKind::domain, "unknown coding kind");
}

// ---- skew-shift cylinder polygons ----

namespace {

using Pt = std::pair<double, double>;
using Poly = std::vector<Pt>;

// Keeps {a x + b y >= t}.
Poly clip(const Poly& poly, double a, double b, double t) {
  Poly out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Pt& p = poly[i];
    const Pt& q = poly[(i + 1) % n];
    const double fp = a * p.first + b * p.second - t;
    const double fq = a * q.first + b * q.second - t;
    if (fp >= 0) out.push_back(p);
    if ((fp >= 0) != (fq >= 0)) {
      const double s = fp / (fp - fq);
      out.emplace_back(p.first + s * (q.first - p.first), p.second + s * (q.second - p.second));
    }
  }
  return out;
}

double area(const Poly& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Pt& a = p[i];
    const Pt& b = p[(i + 1) % p.size()];
    s += a.first * b.second - b.first * a.second;
  }
  return 0.5 * s;
}

// Range of a x + b y over the polygon.
std::pair<double, double> range(const Poly& p, double a, double b) {
  double lo = 1e300, hi = -1e300;
  for (const auto& v : p) {
    const double f = a * v.first + b * v.second;
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  return {lo, hi};
}

}  // namespace

std::vector<SkewCylinderCell> skew_cylinder_cells(const CodingSystem& sys, std::size_t n) {
  const auto& k = sys.as_skew();
  const double alpha = static_cast<double>(k.alpha);
  constexpr double kMinArea = 1e-14;
  struct Piece {
    std::string word;
    Poly poly;
  };
  std::vector<Piece> pieces{{"", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}}};
  for (std::size_t j = 0; j < n; ++j) {
    // T^j(x, y) = (x + j alpha, y + j x + j(j-1)/2 alpha).
    const double jd = static_cast<double>(j);
    const double off1 = jd * alpha;
    const double off2 = 0.5 * jd * (jd - 1.0) * alpha;
    std::vector<Piece> next;
    for (const auto& piece : pieces) {
      for (std::size_t c = 0; c < k.cells.size(); ++c) {
        const Rect& r = k.cells[c];
        const char sym = static_cast<char>(sys.symbol_at(Phase{{(r.lo[0] + r.hi[0]) / 2, (r.lo[1] + r.hi[1]) / 2}, 0}));
        const auto [l1, h1] = range(piece.poly, 1.0, 0.0);
        for (double m1 = std::floor(l1 + off1 - r.hi[0]); m1 <= std::ceil(h1 + off1 - r.lo[0]); ++m1) {
          // r.lo + m1 <= x + off1 < r.hi + m1
          Poly p1 = clip(piece.poly, 1.0, 0.0, r.lo[0] + m1 - off1);
          if (p1.size() < 3) continue;
          p1 = clip(p1, -1.0, 0.0, -(r.hi[0] + m1 - off1));
          if (p1.size() < 3 || area(p1) < kMinArea) continue;
          const auto [l2, h2] = range(p1, jd, 1.0);
          for (double m2 = std::floor(l2 + off2 - r.hi[1]); m2 <= std::ceil(h2 + off2 - r.lo[1]); ++m2) {
            Poly p2 = clip(p1, jd, 1.0, r.lo[1] + m2 - off2);
            if (p2.size() < 3) continue;
            p2 = clip(p2, -jd, -1.0, -(r.hi[1] + m2 - off2));
            if (p2.size() < 3 || area(p2) < kMinArea) continue;
            next.push_back({piece.word + sym, std::move(p2)});
          }
        }
      }
    }
    pieces = std::move(next);
  }
  std::vector<SkewCylinderCell> out;
  out.reserve(pieces.size());
  for (auto& p : pieces) {
    const double a = area(p.poly);
    out.push_back({std::move(p.word), std::move(p.poly), a});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.word < b.word; });
  return out;
}

TransitivityProfile transitivity_profile(const CodingSystem& sys, std::size_t n, double C,
                                         double exponent, std::size_t phases, std::uint64_t seed,
                                         std::size_t max_window, const CylinderOptions& opt) {
  if (n == 0 || phases == 0 || !(C > 0.0)) fail(ErrorKind::domain, "invalid transitivity parameters");
  const double w = C * std::pow(static_cast<double>(n), exponent);
  if (!(w <= static_cast<double>(max_window)))
    fail(ErrorKind::resolution, "window " + std::to_string(w) + " exceeds the sample budget " +
                                    std::to_string(max_window));
  TransitivityProfile prof;
  prof.n = n;
  prof.window = static_cast<std::size_t>(std::floor(w));
  const CylinderMeasures cyl = cylinder_measures(sys, n, opt);
  prof.method = cyl.method;

  Rng rng(seed);
  std::vector<Phase> starts;
  for (std::size_t i = 0; i < phases; ++i) starts.push_back(random_phase(sys, rng));
  prof.visited_mass.assign(phases, 0.0);
  detail::ExceptionSlot slot;
  const auto count = static_cast<long>(phases);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    slot.run([&] {
      const auto seq = orbit_coding(sys, starts[i], 0, static_cast<long>(prof.window + n) - 1).symbols;
      std::unordered_set<std::string_view> seen;
      for (std::size_t m = 0; m <= prof.window; ++m) seen.insert(std::string_view(seq).substr(m, n));
      std::vector<std::string_view> words(seen.begin(), seen.end());
      std::sort(words.begin(), words.end());
      double mass = 0.0;
      for (auto v : words) mass += cyl.measure(std::string(v));
      prof.visited_mass[i] = std::min(1.0, mass);
    });
  }
  slot.rethrow();
  std::vector<double> sorted = prof.visited_mass;
  std::sort(sorted.begin(), sorted.end());
  prof.min_mass = sorted.front();
  prof.delta_hat = sorted[static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(phases - 1)))];
  return prof;
}

std::size_t complexity_mass_profile(const CodingSystem& sys, std::size_t n, double eps,
                                    const CylinderOptions& opt) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::domain, "eps must lie in (0, 1)");
  const CylinderMeasures cyl = cylinder_measures(sys, 2 * n + 1, opt);
  std::vector<double> masses;
  for (const auto& c : cyl.cylinders) masses.push_back(c.second);
  std::sort(masses.begin(), masses.end(), std::greater<>());
  double acc = 0.0;
  std::size_t count = 0;
  for (double m : masses) {
    if (acc > 1.0 - eps) break;
    acc += m;
    ++count;
  }
  return count;
}

double diophantine_margin(const std::vector<long double>& alpha, double tau, int K) {
  if (K < 1) fail(ErrorKind::domain, "K must be >= 1");
  const std::size_t d = alpha.size();
  if (d == 0) fail(ErrorKind::domain, "empty frequency vector");
  const long double span = 2.0L * K + 1.0L;
  if (std::pow(span, static_cast<long double>(d)) > 5e8L) fail(ErrorKind::resolution, "K^d too large");
  double best = 1e300;
  std::vector<int> k(d, -K);
  for (;;) {
    // Half of the lattice: first nonzero entry positive.
    std::size_t first = 0;
    while (first < d && k[first] == 0) ++first;
    if (first < d && k[first] > 0) {
      long double dot = 0.0L;
      int norm = 0;
      for (std::size_t i = 0; i < d; ++i) {
        dot += static_cast<long double>(k[i]) * alpha[i];
        norm = std::max(norm, std::abs(k[i]));
      }
      const long double dist = circle_distance(frac(dot), 0.0L);
      best = std::min(best, static_cast<double>(dist) * std::pow(static_cast<double>(norm), tau));
    }
    std::size_t i = 0;
    while (i < d && k[i] == K) k[i++] = -K;
    if (i == d) break;
    ++k[i];
  }
  return best;
}

HittingReport dense_hitting_time(const CodingSystem& sys, double gamma, std::size_t phases,
                                 std::size_t targets, std::uint64_t seed, std::size_t max_steps) {
  const auto& t = sys.as_torus();
  if (!(gamma > 0.0)) fail(ErrorKind::domain, "gamma must be positive");
  if (phases == 0 || targets == 0) fail(ErrorKind::domain, "need phases and targets");
  Rng rng(seed);
  const std::size_t d = t.alpha.size();
  std::vector<std::vector<long double>> xs(phases, std::vector<long double>(d)), cs(targets, std::vector<long double>(d));
  for (auto& x : xs)
    for (auto& v : x) v = static_cast<long double>(rng.uniform());
  for (auto& c : cs)
    for (auto& v : c) v = static_cast<long double>(rng.uniform());
  HittingReport rep;
  rep.gamma = gamma;
  const long double g = gamma;
  for (const auto& x0 : xs) {
    for (const auto& c : cs) {
      std::vector<long double> x = x0;
      std::size_t steps = 0;
      for (;;) {
        long double dist = 0.0L;
        for (std::size_t i = 0; i < d; ++i) dist = std::max(dist, circle_distance(x[i], c[i]));
        if (dist < g) break;
        if (++steps > max_steps)
          throw BudgetError("hitting time exceeds " + std::to_string(max_steps) + " at gamma " +
                                std::to_string(gamma) + "; partial max " + std::to_string(rep.max_time),
                            static_cast<double>(rep.max_time), 0);
        for (std::size_t i = 0; i < d; ++i) x[i] = frac(x[i] + t.alpha[i]);
      }
      rep.max_time = std::max(rep.max_time, steps);
    }
  }
  return rep;
}

HittingFit hitting_time_exponent(const CodingSystem& sys, const std::vector<double>& gammas,
                                 std::size_t phases, std::size_t targets, std::uint64_t seed) {
  HittingFit fit;
  std::vector<double> xs, ys;
  for (double g : gammas) {
    fit.reports.push_back(dense_hitting_time(sys, g, phases, targets, seed));
    if (fit.reports.back().max_time > 0) {
      xs.push_back(std::log(1.0 / g));
      ys.push_back(std::log(static_cast<double>(fit.reports.back().max_time)));
    }
  }
  if (xs.size() >= 2) {
    const double k = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    fit.exponent = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  }
  return fit;
}

BirkhoffReport birkhoff_deviation(const CodingSystem& sys, const std::vector<FourierTerm>& f,
                                  const std::vector<std::size_t>& N_values, std::size_t phases,
                                  std::uint64_t seed) {
  const auto& k = sys.as_skew();
  if (phases == 0) fail(ErrorKind::domain, "need at least one phase");
  std::vector<std::size_t> Ns(N_values);
  std::sort(Ns.begin(), Ns.end());
  double mean = 0.0;
  for (const auto& t : f)
    if (t.kx == 0 && t.ky == 0) mean += t.c;
  Rng rng(seed);
  std::vector<std::pair<long double, long double>> starts(phases);
  for (auto& s : starts) {
    s.first = static_cast<long double>(rng.uniform());
    s.second = static_cast<long double>(rng.uniform());
  }
  std::vector<std::vector<double>> dev(phases, std::vector<double>(Ns.size(), 0.0));
  const auto count = static_cast<long>(phases);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    long double x = starts[i].first, y = starts[i].second;
    long double sum = 0.0L;
    std::size_t next = 0;
    for (std::size_t n = 0; next < Ns.size(); ++n) {
      while (next < Ns.size() && Ns[next] == n) {
        dev[i][next] = static_cast<double>(std::abs(sum - static_cast<long double>(n) * mean));
        ++next;
      }
      if (next == Ns.size()) break;
      for (const auto& t : f) {
        const long double arg = kTwoPi * (t.kx * x + t.ky * y);
        sum += t.c * std::cos(arg) + t.s * std::sin(arg);
      }
      y = frac(y + x);
      x = frac(x + k.alpha);
    }
  }
  BirkhoffReport rep;
  rep.N = Ns;
  for (std::size_t j = 0; j < Ns.size(); ++j) {
    double d = 0.0;
    for (std::size_t i = 0; i < phases; ++i) d = std::max(d, dev[i][j]);
    rep.deviation.push_back(d);
    const double N = static_cast<double>(Ns[j]);
    rep.over_sqrt.push_back(N > 0 ? d / std::sqrt(N) : 0.0);
    rep.over_N.push_back(N > 0 ? d / N : 0.0);
  }
  return rep;
}

std::vector<long double> random_simplex(int r, std::uint64_t seed) {
  if (r < 1) fail(ErrorKind::domain, "r must be >= 1");
  Rng rng(seed);
  std::vector<long double> u{0.0L, 1.0L};
  for (int i = 0; i + 1 < r; ++i) u.push_back(static_cast<long double>(rng.uniform()));
  std::sort(u.begin(), u.end());
  std::vector<long double> out;
  for (int i = 0; i < r; ++i) out.push_back(u[i + 1] - u[i]);
  // Renormalize the last spacing so the lengths sum to 1 exactly in long double.
  long double s = 0.0L;
  for (int i = 0; i + 1 < r; ++i) s += out[i];
  out.back() = 1.0L - s;
  return out;
}

}  // namespace sslab
