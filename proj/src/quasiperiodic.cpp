#include "sslab/quasiperiodic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sslab/errors.hpp"
#include "sslab/kernels.hpp"
#include "sslab/periodic.hpp"
#include "sslab/rng.hpp"

namespace sslab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double frac(double x) { return x - std::floor(x); }

// Distance on the circle from c to the arc [lo, lo + len].
double arc_distance(double c, double lo, double len) {
  const double t = frac(c - lo);
  if (t <= len) return 0.0;
  return std::min(t - len, 1.0 - t);
}

double hat(double t) { return std::max(0.0, 1.0 - std::abs(t)); }

}  // namespace

Rational make_rational(long p, long q) {
  if (q == 0) fail(ErrorKind::domain, "rational with zero denominator");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  const long g = std::gcd(p, q);
  return {p / g, q / g};
}

SamplingFunction SamplingFunction::constant(double c) { return step({{0, 1}}, {c}); }

SamplingFunction SamplingFunction::step(std::vector<Rational> breakpoints, std::vector<double> values) {
  if (breakpoints.empty() || breakpoints.size() != values.size())
    fail(ErrorKind::domain, "step function needs one value per breakpoint");
  for (auto& b : breakpoints) {
    b = make_rational(b.p, b.q);
    if (b.p < 0 || b.p >= b.q) fail(ErrorKind::domain, "step breakpoints must lie in [0, 1)");
  }
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i - 1].p * breakpoints[i].q < breakpoints[i].p * breakpoints[i - 1].q))
      fail(ErrorKind::domain, "step breakpoints must be sorted and distinct");
  SamplingFunction f;
  f.kind_ = SamplingKind::step;
  f.breaks_ = std::move(breakpoints);
  f.values_ = std::move(values);
  return f;
}

SamplingFunction SamplingFunction::trig(double a0, std::vector<double> cos_coef,
                                        std::vector<double> sin_coef) {
  SamplingFunction f;
  f.kind_ = SamplingKind::trig;
  f.a0_ = a0;
  const std::size_t K = std::max(cos_coef.size(), sin_coef.size());
  cos_coef.resize(K, 0.0);
  sin_coef.resize(K, 0.0);
  f.cos_ = std::move(cos_coef);
  f.sin_ = std::move(sin_coef);
  return f;
}

SamplingFunction SamplingFunction::tabulated(std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::domain, "tabulated function needs values");
  SamplingFunction f;
  f.kind_ = SamplingKind::tabulated;
  f.values_ = std::move(values);
  return f;
}

SamplingFunction SamplingFunction::with_bumps(const std::vector<Bump>& extra) const {
  SamplingFunction f = *this;
  for (const auto& b : extra) {
    if (!(b.half_width > 0.0 && b.half_width < 0.5))
      fail(ErrorKind::domain, "bump half width must lie in (0, 1/2)");
    f.bumps_.push_back({frac(b.center), b.half_width, b.height});
  }
  return f;
}

double SamplingFunction::base(double x) const {
  x = frac(x);
  switch (kind_) {
    case SamplingKind::step: {
      std::size_t j = breaks_.size() - 1;
      for (std::size_t i = 0; i < breaks_.size(); ++i) {
        if (x < breaks_[i].value()) break;
        j = i;
      }
      return values_[j];
    }
    case SamplingKind::trig: {
      double s = a0_;
      for (std::size_t k = 0; k < cos_.size(); ++k) {
        const double t = kTwoPi * static_cast<double>(k + 1) * x;
        s += cos_[k] * std::cos(t) + sin_[k] * std::sin(t);
      }
      return s;
    }
    case SamplingKind::tabulated: {
      const double M = static_cast<double>(values_.size());
      const double t = x * M;
      const auto j = std::min(static_cast<std::size_t>(t), values_.size() - 1);
      const double u = t - static_cast<double>(j);
      return (1.0 - u) * values_[j] + u * values_[(j + 1) % values_.size()];
    }
  }
  return 0.0;
}

double SamplingFunction::bump_sum(double x) const {
  double s = 0.0;
  for (const auto& b : bumps_) {
    double d = frac(x - b.center);
    if (d > 0.5) d -= 1.0;
    s += b.height * hat(d / b.half_width);
  }
  return s;
}

double SamplingFunction::operator()(double x) const { return base(x) + bump_sum(x); }

std::vector<double> SamplingFunction::kinks() const {
  std::vector<double> k;
  if (kind_ == SamplingKind::step)
    for (const auto& b : breaks_) k.push_back(b.value());
  for (const auto& b : bumps_) {
    k.push_back(frac(b.center - b.half_width));
    k.push_back(b.center);
    k.push_back(frac(b.center + b.half_width));
  }
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

double SamplingFunction::sup_norm() const {
  std::vector<double> xs = kinks();
  if (kind_ == SamplingKind::tabulated)
    for (std::size_t j = 0; j < values_.size(); ++j)
      xs.push_back(static_cast<double>(j) / static_cast<double>(values_.size()));
  double m = 0.0;
  for (double x : xs) {
    m = std::max(m, std::abs((*this)(x)));
    if (kind_ == SamplingKind::step) {
      // left limit at a jump
      m = std::max(m, std::abs((*this)(x - 1e-15)));
    }
  }
  if (kind_ == SamplingKind::step && bumps_.empty()) {
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  if (kind_ == SamplingKind::trig || !bumps_.empty()) {
    const std::size_t n = 64 * (cos_.size() + 1) + 4096;
    std::size_t best = 0;
    double bv = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::abs((*this)(static_cast<double>(i) / static_cast<double>(n)));
      if (v > bv) {
        bv = v;
        best = i;
      }
    }
    double lo = (static_cast<double>(best) - 1.0) / static_cast<double>(n);
    double hi = (static_cast<double>(best) + 1.0) / static_cast<double>(n);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
      const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
      if (std::abs((*this)(x1)) > std::abs((*this)(x2)))
        hi = x2;
      else
        lo = x1;
    }
    m = std::max({m, bv, std::abs((*this)(0.5 * (lo + hi)))});
  }
  return m;
}

double SamplingFunction::bump_sup_norm() const {
  double m = 0.0;
  for (double x : kinks()) m = std::max(m, std::abs(bump_sum(x)));
  return m;
}

double SamplingFunction::lipschitz_on(double lo, double hi) const {
  double L = 0.0;
  switch (kind_) {
    case SamplingKind::step:
      break;
    case SamplingKind::trig:
      for (std::size_t k = 0; k < cos_.size(); ++k)
        L += kTwoPi * static_cast<double>(k + 1) * (std::abs(cos_[k]) + std::abs(sin_[k]));
      break;
    case SamplingKind::tabulated:
      for (std::size_t j = 0; j < values_.size(); ++j)
        L = std::max(L, std::abs(values_[(j + 1) % values_.size()] - values_[j]));
      L *= static_cast<double>(values_.size());
      break;
  }
  const double len = std::min(1.0, hi - lo);
  for (const auto& b : bumps_)
    if (arc_distance(b.center, lo, len) < b.half_width) L += std::abs(b.height) / b.half_width;
  return L;
}

double SamplingFunction::lipschitz() const { return lipschitz_on(0.0, 1.0); }

bool SamplingFunction::piecewise_constant() const {
  if (!bumps_.empty()) return false;
  if (kind_ == SamplingKind::step) return true;
  return lipschitz() == 0.0;
}

std::string SamplingFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case SamplingKind::step:
      os << "step{";
      for (std::size_t i = 0; i < breaks_.size(); ++i)
        os << (i ? ", " : "") << breaks_[i].p << "/" << breaks_[i].q << ":" << values_[i];
      os << "}";
      break;
    case SamplingKind::trig:
      os << "trig{a0=" << a0_ << ", K=" << cos_.size() << "}";
      break;
    case SamplingKind::tabulated:
      os << "tabulated{M=" << values_.size() << "}";
      break;
  }
  if (!bumps_.empty()) os << " + " << bumps_.size() << " bumps";
  return os.str();
}

Word qp_word(const SamplingFunction& f, Rational alpha, double omega) {
  if (alpha.q < 1) fail(ErrorKind::domain, "denominator must be positive");
  std::vector<double> v(static_cast<std::size_t>(alpha.q));
  for (long m = 0; m < alpha.q; ++m) {
    long r = (m * alpha.p) % alpha.q;
    if (r < 0) r += alpha.q;
    v[static_cast<std::size_t>(m)] =
        f(frac(omega + static_cast<double>(r) / static_cast<double>(alpha.q)));
  }
  return Word(std::move(v));
}

namespace {

struct Piece {
  double lo, hi, lip;
};

// [0, 1/q) cut at every jump or kink of f reduced mod 1/q, with the local
// Lipschitz bound of the word map omega -> V_omega on each piece.
std::vector<Piece> phase_pieces(Rational alpha, const SamplingFunction& f) {
  const double cell = 1.0 / static_cast<double>(alpha.q);
  std::vector<double> cuts{0.0, cell};
  for (double k : f.kinks()) {
    const double t = std::fmod(k, cell);
    if (t > 1e-15 && t < cell - 1e-15) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return b - a < 1e-15; }),
             cuts.end());
  std::vector<Piece> pieces;
  const bool flat = f.kind() == SamplingKind::step;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    double lip = 0.0;
    if (!flat || !f.bumps().empty()) {
      for (long m = 0; m < alpha.q; ++m) {
        const double shift = static_cast<double>(m) * cell;
        lip = std::max(lip, f.lipschitz_on(lo + shift, hi + shift));
      }
    }
    pieces.push_back({lo, hi, lip});
  }
  return pieces;
}

struct SampledSpectrum {
  BandSet inner, outer;
  std::size_t samples = 0;
  double widening = 0.0;
};

SampledSpectrum sample_spectrum(Rational alpha, const SamplingFunction& f,
                                const std::vector<Piece>& pieces, std::size_t P) {
  std::vector<Word> words;
  std::vector<double> widen;
  for (const auto& pc : pieces) {
    const double len = pc.hi - pc.lo;
    std::size_t m = 1;
    if (pc.lip > 0.0)
      m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(static_cast<double>(P) * len * (1.0 + pc.lip))));
    const double h = len / static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) {
      words.push_back(qp_word(f, alpha, pc.lo + (static_cast<double>(j) + 0.5) * h));
      widen.push_back(0.5 * pc.lip * h);
    }
  }
  const auto spectra = band_spectra(words);
  std::vector<Interval> in, out;
  SampledSpectrum s;
  s.samples = words.size();
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    s.widening = std::max(s.widening, widen[i]);
    for (const auto& iv : spectra[i].set.intervals()) {
      in.push_back(iv);
      out.push_back({iv.lo - widen[i], iv.hi + widen[i]});
    }
  }
  s.inner = BandSet::normalize(std::move(in));
  s.outer = BandSet::normalize(std::move(out));
  return s;
}

}  // namespace

RationalSpectrum rational_spectrum(Rational alpha, const SamplingFunction& f,
                                   const RationalSpectrumOptions& opt) {
  alpha = make_rational(alpha.p, alpha.q);
  if (alpha.q > 200) fail(ErrorKind::domain, "rational_spectrum supports q <= 200");
  const auto q = static_cast<std::size_t>(alpha.q);
  std::size_t P = opt.P ? opt.P : 8 * q;
  const std::size_t P_max = opt.P_max ? opt.P_max : 4096 * q;
  if (P < 8 * q) fail(ErrorKind::domain, "phase grid needs P >= 8q");
  const auto pieces = phase_pieces(alpha, f);
  const bool exact =
      std::all_of(pieces.begin(), pieces.end(), [](const Piece& p) { return p.lip == 0.0; });
  RationalSpectrum out;
  SampledSpectrum cur = sample_spectrum(alpha, f, pieces, P);
  if (exact) {
    out.exact = true;
  } else if (opt.refine) {
    for (;;) {
      if (2 * P > P_max)
        fail(ErrorKind::resolution, "rational spectrum did not converge to tol " + std::to_string(opt.tol) +
                                        " by P = " + std::to_string(P));
      SampledSpectrum next = sample_spectrum(alpha, f, pieces, 2 * P);
      out.last_change = hausdorff_distance(cur.inner, next.inner);
      P *= 2;
      cur = std::move(next);
      if (out.last_change < opt.tol) break;
    }
  }
  out.inner = std::move(cur.inner);
  out.outer = std::move(cur.outer);
  out.P = P;
  out.samples = cur.samples;
  out.widening = cur.widening;
  return out;
}

StepApproximation step_approximation(const SamplingFunction& f, std::size_t B) {
  if (B < 1) fail(ErrorKind::domain, "step approximation needs B >= 1");
  if (f.kind() == SamplingKind::step && f.bumps().empty()) {
    const auto& v = f.values();
    if (std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) != v.end())
      fail(ErrorKind::domain, "step approximation needs a continuous function");
  }
  std::vector<Rational> breaks;
  std::vector<double> values;
  for (std::size_t j = 0; j < B; ++j) {
    breaks.push_back(make_rational(static_cast<long>(j), static_cast<long>(B)));
    values.push_back(f(static_cast<double>(j) / static_cast<double>(B)));
  }
  StepApproximation out{SamplingFunction::step(std::move(breaks), std::move(values)), 0.0};
  out.error_bound = f.lipschitz() / static_cast<double>(B);
  return out;
}

GapClosing gap_closing_perturbation(Rational beta, const SamplingFunction& g, Interval I,
                                    const GapClosingOptions& opt) {
  beta = make_rational(beta.p, beta.q);
  if (!(I.hi > I.lo)) fail(ErrorKind::domain, "target interval must have positive length");
  const double cap = I.length() / 10.0;
  const auto sigma = rational_spectrum(beta, g, {0, 0, opt.verify_tol / 2});
  const BandSet target = BandSet::single(I.lo, I.hi);
  const BandSet holes = target.difference(sigma.inner);
  double widest = 0.0;
  std::vector<Interval> gaps;
  for (const auto& iv : holes.intervals()) {
    if (iv.lo <= I.lo || iv.hi >= I.hi)
      fail(ErrorKind::construction_precondition, "target interval must begin and end inside the spectrum");
    gaps.push_back(iv);
    widest = std::max(widest, iv.length());
  }
  GapClosing out;
  out.r = opt.r;
  out.epsilon = opt.epsilon > 0.0 ? opt.epsilon : std::min(2.0 * widest, cap);
  if (opt.epsilon > 0.0 && opt.epsilon > cap)
    fail(ErrorKind::construction_precondition, "epsilon must be at most |I|/10");
  for (const auto& gap : gaps)
    if (!(gap.length() < out.epsilon))
      fail(ErrorKind::construction_precondition,
           "gap of width " + std::to_string(gap.length()) + " is not smaller than epsilon");
  if (gaps.empty()) {
    out.h = g;
    out.verified = true;
    return out;
  }
  if (!(opt.r > 0.0)) fail(ErrorKind::support_budget, "support budget r must be positive");

  // Band edges of sigma(H_omega) on a phase scan of [0, 1/q).
  const double cell = 1.0 / static_cast<double>(beta.q);
  const std::size_t S = std::max<std::size_t>(opt.scan_phases, 8);
  const double step = cell / static_cast<double>(S);
  std::vector<Word> words;
  for (std::size_t j = 0; j < S; ++j) words.push_back(qp_word(g, beta, (static_cast<double>(j) + 0.5) * step));
  const auto spectra = band_spectra(words);

  for (const auto& gap : gaps) {
    std::vector<double> edge(S, -INFINITY);
    for (std::size_t j = 0; j < S; ++j)
      for (const auto& b : spectra[j].bands)
        if (b.hi <= gap.lo + 1e-9) edge[j] = std::max(edge[j], b.hi);
    const double best = *std::max_element(edge.begin(), edge.end());
    // middle of the longest run of maximizing phases
    std::size_t run_start = 0, run_len = 0, best_start = 0, best_len = 0;
    for (std::size_t j = 0; j < S; ++j) {
      if (best - edge[j] <= 1e-12) {
        if (run_len == 0) run_start = j;
        ++run_len;
        if (run_len > best_len) {
          best_len = run_len;
          best_start = run_start;
        }
      } else {
        run_len = 0;
      }
    }
    GapFix fix;
    fix.gap = gap;
    fix.abut_edge = best;
    fix.omega = (static_cast<double>(best_start + best_len / 2) + 0.5) * step;
    fix.located = std::isfinite(best) && best + out.epsilon >= gap.hi;
    out.gaps.push_back(fix);
  }

  auto circ = [cell](double a, double b) {
    const double t = std::fmod(std::abs(a - b), cell);
    return std::min(t, cell - t);
  };
  for (std::size_t i = 0; i < out.gaps.size(); ++i) {
    for (bool moved = true; moved;) {
      moved = false;
      for (std::size_t j = 0; j < i; ++j)
        if (circ(out.gaps[i].omega, out.gaps[j].omega) < 1e-12) {
          out.gaps[i].omega = std::fmod(out.gaps[i].omega + step, cell);
          out.adjusted = moved = true;
        }
    }
  }
  double dmin = cell;
  for (std::size_t i = 0; i < out.gaps.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) dmin = std::min(dmin, circ(out.gaps[i].omega, out.gaps[j].omega));
  const double k = static_cast<double>(out.gaps.size());
  const double q = static_cast<double>(beta.q);
  const double w = std::min(0.45 * opt.r / (q * k), 0.45 * dmin);
  if (!(w > 1e-12)) fail(ErrorKind::support_budget, "bump supports cannot be kept disjoint within r");
  out.half_width = w;
  for (const auto& fix : out.gaps)
    for (long m = 0; m < beta.q; ++m)
      out.bumps.push_back({frac(fix.omega + static_cast<double>(m) * cell), w, out.epsilon});
  out.support_total = q * k * 2.0 * w;
  if (!(out.support_total < opt.r)) fail(ErrorKind::support_budget, "bump support exceeds r");
  out.h = g.with_bumps(out.bumps);

  double diff = 0.0;
  std::vector<double> xs = out.h.kinks();
  for (double x : xs) diff = std::max(diff, std::abs(out.h(x) - g(x)));
  out.sup_difference = diff;

  // One pass with widening <= verify_tol / 2; the inner set never overstates coverage.
  RationalSpectrumOptions vo;
  vo.P = std::max<std::size_t>(8 * static_cast<std::size_t>(beta.q), static_cast<std::size_t>(std::ceil(1.0 / opt.verify_tol)));
  vo.refine = false;
  const auto after = rational_spectrum(beta, out.h, vo);
  const auto n = static_cast<std::size_t>(std::ceil(I.length() / opt.verify_tol));
  out.verify_points = n + 1;
  for (std::size_t j = 0; j <= n; ++j) {
    const double E = std::min(I.hi, I.lo + static_cast<double>(j) * opt.verify_tol);
    if (after.inner.distance_to(E) > opt.verify_tol) out.uncovered.push_back(E);
  }
  out.verified = out.uncovered.empty();
  return out;
}

double periodic_dos_integral(const Word& w, const std::function<double(double)>& psi,
                             const std::function<double(double)>& dpsi, double lo, double hi,
                             std::size_t points) {
  if (points < 3) fail(ErrorKind::domain, "quadrature needs at least 3 points");
  if (points % 2 == 0) ++points;
  // int psi dk = psi(hi) k(hi) - psi(lo) k(lo) - int psi' k dE, Simpson in E.
  const double h = (hi - lo) / static_cast<double>(points - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double E = lo + h * static_cast<double>(i);
    const double wgt = (i == 0 || i + 1 == points) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += wgt * dpsi(E) * periodic_ids(w, E);
  }
  acc *= h / 3.0;
  return psi(hi) * periodic_ids(w, hi) - psi(lo) * periodic_ids(w, lo) - acc;
}

DosPerturbationReport dos_perturbation_bound(Rational beta, const SamplingFunction& g,
                                             const SamplingFunction& h, std::size_t test_functions,
                                             std::size_t samples, std::uint64_t seed) {
  beta = make_rational(beta.p, beta.q);
  const auto& gb = g.bumps();
  const auto& hb = h.bumps();
  if (hb.size() < gb.size() || !std::equal(gb.begin(), gb.end(), hb.begin(), [](const Bump& a, const Bump& b) {
        return a.center == b.center && a.half_width == b.half_width && a.height == b.height;
      }))
    fail(ErrorKind::domain, "h must be g plus bumps");
  std::vector<Interval> arcs;
  for (std::size_t i = gb.size(); i < hb.size(); ++i) {
    const double lo = hb[i].center - hb[i].half_width, hi = hb[i].center + hb[i].half_width;
    if (lo < 0.0) {
      arcs.push_back({lo + 1.0, 1.0});
      arcs.push_back({0.0, hi});
    } else if (hi > 1.0) {
      arcs.push_back({lo, 1.0});
      arcs.push_back({0.0, hi - 1.0});
    } else {
      arcs.push_back({lo, hi});
    }
  }
  const BandSet support = BandSet::normalize(arcs);
  DosPerturbationReport rep;
  rep.r = support.measure();
  rep.bound = 2.0 * rep.r;
  rep.discrepancy.assign(test_functions, 0.0);
  rep.sigma.assign(test_functions, 0.0);
  if (support.empty() || test_functions == 0) return rep;
  if (samples < 2) fail(ErrorKind::domain, "need at least two Monte Carlo samples");

  const double lo = -std::max(g.sup_norm(), h.sup_norm()) - 2.5;
  const double hi = -lo;
  const double L = hi - lo;
  Rng rng(seed);
  constexpr int kTerms = 4;
  struct Psi {
    double c[kTerms + 1], s[kTerms + 1];
  };
  std::vector<Psi> psis(test_functions);
  for (auto& p : psis) {
    double norm = 0.0;
    for (int m = 0; m <= kTerms; ++m) {
      p.c[m] = rng.uniform(-1.0, 1.0);
      p.s[m] = m ? rng.uniform(-1.0, 1.0) : 0.0;
      norm += std::abs(p.c[m]) + std::abs(p.s[m]);
    }
    for (int m = 0; m <= kTerms; ++m) {
      p.c[m] /= norm;
      p.s[m] /= norm;
    }
  }
  const double pi = kTwoPi / 2.0;
  std::vector<double> omegas(samples);
  for (auto& om : omegas) {
    double u = rng.uniform() * rep.r;
    om = support[support.size() - 1].hi;
    for (const auto& iv : support.intervals()) {
      if (u <= iv.length()) {
        om = iv.lo + u;
        break;
      }
      u -= iv.length();
    }
  }
  // d[t][i]: difference of DOS integrals for test function t at sample i
  std::vector<std::vector<double>> d(test_functions, std::vector<double>(samples));
  const auto ns = static_cast<long>(samples);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < ns; ++i) {
    const Word wg = qp_word(g, beta, omegas[i]);
    const Word wh = qp_word(h, beta, omegas[i]);
    for (std::size_t t = 0; t < test_functions; ++t) {
      const Psi& p = psis[t];
      auto psi = [&](double E) {
        const double x = pi * (E - lo) / L;
        double v = 0.0;
        for (int m = 0; m <= kTerms; ++m) v += p.c[m] * std::cos(m * x) + p.s[m] * std::sin(m * x);
        return v;
      };
      auto dpsi = [&](double E) {
        const double x = pi * (E - lo) / L;
        double v = 0.0;
        for (int m = 1; m <= kTerms; ++m) v += m * (-p.c[m] * std::sin(m * x) + p.s[m] * std::cos(m * x));
        return v * pi / L;
      };
      d[t][i] = periodic_dos_integral(wg, psi, dpsi, lo, hi) - periodic_dos_integral(wh, psi, dpsi, lo, hi);
    }
  }
  for (std::size_t t = 0; t < test_functions; ++t) {
    const double mean = std::accumulate(d[t].begin(), d[t].end(), 0.0) / static_cast<double>(samples);
    double var = 0.0;
    for (double x : d[t]) var += (x - mean) * (x - mean);
    var /= static_cast<double>(samples - 1);
    rep.discrepancy[t] = std::abs(rep.r * mean);
    rep.sigma[t] = rep.r * std::sqrt(var / static_cast<double>(samples));
    if (rep.discrepancy[t] > rep.bound + 3.0 * rep.sigma[t]) rep.ok = false;
  }
  return rep;
}

std::vector<Rational> golden_convergents(long max_q) {
  std::vector<Rational> out;
  long a = 1, b = 2;
  while (b <= max_q) {
    out.push_back({a, b});
    const long c = a + b;
    a = b;
    b = c;
  }
  return out;
}

namespace {

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace

HausdorffProbe hausdorff_continuity_probe(const std::vector<ApproximantStep>& steps,
                                          const RationalSpectrumOptions& opt) {
  if (steps.empty()) fail(ErrorKind::domain, "probe needs at least one step");
  HausdorffProbe out;
  for (const auto& s : steps) out.spectra.push_back(rational_spectrum(s.alpha, s.f, opt).inner);
  for (std::size_t i = 0; i + 1 < out.spectra.size(); ++i)
    out.consecutive.push_back(hausdorff_distance(out.spectra[i], out.spectra[i + 1]));
  for (const auto& s : out.spectra) out.to_last.push_back(hausdorff_distance(s, out.spectra.back()));
  out.decreasing = strictly_decreasing(out.consecutive);
  return out;
}

std::vector<double> rational_ids(Rational alpha, const SamplingFunction& f, std::span<const double> energies,
                                 std::size_t phases) {
  alpha = make_rational(alpha.p, alpha.q);
  if (phases < 1) fail(ErrorKind::domain, "need at least one phase");
  const double cell = 1.0 / static_cast<double>(alpha.q);
  std::vector<Word> words;
  for (std::size_t j = 0; j < phases; ++j)
    words.push_back(qp_word(f, alpha, (static_cast<double>(j) + 0.5) * cell / static_cast<double>(phases)));
  std::vector<double> k(energies.size(), 0.0);
  const auto ne = static_cast<long>(energies.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < ne; ++i) {
    double s = 0.0;
    for (const auto& w : words) s += periodic_ids(w, energies[i]);
    k[i] = s / static_cast<double>(phases);
  }
  return k;
}

IdsProbe ids_continuity_probe(const std::vector<ApproximantStep>& steps, std::span<const double> energies,
                              std::size_t phases) {
  if (steps.empty()) fail(ErrorKind::domain, "probe needs at least one step");
  IdsProbe out;
  for (const auto& s : steps) out.curves.push_back(rational_ids(s.alpha, s.f, energies, phases));
  auto sup = [](const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  };
  for (std::size_t i = 0; i + 1 < out.curves.size(); ++i)
    out.consecutive.push_back(sup(out.curves[i], out.curves[i + 1]));
  for (const auto& c : out.curves) out.to_last.push_back(sup(c, out.curves.back()));
  out.decreasing = strictly_decreasing(out.consecutive);
  return out;
}

}  // namespace sslab
