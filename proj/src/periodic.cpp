#include "sslab/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sslab/errors.hpp"
#include "sslab/sl2.hpp"
#include "sslab/sturm.hpp"

namespace sslab {

namespace {

constexpr double kPi = std::numbers::pi;
// Bisection stops once the bracket is this narrow (or stops shrinking).
constexpr double kEdgeTolerance = 1e-13;
// Near a closed gap |D| - 2 is quadratic in E, so edges found through D are
// only good to about sqrt(machine epsilon). Adjacent bands closer than this,
// with |D| indistinguishable from 2 in between, are treated as tangent.
constexpr double kTangencyGap = 1e-7;
constexpr double kTangencyTrace = 1e-10;

void require_nonempty(const Word& w) {
  if (w.empty()) fail(ErrorKind::domain, "periodic word must be nonempty");
}

}  // namespace

double discriminant(const Word& w, double energy) {
  require_nonempty(w);
  return transfer_scaled(w, energy).trace();
}

double band_coordinate(const Word& w, double energy) {
  require_nonempty(w);
  const std::size_t n = w.size();
  // Dirichlet eigenvalues of sites 1..n-1 sit one in each closed gap,
  // so their count below E fixes which band or gap E is in up to one.
  const std::size_t c = sturm_count_below(w.view().first(n - 1), energy);
  const ScaledMat2 mono = transfer_scaled(w, energy);
  const double d = mono.trace();
  if (std::abs(d) <= 2.0) {
    const std::size_t band = c + 1;
    const bool increasing = (n - band) % 2 == 0;
    const double phi = increasing ? std::acos(std::clamp(-d / 2.0, -1.0, 1.0)) / kPi
                                  : std::acos(std::clamp(d / 2.0, -1.0, 1.0)) / kPi;
    return static_cast<double>(c) + phi;
  }
  // In gap j the discriminant has sign (-1)^(n-j).
  const bool positive = d > 0.0;
  const bool even = (n - c) % 2 == 0;
  return static_cast<double>(positive == even ? c : c + 1);
}

namespace {

// inf{E in [lo, hi] : K(E) >= target} (upper) or sup{E : K(E) <= target}.
double bisect_level(const Word& w, double lo, double hi, double target, bool first_at_least) {
  while (hi - lo > kEdgeTolerance * std::max(1.0, std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double k = band_coordinate(w, mid);
    const bool go_left = first_at_least ? (k >= target) : (k > target);
    if (go_left) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

BandSpectrum band_spectrum(const Word& w) {
  require_nonempty(w);
  if (w.size() > kMaxBandWordLength)
    fail(ErrorKind::domain, "word length " + std::to_string(w.size()) + " exceeds the band cap");
  const std::size_t n = w.size();
  const double eps = 1e-6;
  const double lo = w.min() - 2.0 - eps;
  const double hi = w.max() + 2.0 + eps;
  const double k_lo = band_coordinate(w, lo);
  const double k_hi = band_coordinate(w, hi);
  if (k_lo != 0.0 || k_hi != static_cast<double>(n))
    fail(ErrorKind::solver_resolution,
         "band coordinate does not span [0, n] on the a-priori interval for " + w.to_string());

  BandSpectrum out;
  out.bands.resize(n);
  double floor_e = lo;
  for (std::size_t j = 0; j < n; ++j) {
    // Band j+1 is [sup{K <= j}, inf{K >= j+1}].
    const double bottom = bisect_level(w, floor_e, hi, static_cast<double>(j), false);
    const double top = bisect_level(w, bottom, hi, static_cast<double>(j + 1), true);
    out.bands[j] = {bottom, std::max(bottom, top)};
    floor_e = out.bands[j].hi;
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    Interval& a = out.bands[j];
    Interval& b = out.bands[j + 1];
    if (b.lo - a.hi < kTangencyGap &&
        std::abs(discriminant(w, 0.5 * (a.hi + b.lo))) - 2.0 < kTangencyTrace) {
      const double t = 0.5 * (a.hi + b.lo);
      a.hi = std::max(a.lo, t);
      b.lo = std::min(b.hi, t);
      out.tangencies.push_back(t);
    }
    if (b.lo < a.hi)
      fail(ErrorKind::solver_resolution, "band edges out of order for " + w.to_string());
  }
  out.band_count = n;
  out.set = BandSet::normalize(out.bands);
  return out;
}

double rotation_number(const Word& w, double energy) {
  const Mat2 m = transfer(w, energy);
  if (std::abs(m.trace()) >= 2.0)
    fail(ErrorKind::outside_band, "energy " + std::to_string(energy) + " is not inside a band");
  return std::acos(m.trace() / 2.0) / (2.0 * kPi);
}

double periodic_ids(const Word& w, double energy) {
  require_nonempty(w);
  return band_coordinate(w, energy) / static_cast<double>(w.size());
}

}  // namespace sslab
