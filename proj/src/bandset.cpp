#include "sslab/bandset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sslab/errors.hpp"

namespace sslab {

BandSet BandSet::normalize(std::vector<Interval> raw) {
  for (const auto& iv : raw) {
    if (!(iv.lo <= iv.hi)) fail(ErrorKind::domain, "interval with lo > hi");
  }
  std::sort(raw.begin(), raw.end(),
            [](const Interval& x, const Interval& y) { return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi); });
  BandSet out;
  for (const auto& iv : raw) {
    if (!out.intervals_.empty() && iv.lo - out.intervals_.back().hi < kMergeTolerance) {
      out.intervals_.back().hi = std::max(out.intervals_.back().hi, iv.hi);
    } else {
      out.intervals_.push_back(iv);
    }
  }
  return out;
}

double BandSet::measure() const {
  double m = 0.0;
  for (const auto& iv : intervals_) m += iv.length();
  return m;
}

double BandSet::lo() const {
  if (empty()) fail(ErrorKind::domain, "lo of empty band set");
  return intervals_.front().lo;
}

double BandSet::hi() const {
  if (empty()) fail(ErrorKind::domain, "hi of empty band set");
  return intervals_.back().hi;
}

bool BandSet::contains(double x, double tol) const {
  return distance_to(x) <= tol;
}

double BandSet::distance_to(double x) const {
  if (empty()) return std::numeric_limits<double>::infinity();
  // First interval with hi >= x.
  auto it = std::lower_bound(intervals_.begin(), intervals_.end(), x,
                             [](const Interval& iv, double v) { return iv.hi < v; });
  double d = std::numeric_limits<double>::infinity();
  if (it != intervals_.end()) d = std::max(0.0, it->lo - x);
  if (it != intervals_.begin()) d = std::min(d, x - std::prev(it)->hi);
  return d;
}

BandSet BandSet::unite(const BandSet& other) const {
  std::vector<Interval> all(intervals_);
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return normalize(std::move(all));
}

BandSet BandSet::intersect(const BandSet& other) const {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < size() && j < other.size()) {
    const Interval& x = intervals_[i];
    const Interval& y = other.intervals_[j];
    const double lo = std::max(x.lo, y.lo);
    const double hi = std::min(x.hi, y.hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (x.hi < y.hi) ++i; else ++j;
  }
  return normalize(std::move(out));
}

BandSet BandSet::difference(const BandSet& other) const {
  std::vector<Interval> out;
  std::size_t j = 0;
  for (const auto& x : intervals_) {
    double cur = x.lo;
    while (j < other.size() && other.intervals_[j].hi < x.lo) ++j;
    std::size_t k = j;
    bool consumed = false;
    for (; k < other.size() && other.intervals_[k].lo <= x.hi; ++k) {
      const Interval& y = other.intervals_[k];
      if (y.lo > cur) {
        if (y.lo - cur > kMergeTolerance) out.push_back({cur, y.lo});
      }
      cur = std::max(cur, y.hi);
      if (cur >= x.hi) {
        consumed = true;
        break;
      }
    }
    if (!consumed && x.hi - cur > kMergeTolerance) out.push_back({cur, x.hi});
    // Degenerate intervals not touched by other survive as points.
    if (!consumed && x.lo == x.hi && cur == x.lo && k == j) out.push_back(x);
  }
  return normalize(std::move(out));
}

BandSet BandSet::widened(double r) const {
  if (r < 0.0) fail(ErrorKind::domain, "negative widening");
  std::vector<Interval> out;
  out.reserve(size());
  for (const auto& iv : intervals_) out.push_back({iv.lo - r, iv.hi + r});
  return normalize(std::move(out));
}

std::vector<Interval> BandSet::gaps() const {
  std::vector<Interval> out;
  for (std::size_t i = 1; i < size(); ++i) out.push_back({intervals_[i - 1].hi, intervals_[i].lo});
  return out;
}

std::string BandSet::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '{';
  for (std::size_t i = 0; i < size(); ++i)
    os << (i ? ", " : "") << '[' << intervals_[i].lo << ", " << intervals_[i].hi << ']';
  os << '}';
  return os.str();
}

namespace {

// sup over x in a of dist(x, b). On each interval of a the distance is
// piecewise linear with maxima at the interval ends or at gap midpoints of b.
double directed_hausdorff(const BandSet& a, const BandSet& b) {
  double best = 0.0;
  const auto gaps = b.gaps();
  for (const auto& iv : a.intervals()) {
    best = std::max({best, b.distance_to(iv.lo), b.distance_to(iv.hi)});
    for (const auto& g : gaps) {
      const double mid = 0.5 * (g.lo + g.hi);
      if (mid > iv.lo && mid < iv.hi) best = std::max(best, b.distance_to(mid));
    }
  }
  return best;
}

}  // namespace

double hausdorff_distance(const BandSet& a, const BandSet& b) {
  if (a.empty() || b.empty()) fail(ErrorKind::domain, "Hausdorff distance of an empty set");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace sslab
