#pragma once

// Finite unions of disjoint closed intervals on the real line.

#include <cstddef>
#include <string>
#include <vector>

namespace sslab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Gaps narrower than this are closed when normalizing.
inline constexpr double kMergeTolerance = 1e-9;

/// Canonical form: sorted, lo <= hi, consecutive intervals separated by
/// more than kMergeTolerance. Point intervals are kept (measure 0).
class BandSet {
 public:
  BandSet() = default;

  static BandSet normalize(std::vector<Interval> raw);
  static BandSet single(double lo, double hi) { return normalize({{lo, hi}}); }

  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_.size(); }
  bool empty() const noexcept { return intervals_.empty(); }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }

  double measure() const;
  double lo() const;
  double hi() const;
  bool contains(double x, double tol = 0.0) const;
  /// Distance from x to the set; 0 inside.
  double distance_to(double x) const;

  BandSet unite(const BandSet& other) const;
  BandSet intersect(const BandSet& other) const;
  /// Closure of this minus other. Pieces of length <= kMergeTolerance left
  /// over at shared boundaries are dropped.
  BandSet difference(const BandSet& other) const;
  /// Each interval grown by r on both sides.
  BandSet widened(double r) const;
  /// Complementary open intervals between consecutive bands.
  std::vector<Interval> gaps() const;

  std::string to_string() const;
  friend bool operator==(const BandSet&, const BandSet&) = default;

 private:
  std::vector<Interval> intervals_;
};

double hausdorff_distance(const BandSet& a, const BandSet& b);

}  // namespace sslab
