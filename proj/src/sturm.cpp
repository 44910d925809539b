#include "sslab/sturm.hpp"

#include <algorithm>
#include <cmath>

namespace sslab {

namespace {

// Returns false when a pivot vanishes.
bool sweep(std::span<const double> diag, double energy, std::size_t& count) {
  count = 0;
  double d = 1.0;
  bool first = true;
  for (double v : diag) {
    d = first ? v - energy : v - energy - 1.0 / d;
    first = false;
    if (d == 0.0 || !std::isfinite(d)) return false;
    if (d < 0.0) ++count;
  }
  return true;
}

}  // namespace

std::size_t sturm_count_below(std::span<const double> diag, double energy, bool* retried) {
  if (retried) *retried = false;
  std::size_t count = 0;
  if (sweep(diag, energy, count)) return count;
  if (retried) *retried = true;
  double e = energy;
  for (int attempt = 0; attempt < 8; ++attempt) {
    e -= 1e-12 * (1 << attempt) * std::max(1.0, std::abs(energy));
    if (sweep(diag, e, count)) return count;
  }
  // A zero pivot at every nearby shift is not reachable for finite input;
  // take the last count rather than looping forever.
  return count;
}

}  // namespace sslab
