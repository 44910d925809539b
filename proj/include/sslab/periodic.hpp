#pragma once

// Periodic Schrodinger words: discriminant, band spectrum, rotation number
// and the exact periodic IDS.

#include <cstddef>
#include <vector>

#include "sslab/bandset.hpp"
#include "sslab/word.hpp"

namespace sslab {

/// Longest word band_spectrum accepts.
inline constexpr std::size_t kMaxBandWordLength = 20000;

/// Tr A^{E,w}_n, evaluated by the renormalized product (never through
/// polynomial coefficients). Saturates to +-inf for astronomically large values.
double discriminant(const Word& w, double energy);

/// Monotone band coordinate K(E) in [0, n]: the number of bands below E plus
/// the fractional position inside the current band, measured by
/// arccos of the discriminant. Integer-valued on gaps.
double band_coordinate(const Word& w, double energy);

struct BandSpectrum {
  BandSet set;                  // merged {|D| <= 2}
  std::vector<Interval> bands;  // the n bands before tangency merging
  std::size_t band_count = 0;
  std::vector<double> tangencies;  // touching points of adjacent bands
};

/// Throws solver_resolution if exactly |w| bands cannot be certified and
/// domain if |w| exceeds kMaxBandWordLength.
BandSpectrum band_spectrum(const Word& w);

/// theta(E) in (0, 1/2) with D(E) = 2 cos(2 pi theta); outside_band error
/// when |D(E)| >= 2.
double rotation_number(const Word& w, double energy);

/// band_coordinate(w, E) / |w|.
double periodic_ids(const Word& w, double energy);

}  // namespace sslab
