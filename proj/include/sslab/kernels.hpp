#pragma once

// Data-parallel scans. Each OpenMP kernel has a `_serial` twin with the same
// contract and bit-identical results; tests compare them and bench/ times them.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sslab/periodic.hpp"
#include "sslab/word.hpp"

namespace sslab {

std::vector<BandSpectrum> band_spectra(const std::vector<Word>& words);
std::vector<BandSpectrum> band_spectra_serial(const std::vector<Word>& words);

/// Dirichlet eigenvalue counts (strictly below) of one truncation at many energies.
std::vector<std::size_t> count_scan(std::span<const double> diag, std::span<const double> energies);
std::vector<std::size_t> count_scan_serial(std::span<const double> diag,
                                           std::span<const double> energies);

/// (1/n) log ||A_n|| of a fixed potential sample at many energies.
std::vector<double> lyapunov_scan(std::span<const double> potential,
                                  std::span<const double> energies);
std::vector<double> lyapunov_scan_serial(std::span<const double> potential,
                                         std::span<const double> energies);

/// Distinct length-n factors of a symbol sequence.
std::size_t count_factors(std::string_view seq, std::size_t n);
std::size_t count_factors_serial(std::string_view seq, std::size_t n);

}  // namespace sslab
