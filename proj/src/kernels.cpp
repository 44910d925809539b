#include "sslab/kernels.hpp"

#include <unordered_set>

#include "sslab/errors.hpp"
#include "sslab/sl2.hpp"
#include "sslab/sturm.hpp"
#include "omp_util.hpp"

namespace sslab {

using detail::ExceptionSlot;

std::vector<BandSpectrum> band_spectra(const std::vector<Word>& words) {
  std::vector<BandSpectrum> out(words.size());
  ExceptionSlot slot;
  const auto n = static_cast<long>(words.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) slot.run([&] { out[i] = band_spectrum(words[i]); });
  slot.rethrow();
  return out;
}

std::vector<BandSpectrum> band_spectra_serial(const std::vector<Word>& words) {
  std::vector<BandSpectrum> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(band_spectrum(w));
  return out;
}

std::vector<std::size_t> count_scan(std::span<const double> diag,
                                    std::span<const double> energies) {
  std::vector<std::size_t> out(energies.size());
  const auto n = static_cast<long>(energies.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = sturm_count_below(diag, energies[i]);
  return out;
}

std::vector<std::size_t> count_scan_serial(std::span<const double> diag,
                                           std::span<const double> energies) {
  std::vector<std::size_t> out;
  out.reserve(energies.size());
  for (double e : energies) out.push_back(sturm_count_below(diag, e));
  return out;
}

namespace {

double sample_lyapunov(std::span<const double> potential, double energy) {
  TransferAccumulator acc;
  for (double v : potential) acc.push_step(energy, v);
  return acc.value().log_norm() / static_cast<double>(potential.size());
}

}  // namespace

std::vector<double> lyapunov_scan(std::span<const double> potential,
                                  std::span<const double> energies) {
  if (potential.empty()) fail(ErrorKind::domain, "lyapunov scan over empty potential");
  std::vector<double> out(energies.size());
  const auto n = static_cast<long>(energies.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = sample_lyapunov(potential, energies[i]);
  return out;
}

std::vector<double> lyapunov_scan_serial(std::span<const double> potential,
                                         std::span<const double> energies) {
  if (potential.empty()) fail(ErrorKind::domain, "lyapunov scan over empty potential");
  std::vector<double> out;
  out.reserve(energies.size());
  for (double e : energies) out.push_back(sample_lyapunov(potential, e));
  return out;
}

std::size_t count_factors(std::string_view seq, std::size_t n) {
  if (n == 0) return 1;
  if (seq.size() < n) return 0;
  const auto starts = static_cast<long>(seq.size() - n + 1);
  std::unordered_set<std::string_view> merged;
#pragma omp parallel
  {
    std::unordered_set<std::string_view> local;
#pragma omp for schedule(static) nowait
    for (long i = 0; i < starts; ++i) local.insert(seq.substr(static_cast<std::size_t>(i), n));
#pragma omp critical(sslab_factor_merge)
    merged.insert(local.begin(), local.end());
  }
  return merged.size();
}

std::size_t count_factors_serial(std::string_view seq, std::size_t n) {
  if (n == 0) return 1;
  if (seq.size() < n) return 0;
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) seen.insert(seq.substr(i, n));
  return seen.size();
}

}  // namespace sslab
