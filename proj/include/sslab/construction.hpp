#pragma once

// Iterative construction of a minimal aperiodic subshift whose spectrum keeps
// at least half of the first-stage measure: stages, power selection,
// budget ledger, measure certificate and the finite window checks.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sslab/bandset.hpp"
#include "sslab/word.hpp"

namespace sslab {

/// Budget bookkeeping for the step that produced a stage.
struct StageLedger {
  double budget = 0.0;             // allowed measure(Sigma_prev \ Sigma_this)
  std::vector<double> residuals;   // per parent word, as certified by choose_power
  double measured_loss = 0.0;      // measure(Sigma_prev \ Sigma_this), recomputed
  bool satisfied() const { return measured_loss < budget; }
  friend bool operator==(const StageLedger&, const StageLedger&) = default;
};

struct Stage {
  int level = 1;
  std::vector<double> alphabet;  // sorted distinct symbol values
  std::vector<Word> words;
  // For level >= 2: word i is W_prev . (prev word parent[i].first)^parent[i].second,
  // and powers[k] is the power chosen for prev word k.
  std::vector<std::pair<std::size_t, int>> parents;
  std::vector<int> powers;
  Word W;
  std::vector<BandSet> word_spectra;
  BandSet spectrum;
  double spectrum_measure = 0.0;
  double base_measure = 0.0;  // measure of the level-1 spectrum
  StageLedger ledger;         // empty for level 1

  friend bool operator==(const Stage&, const Stage&) = default;
};

/// Level-1 stage. Requires >= 2 words, >= 2 alphabet symbols and a pair of
/// words that do not commute (otherwise every concatenation is periodic).
Stage initial_stage(const std::vector<Word>& seed_words);

inline constexpr int kDefaultPowerCap = 64;

struct PowerChoice {
  int m = 0;
  double residual = 0.0;
  std::vector<double> history;  // residual after m = 1, 2, ...
};

/// Smallest m >= 2 with measure(Sigma(w) \ U_{k<=m} Sigma(v w^k)) < budget.
/// Throws BudgetError carrying the best residual when m_cap is reached.
PowerChoice choose_power(const Word& v, const Word& w, double budget, int m_cap = kDefaultPowerCap);

/// The geometric schedule measure(Sigma_1) 2^-(1+level).
double geometric_budget(const Stage& s);

/// Next level with powers chosen per word, budget split equally, and the
/// loss re-measured afterwards. Throws BudgetError or stage_too_deep.
Stage next_stage(const Stage& s, double budget, int m_cap = kDefaultPowerCap);

/// Stages 1..levels with the geometric schedule.
std::vector<Stage> build_stages(const std::vector<Word>& seed_words, int levels,
                                int m_cap = kDefaultPowerCap);

/// (((Sigma_1 \ (Sigma_1 \ Sigma_2)) \ (Sigma_2 \ Sigma_3)) ...) over the given stages.
BandSet certified_set(const std::vector<Stage>& stages);
double lower_bound_certificate(const std::vector<Stage>& stages);

/// True when w splits into a concatenation of the given pieces.
bool is_concatenation(const Word& w, const std::vector<Word>& pieces);

struct MinimalityReport {
  bool structure_ok = true;       // words and W have the prescribed shape
  std::vector<std::string> structure_errors;
  std::size_t max_gap = 0;        // largest distance between W_cur occurrences
  std::size_t gap_bound = 0;      // max_k |W_cur w_k^{m_k}|
  std::size_t factor_length = 0;  // |W_prev|
  std::size_t factors_checked = 0;
  std::vector<Word> missing_factors;
  bool ok() const { return structure_ok && max_gap <= gap_bound && missing_factors.empty(); }
};

/// Finite window checks for three consecutive stages (next, cur, prev).
MinimalityReport minimality_window_check(const Stage& next, const Stage& cur, const Stage& prev);

struct AperiodicityWitness {
  bool found = false;
  Word factor;
  double ext_a = 0.0, ext_b = 0.0;
  std::size_t max_length_searched = 0;
};

/// Looks for a factor of length >= l0 with two distinct right extensions among
/// the stage words and their pairwise concatenations. Not finding one is
/// inconclusive, not a proof of periodicity.
AperiodicityWitness aperiodicity_check(const Stage& s, std::size_t l0);

std::string stage_to_json(const Stage& s);
/// Parses and re-validates (shape, powers >= 2, W, recomputed spectra).
Stage stage_from_json(const std::string& text);
void persist_stage(const Stage& s, const std::string& path);
Stage load_stage(const std::string& path);

}  // namespace sslab
