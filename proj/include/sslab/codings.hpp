#pragma once

// Symbolic codings of torus translations, skew-shifts and interval exchanges,
// factor complexity and the cylinder-measure diagnostics built on it.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sslab {

/// Half-open box prod_i [lo_i, hi_i) in the torus.
struct Rect {
  std::vector<double> lo, hi;
};

struct TorusCoding {
  std::vector<long double> alpha;  // translation vector, one entry per dimension
  std::vector<Rect> cells;
  std::vector<double> labels;      // one per cell
};

/// (x, y) -> (x + alpha, x + y) on T^2.
struct SkewCoding {
  long double alpha = 0.0L;
  std::vector<Rect> cells;
  std::vector<double> labels;
};

/// Interval i of length lambda[i] is moved to position perm[i] (0-based).
struct IetCoding {
  std::vector<int> perm;
  std::vector<long double> lengths;
  std::vector<double> labels;  // one per interval
};

/// i.i.d. symbols with the given probabilities; a control with no geometry.
struct BernoulliCoding {
  std::vector<double> labels;
  std::vector<double> probabilities;
};

enum class CodingKind { torus, skew, iet, bernoulli };

/// Phase point. For Bernoulli codings the seed selects the sample path.
struct Phase {
  std::vector<long double> x;
  std::uint64_t seed = 0;
};

class CodingSystem {
 public:
  static CodingSystem torus(TorusCoding t);
  static CodingSystem skew(SkewCoding s);
  static CodingSystem iet(IetCoding i);
  static CodingSystem bernoulli(BernoulliCoding b);

  /// Rotation by alpha coded by [0, 1-alpha) -> 0, [1-alpha, 1) -> 1.
  static CodingSystem sturmian(long double alpha, double low = 0.0, double high = 1.0);
  /// IET with the reversal permutation and the given lengths, labels 0..r-1.
  static CodingSystem reversal_iet(std::vector<long double> lengths);
  /// Skew-shift with a uniform g x g grid and checkerboard labels {0, 1}.
  static CodingSystem skew_grid(long double alpha, int g);

  CodingKind kind() const noexcept { return kind_; }
  const TorusCoding& as_torus() const;
  const SkewCoding& as_skew() const;
  const IetCoding& as_iet() const;
  const BernoulliCoding& as_bernoulli() const;

  /// Sorted distinct labels; symbols are indices into this table.
  const std::vector<double>& alphabet() const noexcept { return alphabet_; }
  int dimension() const;
  /// One application of the dynamics (and its inverse).
  Phase step(const Phase& p) const;
  Phase step_back(const Phase& p) const;
  /// Symbol index of the cell containing p (meaningless for Bernoulli).
  int symbol_at(const Phase& p) const;

 private:
  CodingKind kind_ = CodingKind::torus;
  TorusCoding torus_;
  SkewCoding skew_;
  IetCoding iet_;
  BernoulliCoding bernoulli_;
  std::vector<double> alphabet_;
  std::vector<int> cell_symbol_;
  std::vector<long double> iet_left_, iet_image_left_;  // IET interval starts before/after

  void finish(const std::vector<double>& labels);
};

/// Symbols s_n for n in [n_lo, n_hi], one byte per symbol (alphabet index).
struct SymbolSequence {
  std::string symbols;
  long n_lo = 0;
  std::size_t boundary_hits = 0;  // orbit points within 1e-13 of a boundary
};

SymbolSequence orbit_coding(const CodingSystem& sys, const Phase& x0, long n_lo, long n_hi);
/// Symbol values (labels) of a sequence, for use as a potential.
std::vector<double> symbol_values(const CodingSystem& sys, const std::string& symbols);

/// Distinct length-n factors of the sample; a lower bound for p(n).
std::size_t complexity(const std::string& seq, std::size_t n);
/// The sample length heuristic N >= 10 n.
inline bool complexity_window_sufficient(std::size_t sample_length, std::size_t n) {
  return sample_length >= 10 * n;
}

struct ComplexityProfile {
  std::vector<std::size_t> n;
  std::vector<std::size_t> p;
  double exponent = 1.0;  // e in p(n) <= C n^e
  double C = 0.0;         // smallest constant over the range
  bool monotone = true;
  bool window_sufficient = true;
  bool affine_exact = false;  // iet: p(n) = (r - 1) n + 1 at every n
};

/// Empirical p(n) over n_values from one orbit of length N starting at x0.
ComplexityProfile complexity_bound_check(const CodingSystem& sys, const std::vector<std::size_t>& n_values,
                                         std::size_t sample_length, const Phase& x0);

/// Natural exponent for the bound: d (torus), 3 (skew), 1 (iet).
double complexity_exponent(const CodingSystem& sys);

/// Cylinders [w]_{0..n-1} with their measures.
struct CylinderMeasures {
  std::vector<std::pair<std::string, double>> cylinders;  // sorted by word
  std::string method;  // "geometric", "exact" or "birkhoff"
  std::size_t iterates = 0;  // Birkhoff orbit length, 0 otherwise
  double measure(const std::string& word) const;
};

struct CylinderOptions {
  std::size_t birkhoff_iterates = 1000000;
  Phase birkhoff_start{};
};

/// Geometric for torus and IET codings, exact for Bernoulli, orbit
/// frequencies for skew codings.
CylinderMeasures cylinder_measures(const CodingSystem& sys, std::size_t n,
                                   const CylinderOptions& opt = {});

/// Convex pieces of the skew-shift n-cylinders in the unit square.
struct SkewCylinderCell {
  std::string word;
  std::vector<std::pair<double, double>> polygon;  // counter-clockwise vertices
  double area = 0.0;
};
std::vector<SkewCylinderCell> skew_cylinder_cells(const CodingSystem& sys, std::size_t n);

struct TransitivityProfile {
  std::size_t n = 0;
  std::size_t window = 0;
  std::vector<double> visited_mass;  // per sampled phase
  double delta_hat = 0.0;            // 10% lower quantile of visited_mass
  double min_mass = 0.0;
  std::string method;
};

/// Mass of the n-cylinders visited by T^m x, 0 <= m <= C n^exponent, over
/// random phases. Refuses (resolution error) when the window exceeds max_window.
TransitivityProfile transitivity_profile(const CodingSystem& sys, std::size_t n, double C,
                                         double exponent, std::size_t phases, std::uint64_t seed,
                                         std::size_t max_window = 50000000,
                                         const CylinderOptions& opt = {});

/// Least number of (2n+1)-cylinders carrying mass > 1 - eps (greedy by mass).
std::size_t complexity_mass_profile(const CodingSystem& sys, std::size_t n, double eps,
                                    const CylinderOptions& opt = {});

/// min over 0 < ||k||_inf <= K of ||<k, alpha>||_{R/Z} ||k||_inf^tau.
double diophantine_margin(const std::vector<long double>& alpha, double tau, int K);

struct HittingReport {
  double gamma = 0.0;
  std::size_t max_time = 0;
};

/// Largest first time, over sampled phases and ball centers, at which the
/// translation orbit enters the sup-norm ball of radius gamma. The same
/// phases and centers (from seed) are used for every gamma. Throws
/// budget_failure when some orbit needs more than max_steps.
HittingReport dense_hitting_time(const CodingSystem& sys, double gamma, std::size_t phases,
                                 std::size_t targets, std::uint64_t seed,
                                 std::size_t max_steps = 100000000);

struct HittingFit {
  std::vector<HittingReport> reports;
  double exponent = 0.0;  // slope of log max_time against log(1/gamma)
};
HittingFit hitting_time_exponent(const CodingSystem& sys, const std::vector<double>& gammas,
                                 std::size_t phases, std::size_t targets, std::uint64_t seed);

/// Term c cos(2 pi (kx x + ky y)) + s sin(2 pi (kx x + ky y)).
struct FourierTerm {
  int kx = 0, ky = 0;
  double c = 0.0, s = 0.0;
};

struct BirkhoffReport {
  std::vector<std::size_t> N;
  std::vector<double> deviation;  // sup over phases of |S_N f - N int f|
  std::vector<double> over_sqrt;  // deviation / sqrt(N)
  std::vector<double> over_N;     // deviation / N
};

BirkhoffReport birkhoff_deviation(const CodingSystem& sys, const std::vector<FourierTerm>& f,
                                  const std::vector<std::size_t>& N_values, std::size_t phases,
                                  std::uint64_t seed);

/// Lengths drawn uniformly on the simplex (sorted spacings of uniforms).
std::vector<long double> random_simplex(int r, std::uint64_t seed);

}  // namespace sslab
