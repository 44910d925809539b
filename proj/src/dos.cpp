#include "sslab/dos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sslab/codings.hpp"
#include "sslab/errors.hpp"
#include "sslab/kernels.hpp"
#include "sslab/rng.hpp"
#include "sslab/sl2.hpp"
#include "sslab/sturm.hpp"

namespace sslab {

std::size_t eigenvalue_count(std::span<const double> v, double energy, bool* retried) {
  if (v.empty()) fail(ErrorKind::domain, "eigenvalue count needs N >= 1");
  return sturm_count_below(v, energy, retried);
}

WindowSampler periodic_sampler(const Word& w) {
  if (w.empty()) fail(ErrorKind::domain, "periodic sampler needs a word");
  return [w](std::size_t phase, std::size_t N) {
    std::vector<double> out(N);
    for (std::size_t j = 0; j < N; ++j) out[j] = w[(j + phase) % w.size()];
    return out;
  };
}

WindowSampler coding_sampler(const CodingSystem& sys, std::uint64_t seed) {
  return [sys, seed](std::size_t phase, std::size_t N) {
    Rng rng(mix64(seed + phase));
    Phase p;
    p.x.assign(static_cast<std::size_t>(sys.dimension()), 0.0L);
    for (auto& x : p.x) x = static_cast<long double>(rng.uniform());
    p.seed = rng.next();
    return symbol_values(sys, orbit_coding(sys, p, 0, static_cast<long>(N) - 1).symbols);
  };
}

std::vector<double> default_energy_grid(double vmin, double vmax, std::size_t points) {
  return EnergyGrid::with_points(vmin - 2.5, vmax + 2.5, points).points();
}

namespace {

template <class Scan>
IdsSample ids_impl(const WindowSampler& sampler, std::size_t N, std::span<const double> energies,
                   std::size_t phases, Scan scan) {
  if (N < 1 || phases < 1) fail(ErrorKind::domain, "IDS needs N >= 1 and at least one phase");
  if (!std::is_sorted(energies.begin(), energies.end()))
    fail(ErrorKind::domain, "IDS energies must be increasing");
  IdsSample out;
  out.energies.assign(energies.begin(), energies.end());
  out.N = N;
  out.phases = phases;
  std::vector<std::size_t> total(energies.size(), 0);
  for (std::size_t p = 0; p < phases; ++p) {
    const auto v = sampler(p, N);
    const auto counts = scan(v, energies);
    for (std::size_t i = 0; i < counts.size(); ++i) total[i] += counts[i];
  }
  out.k.resize(energies.size());
  const double denom = static_cast<double>(N) * static_cast<double>(phases);
  for (std::size_t i = 0; i < total.size(); ++i) out.k[i] = static_cast<double>(total[i]) / denom;
  return out;
}

}  // namespace

IdsSample ids_curve(const WindowSampler& sampler, std::size_t N, std::span<const double> energies,
                    std::size_t phases) {
  return ids_impl(sampler, N, energies, phases,
                  [](const std::vector<double>& v, std::span<const double> e) { return count_scan(v, e); });
}

IdsSample ids_curve_serial(const WindowSampler& sampler, std::size_t N,
                           std::span<const double> energies, std::size_t phases) {
  return ids_impl(sampler, N, energies, phases, [](const std::vector<double>& v, std::span<const double> e) {
    return count_scan_serial(v, e);
  });
}

double max_jump(const IdsSample& ids) {
  double m = 0.0;
  for (std::size_t i = 1; i < ids.k.size(); ++i) m = std::max(m, ids.k[i] - ids.k[i - 1]);
  return m;
}

namespace {

// Antiderivative of log|x - E| in x.
double log_antiderivative(double x, double energy) {
  const double t = x - energy;
  return t == 0.0 ? 0.0 : t * std::log(std::abs(t)) - t;
}

double log_abs(double x) { return x == 0.0 ? -1e300 : std::log(std::abs(x)); }

}  // namespace

double log_potential(const IdsSample& ids, double energy) {
  const auto& e = ids.energies;
  const auto& k = ids.k;
  if (e.size() < 2) fail(ErrorKind::domain, "IDS sample too small");
  // Mass outside the grid sits on its end points.
  double total = k.front() * log_abs(energy - e.front()) + (1.0 - k.back()) * log_abs(energy - e.back());
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    const double m = k[i + 1] - k[i];
    if (m == 0.0) continue;
    const double h = e[i + 1] - e[i];
    total += m / h * (log_antiderivative(e[i + 1], energy) - log_antiderivative(e[i], energy));
  }
  return total;
}

ThoulessReport thouless_check(const Word& w, std::span<const double> energies, const ThoulessOptions& opt) {
  if (w.empty()) fail(ErrorKind::domain, "Thouless check needs a word");
  const auto grid = default_energy_grid(w.min(), w.max(), opt.grid_points);
  const IdsSample ids = ids_curve(periodic_sampler(w), opt.N, grid, opt.phases);
  ThoulessReport rep;
  rep.energies.assign(energies.begin(), energies.end());
  for (double E : energies) {
    const double L = lyapunov_estimate(w, E, opt.lyapunov_length);
    const double I = log_potential(ids, E);
    rep.lyapunov.push_back(L);
    rep.integral.push_back(I);
    rep.max_error = std::max(rep.max_error, std::abs(L - I));
  }
  return rep;
}

KotaniReport kotani_diagnostic(std::span<const double> sample, std::span<const double> energies,
                               const BandSet& spectrum, double delta) {
  std::vector<double> inside;
  for (double E : energies)
    if (spectrum.contains(E)) inside.push_back(E);
  KotaniReport rep;
  rep.in_spectrum = inside.size();
  if (inside.empty()) return rep;
  const auto L = lyapunov_scan(sample, inside);
  rep.small = static_cast<std::size_t>(std::count_if(L.begin(), L.end(), [&](double x) { return x < delta; }));
  rep.fraction = static_cast<double>(rep.small) / static_cast<double>(rep.in_spectrum);
  return rep;
}

double poly_bound_objective(std::span<const double> v, double energy, std::size_t theta_points) {
  if (v.size() < 3 || v.size() % 2 == 0) fail(ErrorKind::domain, "window must hold v_{-N}..v_N");
  if (theta_points < 8) fail(ErrorKind::domain, "need at least 8 theta points");
  const long N = static_cast<long>(v.size() / 2);
  const std::size_t len = v.size();
  // Fundamental solutions with (u(0), u(1)) = (1, 0) and (0, 1), weighted by 1/(1+|n|).
  std::vector<long double> a(len), b(len);
  auto at = [N](long n) { return static_cast<std::size_t>(n + N); };
  a[at(0)] = 1.0L;
  b[at(0)] = 0.0L;
  a[at(1)] = 0.0L;
  b[at(1)] = 1.0L;
  for (long n = 1; n < N; ++n) {
    const long double c = static_cast<long double>(energy) - v[at(n)];
    a[at(n + 1)] = c * a[at(n)] - a[at(n - 1)];
    b[at(n + 1)] = c * b[at(n)] - b[at(n - 1)];
  }
  for (long n = 0; n > -N; --n) {
    const long double c = static_cast<long double>(energy) - v[at(n)];
    a[at(n - 1)] = c * a[at(n)] - a[at(n + 1)];
    b[at(n - 1)] = c * b[at(n)] - b[at(n + 1)];
  }
  for (long n = -N; n <= N; ++n) {
    const long double wgt = 1.0L / (1.0L + static_cast<long double>(std::labs(n)));
    a[at(n)] *= wgt;
    b[at(n)] *= wgt;
  }
  auto F = [&](double theta) {
    const long double c = std::cos(static_cast<long double>(theta));
    const long double s = std::sin(static_cast<long double>(theta));
    long double m = 0.0L;
    for (std::size_t i = 0; i < len; ++i) m = std::max(m, std::abs(a[i] * c + b[i] * s));
    return static_cast<double>(m);
  };
  const double pi = std::acos(-1.0);
  const double h = pi / static_cast<double>(theta_points);
  std::size_t best = 0;
  double best_val = F(0.0);
  for (std::size_t i = 1; i < theta_points; ++i) {
    const double val = F(h * static_cast<double>(i));
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  // Golden-section refinement in the two cells around the grid minimum.
  double lo = h * (static_cast<double>(best) - 1.0), hi = h * (static_cast<double>(best) + 1.0);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = F(x1), f2 = F(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = F(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = F(x2);
    }
  }
  return std::min({best_val, f1, f2});
}

namespace {

struct EnergyCell {
  double e, lo, hi;
  std::size_t interval;
};

std::vector<EnergyCell> cells_over(const BandSet& lambda, double step) {
  std::vector<EnergyCell> cells;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const Interval& iv = lambda[i];
    const double len = iv.length();
    const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step)));
    const double h = len / static_cast<double>(count);
    for (std::size_t j = 0; j < count; ++j) {
      const double lo = iv.lo + h * static_cast<double>(j);
      const double hi = j + 1 == count ? iv.hi : lo + h;
      cells.push_back({0.5 * (lo + hi), lo, hi, i});
    }
  }
  return cells;
}

PolyBoundedSet assemble(std::span<const double> v, double gamma, const BandSet& lambda, double step,
                        std::size_t theta_points, const std::vector<EnergyCell>& cells,
                        const std::vector<char>& accepted) {
  PolyBoundedSet out;
  out.gamma = gamma;
  out.N = v.size() / 2;
  out.lambda = lambda;
  out.grid_step = step;
  out.theta_points = theta_points;
  out.energies_tested = cells.size();
  std::vector<Interval> pieces;
  std::size_t isolated = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!accepted[i]) continue;
    ++out.energies_accepted;
    pieces.push_back({cells[i].lo, cells[i].hi});
    const bool left = i > 0 && cells[i - 1].interval == cells[i].interval && accepted[i - 1];
    const bool right = i + 1 < cells.size() && cells[i + 1].interval == cells[i].interval && accepted[i + 1];
    const bool alone_in_interval = (i == 0 || cells[i - 1].interval != cells[i].interval) &&
                                   (i + 1 == cells.size() || cells[i + 1].interval != cells[i].interval);
    if (!left && !right && !alone_in_interval) ++isolated;
  }
  if (out.energies_accepted >= 20 && 2 * isolated > out.energies_accepted)
    fail(ErrorKind::refinement_needed,
         "most accepted energies are isolated grid points; decrease the grid step");
  out.estimate = BandSet::normalize(std::move(pieces)).intersect(lambda);
  out.measure = out.estimate.measure();
  return out;
}

void check_poly_args(std::span<const double> v, double gamma, const BandSet& lambda, double step) {
  if (v.size() < 3 || v.size() % 2 == 0) fail(ErrorKind::domain, "window must hold v_{-N}..v_N");
  if (!(gamma >= 1.0))
    fail(ErrorKind::domain, "gamma < 1 admits no normalized solution at n = 0, 1");
  if (lambda.empty()) fail(ErrorKind::domain, "empty energy set");
  if (!(step > 0.0)) fail(ErrorKind::domain, "grid step must be positive");
}

}  // namespace

PolyBoundedSet poly_bounded_energy_set(std::span<const double> v, double gamma, const BandSet& lambda,
                                       double grid_step, std::size_t theta_points) {
  check_poly_args(v, gamma, lambda, grid_step);
  const auto cells = cells_over(lambda, grid_step);
  std::vector<char> accepted(cells.size(), 0);
  const auto n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i)
    accepted[i] = poly_bound_objective(v, cells[i].e, theta_points) <= gamma;
  return assemble(v, gamma, lambda, grid_step, theta_points, cells, accepted);
}

PolyBoundedSet poly_bounded_energy_set_serial(std::span<const double> v, double gamma,
                                              const BandSet& lambda, double grid_step,
                                              std::size_t theta_points) {
  check_poly_args(v, gamma, lambda, grid_step);
  const auto cells = cells_over(lambda, grid_step);
  std::vector<char> accepted(cells.size(), 0);
  for (std::size_t i = 0; i < cells.size(); ++i)
    accepted[i] = poly_bound_objective(v, cells[i].e, theta_points) <= gamma;
  return assemble(v, gamma, lambda, grid_step, theta_points, cells, accepted);
}

double singularity_indicator(const IdsSample& ids, double mass) {
  if (!(mass > 0.0 && mass < 1.0)) fail(ErrorKind::domain, "mass must lie in (0, 1)");
  const auto& e = ids.energies;
  const auto& k = ids.k;
  if (e.size() < 2) fail(ErrorKind::domain, "IDS sample too small");
  struct Cell {
    double m, h;
  };
  std::vector<Cell> cells;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    cells.push_back({k[i + 1] - k[i], e[i + 1] - e[i]});
    total += cells.back().m;
  }
  if (!(total > 0.0)) fail(ErrorKind::domain, "IDS sample carries no mass");
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) { return a.m * b.h > b.m * a.h; });
  const double target = mass * total;
  double acc = 0.0, length = 0.0;
  for (const auto& c : cells) {
    if (acc + c.m >= target) {
      length += c.m > 0.0 ? c.h * (target - acc) / c.m : 0.0;
      return length;
    }
    acc += c.m;
    length += c.h;
  }
  return length;
}

}  // namespace sslab
