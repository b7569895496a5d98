#pragma once

// Eigenvalue counting for reduced 1-D operators on finite truncations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "warpspec/errors.hpp"
#include "warpspec/forms.hpp"
#include "warpspec/geometry.hpp"
#include "warpspec/reduction.hpp"

namespace warpspec {

enum class Boundary { Dirichlet, Neumann };

/// Uniform: finite differences in t. LogMapped: finite differences in
/// x = log t for v = t^{-1/2} u, giving the pencil
///   -v'' + (1/4 + t^2 Q) v = lambda t^2 v.
enum class Coordinate { Uniform, LogMapped };

inline const char* to_string(Boundary b) { return b == Boundary::Dirichlet ? "dirichlet" : "neumann"; }
inline const char* to_string(Coordinate c) { return c == Coordinate::Uniform ? "uniform" : "log-mapped"; }

/// Symmetric tridiagonal pencil (K, diag(mass)); mass is all ones in the
/// uniform coordinate.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> offdiag;
  std::vector<double> mass;
  double h_step = 0.0;
  std::pair<Boundary, Boundary> bc{Boundary::Dirichlet, Boundary::Dirichlet};
  Coordinate coordinate = Coordinate::Uniform;
  std::vector<double> nodes;  // t-positions of the unknowns

  [[nodiscard]] std::size_t size() const { return diag.size(); }

  void validate() const {
    if (diag.empty()) throw DomainError("tridiagonal matrix is empty");
    if (offdiag.size() + 1 != diag.size()) throw DomainError("tridiagonal: offdiag must have length N-1");
    if (!mass.empty() && mass.size() != diag.size()) throw DomainError("tridiagonal: mass length mismatch");
    for (double m : mass)
      if (!(m > 0.0)) throw DomainError("tridiagonal: mass must be positive");
  }

  [[nodiscard]] double mass_at(std::size_t i) const { return mass.empty() ? 1.0 : mass[i]; }

  /// Plain symmetric tridiagonal (identity mass).
  static Tridiagonal symmetric(std::vector<double> d, std::vector<double> e) {
    Tridiagonal t;
    t.diag = std::move(d);
    t.offdiag = std::move(e);
    t.validate();
    return t;
  }
};

/// Second-order finite differences for -u'' + Q u on [a, L] with N nodes
/// counting both endpoints. Dirichlet ends drop the boundary node; Neumann
/// ends keep it with a mirrored ghost node, symmetrized.
inline Tridiagonal discretize(const ReducedOperator& Q, double a, double L, std::size_t N,
                              std::pair<Boundary, Boundary> bc = {Boundary::Dirichlet, Boundary::Dirichlet},
                              Coordinate coord = Coordinate::Uniform) {
  if (!(a < L)) throw DomainError("discretize requires a < L");
  if (N < 2) throw DomainError("discretize requires N >= 2");
  if (coord == Coordinate::LogMapped) {
    if (!(a > 0.0)) throw DomainError("log-mapped discretization requires a > 0");
    if (bc.first != Boundary::Dirichlet || bc.second != Boundary::Dirichlet)
      throw DomainError("log-mapped discretization supports Dirichlet ends only");
  }
  const std::size_t first = bc.first == Boundary::Dirichlet ? 1 : 0;
  const std::size_t last = bc.second == Boundary::Dirichlet ? N - 2 : N - 1;
  if (first > last) throw DomainError("discretization has no unknowns");
  for (double t : {a, L})
    if (!std::isfinite(Q(t))) throw DomainError("reduced potential is singular at t = " + std::to_string(t));

  Tridiagonal T;
  T.bc = bc;
  T.coordinate = coord;
  const double x0 = coord == Coordinate::LogMapped ? std::log(a) : a;
  const double x1 = coord == Coordinate::LogMapped ? std::log(L) : L;
  const double h = (x1 - x0) / static_cast<double>(N - 1);
  T.h_step = h;
  const double ih2 = 1.0 / (h * h);
  const std::size_t m = last - first + 1;
  T.diag.resize(m);
  T.offdiag.assign(m - 1, -ih2);
  T.nodes.resize(m);
  if (coord == Coordinate::LogMapped) T.mass.resize(m);

  for (std::size_t i = first; i <= last; ++i) {
    const double x = (i == 0) ? x0 : (i + 1 == N ? x1 : x0 + h * static_cast<double>(i));
    double t = coord == Coordinate::LogMapped ? std::exp(x) : x;
    if (i == 0) t = a;
    if (i + 1 == N) t = L;
    const double q = Q(t);
    if (!std::isfinite(q))
      throw DomainError("reduced potential is singular at t = " + std::to_string(t));
    const std::size_t k = i - first;
    T.nodes[k] = t;
    if (coord == Coordinate::LogMapped) {
      T.diag[k] = 2.0 * ih2 + 0.25 + t * t * q;
      T.mass[k] = t * t;
    } else {
      T.diag[k] = 2.0 * ih2 + q;
    }
  }
  const double edge = -std::sqrt(2.0) * ih2;
  if (bc.first == Boundary::Neumann && m > 1) T.offdiag.front() = edge;
  if (bc.second == Boundary::Neumann && m > 1) T.offdiag.back() = edge;
  if (bc.first == Boundary::Neumann && bc.second == Boundary::Neumann && m == 2)
    T.offdiag.front() = -2.0 * ih2;
  return T;
}

/// Number of eigenvalues of the pencil strictly below E: the count of
/// negative pivots in the LDL^T factorization of K - E*M.
inline std::size_t count_below(const Tridiagonal& T, double E) {
  T.validate();
  double emax = 0.0;
  for (double e : T.offdiag) emax = std::max(emax, e * e);
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, emax);
  std::size_t count = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < T.size(); ++i) {
    d = T.diag[i] - E * T.mass_at(i) - (i == 0 ? 0.0 : T.offdiag[i - 1] * T.offdiag[i - 1] / d);
    if (std::abs(d) < pivmin) d = (d < 0.0) ? -pivmin : pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

/// Interval containing the whole spectrum (Gershgorin on M^{-1/2} K M^{-1/2}).
inline std::pair<double, double> gershgorin_bounds(const Tridiagonal& T) {
  T.validate();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const std::size_t n = T.size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(T.offdiag[i - 1]) / std::sqrt(T.mass_at(i) * T.mass_at(i - 1));
    if (i + 1 < n) r += std::abs(T.offdiag[i]) / std::sqrt(T.mass_at(i) * T.mass_at(i + 1));
    const double c = T.diag[i] / T.mass_at(i);
    lo = std::min(lo, c - r);
    hi = std::max(hi, c + r);
  }
  return {lo, hi};
}

/// k-th smallest eigenvalue (0-based) by bisection on count_below.
inline double eigenvalue_by_bisection(const Tridiagonal& T, std::size_t k) {
  if (k >= T.size()) throw DomainError("eigenvalue index out of range");
  auto [lo, hi] = gershgorin_bounds(T);
  const double span = std::max({std::abs(lo), std::abs(hi), 1.0});
  lo -= 1e-12 * span;
  hi += 1e-12 * span;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (count_below(T, mid) > k) hi = mid;
    else lo = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

/// The k smallest eigenvalues, ascending.
inline std::vector<double> smallest_eigenvalues(const Tridiagonal& T, std::size_t k) {
  k = std::min(k, T.size());
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = eigenvalue_by_bisection(T, i);
  return out;
}

/// All eigenvalues strictly below E, ascending.
inline std::vector<double> eigenvalues_below(const Tridiagonal& T, double E) {
  return smallest_eigenvalues(T, count_below(T, E));
}

enum class SweepClass { Stabilized, Growing, Inconclusive };

inline const char* to_string(SweepClass c) {
  switch (c) {
    case SweepClass::Stabilized: return "Stabilized";
    case SweepClass::Growing: return "Growing";
    default: return "Inconclusive";
  }
}

struct CountReport {
  std::vector<double> L_values;
  std::vector<std::size_t> nodes;   // grid nodes used per truncation
  std::vector<std::size_t> counts;
  double threshold = 0.0;
  double epsilon_guard = 0.0;
  SweepClass classification = SweepClass::Inconclusive;
  std::string classification_rule = "heuristic: Stabilized = last 3 equal, Growing = strictly increasing";
};

/// Stabilized if the last three counts agree, Growing if every step increases.
inline SweepClass classify_counts(const std::vector<std::size_t>& c) {
  if (c.size() >= 3 && c[c.size() - 1] == c[c.size() - 2] && c[c.size() - 2] == c[c.size() - 3])
    return SweepClass::Stabilized;
  if (c.size() >= 2) {
    bool rising = true;
    for (std::size_t i = 1; i < c.size(); ++i) rising = rising && c[i] > c[i - 1];
    if (rising) return SweepClass::Growing;
  }
  return SweepClass::Inconclusive;
}

struct SweepOptions {
  std::size_t points_per_decade = 2000;
  double guard_factor = 1e-10;
  bool parallel = true;
};

/// Dirichlet counts below -eps of the threshold-shifted reduced operator on
/// [a, L] for each L, discretized on the log-mapped coordinate.
inline CountReport truncation_sweep(const ModelGeometry& geom, const RadialPotential& V, double a,
                                    const std::vector<double>& L_values, const SweepOptions& opt = {}) {
  if (L_values.empty()) throw ConfigError("truncation sweep needs at least one L");
  if (opt.points_per_decade < 1) throw ConfigError("points per decade must be positive");
  if (!(a >= domain_start(geom)) || !(a > 0.0)) throw DomainError("sweep start lies outside the domain");
  for (std::size_t i = 0; i < L_values.size(); ++i) {
    if (!(L_values[i] > a)) throw DomainError("every L must exceed a");
    if (i > 0 && !(L_values[i] > L_values[i - 1])) throw ConfigError("L values must increase");
  }
  CountReport rep;
  rep.L_values = L_values;
  rep.threshold = essential_threshold(geom);
  const ReducedOperator Q = shifted(liouville_potential(geom, V), rep.threshold);

  auto nodes_for = [&](double L) {
    const double decades = std::log10(L / a);
    return std::max<std::size_t>(
        3, static_cast<std::size_t>(std::ceil(decades * static_cast<double>(opt.points_per_decade))) + 1);
  };
  auto run_one = [&](double L) -> std::pair<std::size_t, double> {
    const Tridiagonal T = discretize(Q, a, L, nodes_for(L), {Boundary::Dirichlet, Boundary::Dirichlet},
                                     Coordinate::LogMapped);
    double scale = 1.0;
    for (std::size_t i = 0; i < T.size(); ++i) scale = std::max(scale, std::abs(Q(T.nodes[i])));
    const double eps = opt.guard_factor * scale;
    return {count_below(T, -eps), eps};
  };

  std::vector<std::pair<std::size_t, double>> results(L_values.size());
  if (opt.parallel) {
    std::vector<std::future<std::pair<std::size_t, double>>> jobs;
    jobs.reserve(L_values.size());
    for (double L : L_values) jobs.push_back(std::async(std::launch::async, run_one, L));
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < L_values.size(); ++i) results[i] = run_one(L_values[i]);
  }
  for (std::size_t i = 0; i < L_values.size(); ++i) {
    rep.nodes.push_back(nodes_for(L_values[i]));
    rep.counts.push_back(results[i].first);
    rep.epsilon_guard = std::max(rep.epsilon_guard, results[i].second);
  }
  rep.classification = classify_counts(rep.counts);
  return rep;
}

struct BracketReport {
  double split = 0.0;                // split point snapped to the grid
  std::vector<double> merged;        // sorted Neumann eigenvalues of both halves
  std::vector<double> full;          // Neumann eigenvalues on [a, L] below E
  double max_violation = 0.0;        // max_i (merged_i - full_i), floored at 0
};

/// Neumann bracketing: eigenvalues of the two Neumann halves, merged, lie
/// below the full-interval Neumann eigenvalues index by index.
inline BracketReport neumann_bracket(const ReducedOperator& Q, double a, double L, double c, double E,
                                     std::size_t N) {
  if (!(a < c && c < L)) throw DomainError("bracketing requires a < c < L");
  if (N < 5) throw DomainError("bracketing requires N >= 5");
  const double h = (L - a) / static_cast<double>(N - 1);
  auto j = static_cast<std::size_t>(std::llround((c - a) / h));
  j = std::clamp<std::size_t>(j, 1, N - 2);
  const double cj = a + h * static_cast<double>(j);
  constexpr std::pair<Boundary, Boundary> nn{Boundary::Neumann, Boundary::Neumann};

  BracketReport rep;
  rep.split = cj;
  const Tridiagonal full = discretize(Q, a, L, N, nn);
  const Tridiagonal left = discretize(Q, a, cj, j + 1, nn);
  const Tridiagonal right = discretize(Q, cj, L, N - j, nn);
  rep.full = eigenvalues_below(full, E);
  const std::size_t k = rep.full.size();
  rep.merged = smallest_eigenvalues(left, k);
  const std::vector<double> r = smallest_eigenvalues(right, k);
  rep.merged.insert(rep.merged.end(), r.begin(), r.end());
  std::sort(rep.merged.begin(), rep.merged.end());
  rep.merged.resize(std::min(k, rep.merged.size()));
  for (std::size_t i = 0; i < rep.merged.size(); ++i)
    rep.max_violation = std::max(rep.max_violation, rep.merged[i] - rep.full[i]);
  return rep;
}

struct MinmaxReport {
  std::size_t lower_bound = 0;   // members with negative form value
  std::size_t sturm_count = 0;   // Dirichlet count below 0 at the final grid
  std::size_t nodes = 0;
  Coordinate coordinate = Coordinate::LogMapped;
};

/// Counts witnesses with negative form and checks the Dirichlet Sturm count on
/// [a, L] is at least that large, doubling the grid until it is.
inline MinmaxReport minmax_lower_bound(const std::vector<WitnessMember>& family, const ReducedOperator& Q,
                                       double a, double L, std::size_t N, std::size_t max_nodes = 1u << 22,
                                       Coordinate coord = Coordinate::LogMapped) {
  MinmaxReport rep;
  rep.coordinate = coord;
  for (const WitnessMember& w : family) {
    if (w.lo() < a || w.hi() > L) throw DomainError("witness support lies outside [a, L]");
    if (w.form_value < 0.0) ++rep.lower_bound;
  }
  if (rep.lower_bound == 0) return rep;
  std::size_t n = std::max<std::size_t>(N, 3);
  while (true) {
    const Tridiagonal T = discretize(Q, a, L, n, {Boundary::Dirichlet, Boundary::Dirichlet}, coord);
    rep.sturm_count = count_below(T, 0.0);
    rep.nodes = n;
    if (rep.sturm_count >= rep.lower_bound) return rep;
    n = 2 * n - 1;
    if (n > max_nodes)
      throw RefinementCapError("min-max check: Sturm count " + std::to_string(rep.sturm_count) +
                               " below witness count " + std::to_string(rep.lower_bound) +
                               " at refinement cap");
  }
}

}  // namespace warpspec
