#pragma once

// Composite Newton-Cotes quadrature on uniform or log-spaced nodes, plus the
// small sampled-function helpers the rest of the library shares.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "warpspec/errors.hpp"

namespace warpspec {

enum class QuadratureRule { Trapezoid, Simpson };
enum class Spacing { Uniform, Logarithmic };

inline const char* to_string(QuadratureRule rule) {
  return rule == QuadratureRule::Simpson ? "simpson" : "trapezoid";
}

/// Integration grid on [a, b]. With logarithmic spacing the rule is applied in
/// x = log t, i.e. to f(e^x) e^x on uniform x-nodes.
struct Grid1D {
  double a = 0.0;
  double b = 1.0;
  std::size_t nodes = 8193;
  QuadratureRule rule = QuadratureRule::Simpson;
  Spacing spacing = Spacing::Uniform;

  void validate() const {
    if (!(a < b)) throw DomainError("grid requires a < b");
    if (nodes < 3) throw DomainError("grid requires at least 3 nodes");
    if (rule == QuadratureRule::Simpson && nodes % 2 == 0)
      throw DomainError("Simpson rule requires an odd node count");
    if (spacing == Spacing::Logarithmic && !(a > 0.0))
      throw DomainError("logarithmic grid requires a > 0");
  }

  [[nodiscard]] Grid1D with_interval(double lo, double hi) const {
    Grid1D g = *this;
    g.a = lo;
    g.b = hi;
    return g;
  }

  [[nodiscard]] std::vector<double> points() const {
    validate();
    std::vector<double> t(nodes);
    if (spacing == Spacing::Uniform) {
      const double h = (b - a) / static_cast<double>(nodes - 1);
      for (std::size_t i = 0; i < nodes; ++i) t[i] = a + h * static_cast<double>(i);
    } else {
      const double xa = std::log(a);
      const double h = (std::log(b) - xa) / static_cast<double>(nodes - 1);
      for (std::size_t i = 0; i < nodes; ++i) t[i] = std::exp(xa + h * static_cast<double>(i));
    }
    t.front() = a;
    t.back() = b;
    return t;
  }
};

namespace detail {

inline double newton_cotes_weight(std::size_t i, std::size_t n, QuadratureRule rule) {
  if (rule == QuadratureRule::Trapezoid) return (i == 0 || i + 1 == n) ? 0.5 : 1.0;
  if (i == 0 || i + 1 == n) return 1.0 / 3.0;
  return (i % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
}

}  // namespace detail

/// Integrates f over the grid.
template <class F>
double integrate(F&& f, const Grid1D& grid) {
  grid.validate();
  const std::size_t n = grid.nodes;
  double sum = 0.0;
  if (grid.spacing == Spacing::Uniform) {
    const double h = (grid.b - grid.a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = (i + 1 == n) ? grid.b : grid.a + h * static_cast<double>(i);
      sum += detail::newton_cotes_weight(i, n, grid.rule) * f(t);
    }
    return sum * h;
  }
  const double xa = std::log(grid.a);
  const double h = (std::log(grid.b) - xa) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double t = std::exp(xa + h * static_cast<double>(i));
    if (i == 0) t = grid.a;
    if (i + 1 == n) t = grid.b;
    sum += detail::newton_cotes_weight(i, n, grid.rule) * f(t) * t;
  }
  return sum * h;
}

/// Integrates f over [grid.a, grid.b] piece by piece, splitting at every
/// breakpoint strictly inside the interval. Each piece gets grid.nodes nodes.
/// Piece ends are sampled one ulp inside the piece, so one-sided values of a
/// kinked integrand are taken from the piece being integrated.
template <class F>
double integrate_piecewise(F&& f, const Grid1D& grid, std::span<const double> breaks) {
  grid.validate();
  std::vector<double> cuts{grid.a};
  std::vector<double> inner(breaks.begin(), breaks.end());
  std::sort(inner.begin(), inner.end());
  for (double c : inner)
    if (c > cuts.back() && c < grid.b) cuts.push_back(c);
  cuts.push_back(grid.b);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = std::nextafter(cuts[i], inf);
    const double hi = std::nextafter(cuts[i + 1], -inf);
    total += integrate(f, grid.with_interval(lo, hi));
  }
  return total;
}

template <class F>
double integrate_piecewise(F&& f, const Grid1D& grid, const std::vector<double>& breaks) {
  return integrate_piecewise(std::forward<F>(f), grid, std::span<const double>(breaks));
}

/// Samples of a real function on an increasing node set.
struct SampledFunction {
  std::vector<double> nodes;
  std::vector<double> values;

  void validate() const {
    if (nodes.size() != values.size())
      throw DomainError("sampled function: nodes and values differ in length");
    if (nodes.size() < 2) throw DomainError("sampled function: need at least 2 nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (!(nodes[i] > nodes[i - 1]))
        throw DomainError("sampled function: nodes must be strictly increasing");
  }
};

/// Quadrature of sampled data. Simpson requires uniform nodes and an odd count;
/// trapezoid accepts any increasing nodes.
inline double integrate_samples(std::span<const double> nodes, std::span<const double> values,
                                QuadratureRule rule) {
  if (nodes.size() != values.size() || nodes.size() < 2)
    throw DomainError("integrate_samples: size mismatch");
  if (rule == QuadratureRule::Trapezoid) {
    double s = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
      s += 0.5 * (nodes[i] - nodes[i - 1]) * (values[i] + values[i - 1]);
    return s;
  }
  const std::size_t n = nodes.size();
  if (n % 2 == 0) throw DomainError("Simpson rule requires an odd node count");
  const double h = (nodes.back() - nodes.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(nodes[i] - nodes[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw DomainError("Simpson rule on samples requires uniform nodes");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += detail::newton_cotes_weight(i, n, rule) * values[i];
  return s * h;
}

/// n log-spaced points from a to b inclusive (a, b > 0).
inline std::vector<double> log_spaced(double a, double b, std::size_t n) {
  if (!(a > 0.0) || !(b > a) || n < 2) throw DomainError("log_spaced: need 0 < a < b, n >= 2");
  std::vector<double> t(n);
  const double la = std::log(a);
  const double step = (std::log(b) - la) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(la + step * static_cast<double>(i));
  t.front() = a;
  t.back() = b;
  return t;
}

}  // namespace warpspec
