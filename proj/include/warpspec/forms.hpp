#pragma once

// Quadratic forms of reduced operators, Hardy and uncertainty-principle slack
// checks, and the cutoff test functions used to certify infinitely many
// bound states.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "warpspec/errors.hpp"
#include "warpspec/geometry.hpp"
#include "warpspec/profile.hpp"
#include "warpspec/quadrature.hpp"
#include "warpspec/reduction.hpp"

namespace warpspec {

/// Trapezoidal cutoff: 0 below R, ramp to 1 on [R, 2R], 1 on [2R, kR],
/// ramp to 0 on [kR, 2kR], 0 beyond.
struct CutoffSpec {
  double R = 1.0;
  double k = 2.0;

  void validate() const {
    if (!(R > 0.0)) throw DomainError("cutoff requires R > 0");
    if (!(k > 1.0)) throw DomainError("cutoff requires k > 1");
  }
  [[nodiscard]] double support_end() const { return 2.0 * k * R; }
  [[nodiscard]] std::vector<double> kinks() const { return {R, 2.0 * R, k * R, 2.0 * k * R}; }
};

// Between 2R and kR the ramps overlap when k < 2; the plateau piece then
// never applies and the cutoff is min(rise, fall).
inline double cutoff_chi(const CutoffSpec& c, double t) {
  c.validate();
  if (t <= c.R || t >= c.support_end()) return 0.0;
  const double rise = (t - c.R) / c.R;
  const double fall = -(t - c.support_end()) / (c.k * c.R);
  return std::min({1.0, rise, fall});
}

inline double cutoff_chi_derivative(const CutoffSpec& c, double t) {
  c.validate();
  if (t < c.R || t >= c.support_end()) return 0.0;
  const double rise = (t - c.R) / c.R;
  const double fall = -(t - c.support_end()) / (c.k * c.R);
  if (rise < 1.0 && rise <= fall) return 1.0 / c.R;
  if (fall < 1.0) return -1.0 / (c.k * c.R);
  return 0.0;
}

/// w(t) = t^{1/2}
struct SqrtWeight {};

/// w(t) = t^{1/2} s(t)^{-1/2}: the original-space image of t^{1/2}.
struct SqrtDensityInvRootWeight {
  ModelGeometry geometry;
};

/// Closed-form weight supplied as value and derivative callables.
struct CustomWeight {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::string label = "custom";
};

using WeightKind = std::variant<SqrtWeight, SqrtDensityInvRootWeight, CustomWeight>;

inline CustomWeight unit_weight() {
  return {[](double) { return 1.0; }, [](double) { return 0.0; }, "unit"};
}

/// chi(t) * w(t), with analytic derivative.
class TestFunction {
 public:
  TestFunction(CutoffSpec cutoff, WeightKind weight) : cutoff_(cutoff), weight_(std::move(weight)) {
    cutoff_.validate();
  }

  [[nodiscard]] double value(double t) const {
    const double chi = cutoff_chi(cutoff_, t);
    return chi == 0.0 ? 0.0 : chi * weight_value(t);
  }

  [[nodiscard]] double derivative(double t) const {
    const double chi = cutoff_chi(cutoff_, t);
    const double dchi = cutoff_chi_derivative(cutoff_, t);
    if (chi == 0.0 && dchi == 0.0) return 0.0;
    const auto [w, dw] = weight_pair(t);
    return dchi * w + chi * dw;
  }

  [[nodiscard]] std::pair<double, double> support() const { return {cutoff_.R, cutoff_.support_end()}; }
  [[nodiscard]] std::vector<double> breakpoints() const { return cutoff_.kinks(); }
  [[nodiscard]] const CutoffSpec& cutoff() const { return cutoff_; }
  [[nodiscard]] const WeightKind& weight() const { return weight_; }

 private:
  [[nodiscard]] double weight_value(double t) const { return weight_pair(t).first; }

  [[nodiscard]] std::pair<double, double> weight_pair(double t) const {
    return std::visit(
        [t](const auto& w) -> std::pair<double, double> {
          using T = std::decay_t<decltype(w)>;
          if constexpr (std::is_same_v<T, SqrtWeight>) {
            const double s = std::sqrt(t);
            return {s, 0.5 / s};
          } else if constexpr (std::is_same_v<T, SqrtDensityInvRootWeight>) {
            const RadialInvariants inv = radial_invariants(w.geometry, t);
            const double v = std::sqrt(t) * std::exp(-0.5 * inv.log_density);
            return {v, v * (0.5 / t - 0.5 * inv.A)};
          } else {
            return {w.value(t), w.derivative(t)};
          }
        },
        weight_);
  }

  CutoffSpec cutoff_;
  WeightKind weight_;
};

/// amplitude * ((t - lo)(hi - t))^2 on [lo, hi], zero elsewhere; C^1.
struct PolynomialBump {
  double lo = 1.0;
  double hi = 2.0;
  double amplitude = 1.0;

  [[nodiscard]] double value(double t) const {
    if (t <= lo || t >= hi) return 0.0;
    const double p = (t - lo) * (hi - t);
    return amplitude * p * p;
  }
  [[nodiscard]] double derivative(double t) const {
    if (t <= lo || t >= hi) return 0.0;
    const double p = (t - lo) * (hi - t);
    return amplitude * 2.0 * p * (hi + lo - 2.0 * t);
  }
  [[nodiscard]] std::pair<double, double> support() const { return {lo, hi}; }
  [[nodiscard]] std::vector<double> breakpoints() const { return {lo, hi}; }
};

/// Bump with random support inside [lo_min, hi_max], width at least
/// min_width, and peak value in [0.5, 1].
template <class Rng>
PolynomialBump random_bump(Rng& rng, double lo_min, double hi_max, double min_width) {
  if (!(hi_max - lo_min > min_width) || !(min_width > 0.0)) throw DomainError("random bump: interval too short");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double width = min_width + (hi_max - lo_min - min_width) * unit(rng);
  const double lo = lo_min + (hi_max - lo_min - width) * unit(rng);
  const double half = 0.5 * width;
  const double peak = 0.5 + 0.5 * unit(rng);
  return {lo, lo + width, peak / (half * half * half * half)};
}

/// C^1 piecewise-cubic Hermite profile through (knots, values, slopes);
/// zero to the right of the last knot, where value and slope must vanish.
class PiecewiseCubic {
 public:
  PiecewiseCubic(std::vector<double> knots, std::vector<double> values, std::vector<double> slopes)
      : x_(std::move(knots)), y_(std::move(values)), m_(std::move(slopes)) {
    if (x_.size() < 2 || y_.size() != x_.size() || m_.size() != x_.size())
      throw DomainError("piecewise cubic needs >= 2 knots with matching values and slopes");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw DomainError("piecewise cubic knots must increase");
    if (y_.back() != 0.0 || m_.back() != 0.0)
      throw DomainError("piecewise cubic must vanish to first order at its right end");
  }

  [[nodiscard]] double value(double t) const { return eval(t).first; }
  [[nodiscard]] double derivative(double t) const { return eval(t).second; }
  [[nodiscard]] std::pair<double, double> support() const { return {x_.front(), x_.back()}; }
  [[nodiscard]] std::vector<double> breakpoints() const { return x_; }

 private:
  [[nodiscard]] std::pair<double, double> eval(double t) const {
    if (t < x_.front() || t >= x_.back()) return {0.0, 0.0};
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
    const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
    const double v = h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
    const double d = (d00 * y_[i] + d01 * y_[i + 1]) / h + d10 * m_[i] + d11 * m_[i + 1];
    return {v, d};
  }

  std::vector<double> x_, y_, m_;
};

/// Random C^1 piecewise cubic starting at R (generally f(R) != 0) and
/// vanishing at a random end point in (R, max_ratio * R].
template <class Rng>
PiecewiseCubic random_piecewise_cubic(Rng& rng, double R, double max_ratio = 10.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> knots_dist(2, 6);
  const int inner = knots_dist(rng);
  const double end = R * (1.0 + (max_ratio - 1.0) * (0.1 + 0.9 * unit(rng)));
  std::vector<double> x{R};
  for (int i = 0; i < inner; ++i) x.push_back(R + (end - R) * unit(rng));
  x.push_back(end);
  std::sort(x.begin() + 1, x.end() - 1);
  x.erase(std::unique(x.begin(), x.end()), x.end());
  std::vector<double> y(x.size()), m(x.size());
  const double scale = 1.0 / (end - R);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    y[i] = 2.0 * unit(rng) - 1.0;
    m[i] = (2.0 * unit(rng) - 1.0) * 4.0 * scale;
  }
  y.back() = 0.0;
  m.back() = 0.0;
  return PiecewiseCubic(std::move(x), std::move(y), std::move(m));
}

namespace detail {

template <RadialProfile P>
Grid1D covering_interval(const P& u, const Grid1D& grid, double left) {
  const auto [lo, hi] = support_of(u);
  const double start = std::max(left, lo);
  if (std::isfinite(hi) && hi > grid.b * (1.0 + 1e-14))
    throw DomainError("grid does not cover the support of the test function");
  if (left < grid.a * (1.0 - 1e-14) - 1e-300)
    throw DomainError("grid does not cover the left end of the integration range");
  const double stop = std::isfinite(hi) ? std::min(hi, grid.b) : grid.b;
  if (!(stop > start)) return grid.with_interval(start, start);
  return grid.with_interval(start, stop);
}

}  // namespace detail

/// int (u'^2 + Q u^2) dt over the support of u, with analytic u'.
template <RadialProfile P>
double form_value(const ReducedOperator& Q, const P& u, const Grid1D& grid) {
  grid.validate();
  const auto [lo, hi] = support_of(u);
  if (std::isfinite(lo) && lo < grid.a * (1.0 - 1e-14))
    throw DomainError("grid does not cover the support of the test function");
  const Grid1D g = detail::covering_interval(u, grid, std::max(grid.a, lo));
  if (!(g.b > g.a)) return 0.0;
  return integrate_piecewise(
      [&](double t) {
        const double v = u.value(t);
        const double d = u.derivative(t);
        return d * d + (v == 0.0 ? 0.0 : Q(t) * v * v);
      },
      g, breakpoints_of(u));
}

/// int_R f'^2 - int_R f^2/(4t^2) + f(R)^2/(2R); nonnegative by Hardy's inequality.
template <RadialProfile P>
double hardy_slack(const P& f, double R, const Grid1D& grid) {
  grid.validate();
  if (!(R > 0.0)) throw DomainError("Hardy slack requires R > 0");
  const Grid1D g = detail::covering_interval(f, grid, R);
  const double fR = f.value(R);
  double integral = 0.0;
  if (g.b > g.a) {
    integral = integrate_piecewise(
        [&](double t) {
          const double v = f.value(t);
          const double d = f.derivative(t);
          return d * d - v * v / (4.0 * t * t);
        },
        g, breakpoints_of(f));
  }
  return integral + fR * fR / (2.0 * R);
}

struct UncertaintySlack {
  double value = 0.0;                 // base_volume * (gradient - weight - boundary)
  double boundary_coefficient = 0.0;  // Laplacian r(R) - 1/R
  bool boundary_nonnegative = true;
};

/// Slack of the uncertainty-principle inequality for a radial u on [R, inf):
/// base_volume * [int u'^2 s - int W u^2 s - bc(R) u(R)^2 s(R) / 2].
template <RadialProfile P>
UncertaintySlack uncertainty_slack(const ModelGeometry& geom, const P& u, double R, const Grid1D& grid) {
  grid.validate();
  UncertaintySlack out;
  out.boundary_coefficient = boundary_coefficient(geom, R);
  out.boundary_nonnegative = out.boundary_coefficient >= 0.0;
  const Grid1D g = detail::covering_interval(u, grid, R);
  double integral = 0.0;
  if (g.b > g.a) {
    integral = integrate_piecewise(
        [&](double t) {
          const RadialInvariants inv = radial_invariants(geom, t);
          const double s = std::exp(inv.log_density);
          const double v = u.value(t);
          const double d = u.derivative(t);
          return (d * d - weight_from_invariants(inv, t) * v * v) * s;
        },
        g, breakpoints_of(u));
  }
  const double uR = u.value(R);
  const double boundary = 0.5 * out.boundary_coefficient * uR * uR * volume_density(geom, R);
  out.value = geom.base_volume * (integral - boundary);
  return out;
}

/// Upper bound 3 - (delta/4) log(k/2) on the form of chi t^{1/2} against the
/// envelope -(1+delta)/(4t^2), and the least integer k0 making it negative.
struct Lemma21Certificate {
  double delta_tilde = 0.0;
  long long k0 = 0;

  [[nodiscard]] double bound(double k) const { return 3.0 - 0.25 * delta_tilde * std::log(0.5 * k); }
};

inline Lemma21Certificate lemma21_certificate(double delta_tilde) {
  if (!(delta_tilde > 0.0)) throw DomainError("certificate requires delta > 0");
  Lemma21Certificate c;
  c.delta_tilde = delta_tilde;
  const double crossing = 2.0 * std::exp(12.0 / delta_tilde);
  if (!(crossing < 9.0e15)) throw DomainError("certificate: k0 exceeds representable range");
  auto k = static_cast<long long>(std::floor(crossing)) + 1;
  while (k > 2 && c.bound(static_cast<double>(k - 1)) < 0.0) --k;
  while (!(c.bound(static_cast<double>(k)) < 0.0)) ++k;
  c.k0 = k;
  return c;
}

/// Smallest radius on the grid R1 + j*step beyond which the hyperbolic
/// correction (n-1)(n-3) kappa / (4 sinh^2(sqrt(kappa) r)) is at most
/// (delta/2) / (4 r^2), so that -(1+delta)/(4r^2) plus the correction stays
/// below -(1+delta/2)/(4r^2).
inline double hyperbolic_envelope_start(int n, double kappa, double delta, double R1, double step = 0.01) {
  if (!(kappa > 0.0) || !(delta > 0.0) || !(R1 > 0.0) || !(step > 0.0))
    throw DomainError("hyperbolic envelope start: invalid parameters");
  const double m = static_cast<double>(n - 1) * static_cast<double>(n - 3);
  if (m <= 0.0) return R1;
  const double sk = std::sqrt(kappa);
  for (long j = 0; j < 100000000L; ++j) {
    const double r = R1 + step * static_cast<double>(j);
    const double sh = std::sinh(sk * r);
    // r^2 / sinh^2 is decreasing, so the first hit is final
    if (m * kappa * r * r <= 0.5 * delta * sh * sh) return r;
  }
  throw DomainError("hyperbolic envelope start not found");
}

struct WitnessOptions {
  std::size_t nodes = 8193;
  Spacing spacing = Spacing::Logarithmic;
  std::size_t envelope_samples = 1000;
};

struct WitnessMember {
  CutoffSpec cutoff;
  TestFunction reduced;        // chi t^{1/2} on L^2(dt)
  TestFunction original;       // chi t^{1/2} s^{-1/2} on L^2(s dt)
  double form_value = 0.0;     // reduced form against Q - threshold, per unit base volume
  double weighted_form_value = 0.0;  // same quantity through the original-space integrand
  double analytic_bound = 0.0;       // 3 - (delta/4) log(k/2)

  [[nodiscard]] double lo() const { return cutoff.R; }
  [[nodiscard]] double hi() const { return cutoff.support_end(); }
};

/// m disjointly supported test functions chi_i t^{1/2}, each with a negative
/// form against the threshold-shifted reduced operator. Supports chain as
/// [R_i, 2 k0 R_i] with R_{i+1} = 2 k0 R_i. The reduced potential must lie
/// below -(1+delta)/(4t^2) on the union of supports.
inline std::vector<WitnessMember> witness_family(const ModelGeometry& geom, const RadialPotential& V,
                                                 double delta_tilde, double R_start, int m,
                                                 const WitnessOptions& opt = {}) {
  if (m <= 0) throw DomainError("witness family requires m >= 1");
  if (!(R_start >= domain_start(geom))) throw DomainError("witness family must start inside the domain");
  const Lemma21Certificate cert = lemma21_certificate(delta_tilde);
  const double k = static_cast<double>(cert.k0);
  const double threshold = essential_threshold(geom);
  const ReducedOperator Q = shifted(liouville_potential(geom, V), threshold);

  std::vector<CutoffSpec> cutoffs;
  double R = R_start;
  for (int i = 0; i < m; ++i) {
    cutoffs.push_back({R, k});
    R = 2.0 * k * R;
  }
  for (const CutoffSpec& c : cutoffs) {
    for (double t : log_spaced(c.R, c.support_end(), opt.envelope_samples)) {
      const double envelope = -(1.0 + delta_tilde) / (4.0 * t * t);
      if (Q(t) > envelope + 1e-12 * (1.0 + std::abs(threshold)))
        throw DomainError("reduced potential violates the supercritical envelope at t = " + std::to_string(t));
    }
  }

  std::vector<WitnessMember> family;
  family.reserve(cutoffs.size());
  for (const CutoffSpec& c : cutoffs) {
    WitnessMember w{c, TestFunction(c, SqrtWeight{}), TestFunction(c, SqrtDensityInvRootWeight{geom}), 0, 0, 0};
    const Grid1D grid{c.R, c.support_end(), opt.nodes, QuadratureRule::Simpson, opt.spacing};
    w.form_value = form_value(Q, w.reduced, grid);
    w.weighted_form_value = integrate_piecewise(
        [&](double t) {
          const RadialInvariants inv = radial_invariants(geom, t);
          const double phi = w.reduced.value(t);
          const double g = w.reduced.derivative(t) - 0.5 * inv.A * phi;
          return g * g + (potential_value(V, t) - threshold) * phi * phi;
        },
        grid, c.kinks());
    w.analytic_bound = cert.bound(k);
    family.push_back(std::move(w));
  }
  return family;
}

}  // namespace warpspec
