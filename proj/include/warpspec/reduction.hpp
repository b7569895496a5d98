#pragma once

// Liouville reduction of the radial operator -Laplacian + V on L^2(s dr) to
// -d^2/dt^2 + Q on L^2(dt) via the unitary map u -> s^{1/2} u, with
//
//   Q = A^2/4 + A'/2 + V   (= W - 1/(4t^2) + V).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "warpspec/errors.hpp"
#include "warpspec/geometry.hpp"
#include "warpspec/profile.hpp"
#include "warpspec/quadrature.hpp"

namespace warpspec {

struct ZeroPotential {};

/// V(r) = -c / (4 r^2)
struct InverseSquare {
  double c = 1.0;
};

/// V(r) = -c / (4 r^2) + shift
struct ShiftedInverseSquare {
  double c = 1.0;
  double shift = 0.0;
};

/// V(r) = -[1/(4r^2) + (n-1)(n-3) kappa / (4 sinh^2(sqrt(kappa) r))]
struct HyperbolicBorderline {
  double kappa = 1.0;
  int n = 3;
};

/// Piecewise-linear potential through (nodes, values).
struct SampledPotential {
  std::vector<double> nodes;
  std::vector<double> values;
};

using RadialPotential =
    std::variant<ZeroPotential, InverseSquare, ShiftedInverseSquare, HyperbolicBorderline, SampledPotential>;

inline void validate(const RadialPotential& v) {
  if (const auto* s = std::get_if<SampledPotential>(&v)) {
    if (s->nodes.size() < 2 || s->nodes.size() != s->values.size())
      throw DomainError("sampled potential needs >= 2 nodes with matching values");
    for (std::size_t i = 1; i < s->nodes.size(); ++i)
      if (!(s->nodes[i] > s->nodes[i - 1]))
        throw DomainError("sampled potential nodes must be strictly increasing");
  }
  if (const auto* h = std::get_if<HyperbolicBorderline>(&v); h && !(h->kappa > 0.0))
    throw DomainError("hyperbolic borderline potential requires kappa > 0");
}

inline double potential_value(const RadialPotential& v, double r) {
  return std::visit(
      [r](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ZeroPotential>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, InverseSquare>) {
          return -p.c / (4.0 * r * r);
        } else if constexpr (std::is_same_v<T, ShiftedInverseSquare>) {
          return -p.c / (4.0 * r * r) + p.shift;
        } else if constexpr (std::is_same_v<T, HyperbolicBorderline>) {
          const double sh = std::sinh(std::sqrt(p.kappa) * r);
          const double m = static_cast<double>(p.n - 1);
          return -(0.25 / (r * r) + m * (p.n - 3) * p.kappa / (4.0 * sh * sh));
        } else {
          const auto& x = p.nodes;
          if (r < x.front() || r > x.back()) throw DomainError("radius outside sampled potential range");
          std::size_t i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), r) - x.begin());
          if (i >= x.size()) return p.values.back();
          i = (i == 0) ? 1 : i;
          const double w = (r - x[i - 1]) / (x[i] - x[i - 1]);
          return (1.0 - w) * p.values[i - 1] + w * p.values[i];
        }
      },
      v);
}

/// -d^2/dt^2 + Q(t) on [a, b]; calls return Q(t) - energy_shift.
struct ReducedOperator {
  std::function<double(double)> potential;
  double a = 0.0;
  double b = std::numeric_limits<double>::infinity();
  double energy_shift = 0.0;
  std::string provenance;

  double operator()(double t) const {
    if (!(t >= a) || !(t <= b))
      throw DomainError("reduced potential queried outside [" + std::to_string(a) + ", " +
                        std::to_string(b) + "]");
    return potential(t) - energy_shift;
  }

  /// Generic operator from any potential function (used for test problems).
  static ReducedOperator from_function(std::function<double(double)> q, double a,
                                       double b = std::numeric_limits<double>::infinity(),
                                       std::string provenance = "function") {
    ReducedOperator op;
    op.potential = std::move(q);
    op.a = a;
    op.b = b;
    op.provenance = std::move(provenance);
    return op;
  }
};

/// Same operator with the given energy subtracted.
inline ReducedOperator shifted(ReducedOperator op, double threshold) {
  op.energy_shift = threshold;
  return op;
}

/// Liouville potential A^2/4 + A'/2 + V of the radial operator on geom.
inline ReducedOperator liouville_potential(const ModelGeometry& geom, RadialPotential V) {
  validate(V);
  ReducedOperator op;
  op.a = domain_start(geom);
  if (const auto* s = std::get_if<CustomSampled>(&geom.profile)) op.b = s->nodes.back();
  op.provenance = profile_name(geom.profile);
  op.potential = [geom, V = std::move(V)](double t) {
    const RadialInvariants inv = radial_invariants(geom, t);
    return 0.25 * inv.A * inv.A + 0.5 * inv.dA + potential_value(V, t);
  };
  return op;
}

/// u -> s^{1/2} u
inline SampledFunction to_reduced(const SampledFunction& u, const ModelGeometry& geom) {
  u.validate();
  SampledFunction out{u.nodes, std::vector<double>(u.values.size())};
  for (std::size_t i = 0; i < u.nodes.size(); ++i)
    out.values[i] = std::exp(0.5 * log_volume_density(geom, u.nodes[i])) * u.values[i];
  return out;
}

/// u -> s^{-1/2} u
inline SampledFunction from_reduced(const SampledFunction& u, const ModelGeometry& geom) {
  u.validate();
  SampledFunction out{u.nodes, std::vector<double>(u.values.size())};
  for (std::size_t i = 0; i < u.nodes.size(); ++i)
    out.values[i] = std::exp(-0.5 * log_volume_density(geom, u.nodes[i])) * u.values[i];
  return out;
}

struct Identity8Report {
  double lhs = 0.0;                 // int u'^2 s
  double reduced_gradient = 0.0;    // int ((s^{1/2} u)')^2
  double curvature_term = 0.0;      // int (A^2/4 - B/2 - C/2) u^2 s
  double boundary_term = 0.0;       // (A u^2 s)(R) / 2
  double rhs = 0.0;
  double residual = 0.0;            // |lhs - rhs|
};

/// Evaluates both sides of the radial integration-by-parts identity
///
///   int_R |u'|^2 s = int_R |(s^{1/2}u)'|^2 + int_R (A^2/4 - B/2 - C/2) u^2 s + (A u^2 s)(R)/2
///
/// on grid, which must start at R and reach past the support of u.
template <RadialProfile P>
Identity8Report verify_identity8(const ModelGeometry& geom, const P& u, double R, const Grid1D& grid) {
  grid.validate();
  if (std::abs(grid.a - R) > 1e-12 * std::max(1.0, R))
    throw DomainError("identity check: grid must start at R");
  const auto [lo, hi] = support_of(u);
  if (std::isfinite(hi) && hi > grid.b) throw DomainError("identity check: grid does not cover the support");
  (void)lo;
  const std::vector<double> breaks = breakpoints_of(u);

  Identity8Report rep;
  rep.lhs = integrate_piecewise(
      [&](double t) {
        const double s = std::exp(radial_invariants(geom, t).log_density);
        const double du = u.derivative(t);
        return du * du * s;
      },
      grid, breaks);
  rep.reduced_gradient = integrate_piecewise(
      [&](double t) {
        const RadialInvariants inv = radial_invariants(geom, t);
        const double sqrt_s = std::exp(0.5 * inv.log_density);
        const double dw = sqrt_s * (u.derivative(t) + 0.5 * inv.A * u.value(t));
        return dw * dw;
      },
      grid, breaks);
  rep.curvature_term = integrate_piecewise(
      [&](double t) {
        const RadialInvariants inv = radial_invariants(geom, t);
        const double v = u.value(t);
        return (0.25 * inv.A * inv.A - 0.5 * inv.B - 0.5 * inv.C) * v * v * std::exp(inv.log_density);
      },
      grid, breaks);
  const RadialInvariants at_r = radial_invariants(geom, R);
  const double uR = u.value(R);
  rep.boundary_term = 0.5 * at_r.A * uR * uR * std::exp(at_r.log_density);
  rep.rhs = rep.reduced_gradient + rep.curvature_term + rep.boundary_term;
  rep.residual = std::abs(rep.lhs - rep.rhs);
  return rep;
}

}  // namespace warpspec
