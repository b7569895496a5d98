#pragma once

// Model ends dr^2 + h(r)^2 g_N (and the Berger-type R^4 end) together with the
// radial curvature scalars that enter the uncertainty-principle weight
//
//   W(r) = 1/(4r^2) + A^2/4 - B/2 - C/2,
//
// where A = Laplacian of r, B = |Hess r|^2 and C = Ric(grad r, grad r).
// Everything is exposed per radius; no tensors are formed.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "warpspec/errors.hpp"

namespace warpspec {

/// h(r) = r
struct Euclidean {};

/// h(r) = sinh(sqrt(kappa) r) / sqrt(kappa), sectional curvature -kappa.
struct Hyperbolic {
  double kappa = 1.0;
};

/// h(r) = 2 + sin r
struct Periodic {};

/// dr^2 + mu^2 g_h + nu^2 w(x)w with mu = e^r, nu = e^-r for r >= r0. Only n = 4.
struct BergerExpShrink {
  double r0 = 1.0;
};

/// h(r) = r (1 + c r^-tau), leading-order ALE end.
struct ALEModel {
  double tau = 0.5;
  double c = 0.0;
};

/// h(r) = e^r (1 + c e^-r), leading-order asymptotically hyperbolic end.
struct AHModel {
  double c = 0.0;
};

/// Tabulated warp function; derivatives come from local 5-point Lagrange stencils.
struct CustomSampled {
  std::vector<double> nodes;
  std::vector<double> h_values;
};

using WarpProfile =
    std::variant<Euclidean, Hyperbolic, Periodic, BergerExpShrink, ALEModel, AHModel, CustomSampled>;

inline std::string profile_name(const WarpProfile& p) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Euclidean>) return "euclidean";
        else if constexpr (std::is_same_v<T, Hyperbolic>) return "hyperbolic";
        else if constexpr (std::is_same_v<T, Periodic>) return "periodic";
        else if constexpr (std::is_same_v<T, BergerExpShrink>) return "berger";
        else if constexpr (std::is_same_v<T, ALEModel>) return "ale";
        else if constexpr (std::is_same_v<T, AHModel>) return "ah";
        else return "custom";
      },
      p);
}

/// Volume of the unit (k)-sphere S^k in R^{k+1}.
inline double unit_sphere_volume(int k) {
  const double m = 0.5 * static_cast<double>(k + 1);
  return 2.0 * std::pow(std::numbers::pi, m) / std::tgamma(m);
}

struct ModelGeometry {
  int n = 3;
  WarpProfile profile = Euclidean{};
  double R = 1.0;            // domain start
  double base_volume = 0.0;  // Vol(N, g_N)

  /// Validating constructor; base_volume defaults to Vol(S^{n-1}).
  static ModelGeometry make(int n, WarpProfile profile, double R,
                            std::optional<double> base_volume = std::nullopt) {
    if (n < 2) throw DomainError("dimension n must be >= 2");
    if (!(R > 0.0)) throw DomainError("domain start R must be positive");
    std::visit(
        [n](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Hyperbolic>) {
            if (!(p.kappa > 0.0)) throw DomainError("hyperbolic profile requires kappa > 0");
          } else if constexpr (std::is_same_v<T, BergerExpShrink>) {
            if (n != 4) throw DomainError("Berger profile is defined only for n = 4");
            if (!(p.r0 > 0.0)) throw DomainError("Berger profile requires r0 > 0");
          } else if constexpr (std::is_same_v<T, ALEModel>) {
            if (!(p.tau > 0.0 && p.tau < 1.0)) throw DomainError("ALE profile requires tau in (0,1)");
          } else if constexpr (std::is_same_v<T, CustomSampled>) {
            if (p.nodes.size() < 4 || p.nodes.size() != p.h_values.size())
              throw DomainError("sampled profile needs >= 4 nodes with matching values");
            for (std::size_t i = 0; i < p.nodes.size(); ++i) {
              if (!(p.h_values[i] > 0.0)) throw DomainError("sampled profile requires h > 0");
              if (i > 0 && !(p.nodes[i] > p.nodes[i - 1]))
                throw DomainError("sampled profile nodes must be strictly increasing");
            }
          }
        },
        profile);
    ModelGeometry g;
    g.n = n;
    g.profile = std::move(profile);
    g.R = R;
    g.base_volume = base_volume.value_or(unit_sphere_volume(n - 1));
    if (!(g.base_volume > 0.0)) throw DomainError("base_volume must be positive");
    return g;
  }
};

/// Radial scalars at one radius. dA is d/dr of A; log_density is log s(r).
struct RadialInvariants {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double dA = 0.0;
  double log_density = 0.0;
};

namespace detail {

/// Finite-difference weights (Fornberg) for derivatives 0..2 at z.
inline std::array<std::vector<double>, 3> fornberg_weights(double z, const double* x, std::size_t n) {
  constexpr int m = 2;
  std::vector<std::array<double, m + 1>> c(n, {0.0, 0.0, 0.0});
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::array<std::vector<double>, 3> out;
  for (int k = 0; k <= m; ++k) {
    out[k].resize(n);
    for (std::size_t i = 0; i < n; ++i) out[k][i] = c[i][k];
  }
  return out;
}

/// h'/h, h''/h and log h for a warped profile.
struct WarpRatios {
  double d1 = 0.0;
  double d2 = 0.0;
  double log_h = 0.0;
};

inline WarpRatios sampled_ratios(const CustomSampled& p, double r) {
  const auto& x = p.nodes;
  const std::size_t n = x.size();
  const std::size_t width = std::min<std::size_t>(5, n);
  std::size_t i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), r) - x.begin());
  i = (i == 0) ? 0 : i - 1;
  std::size_t start = (i >= width / 2) ? i - width / 2 : 0;
  if (start + width > n) start = n - width;
  const auto w = fornberg_weights(r, x.data() + start, width);
  double h0 = 0.0, h1 = 0.0, h2 = 0.0;
  for (std::size_t k = 0; k < width; ++k) {
    const double hv = p.h_values[start + k];
    h0 += w[0][k] * hv;
    h1 += w[1][k] * hv;
    h2 += w[2][k] * hv;
  }
  if (!(h0 > 0.0)) throw DomainError("sampled profile interpolates to h <= 0");
  return {h1 / h0, h2 / h0, std::log(h0)};
}

inline double log_sinh(double x) {
  // log(sinh x) for x > 0 without overflow
  if (x > 20.0) return x - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * x));
  return std::log(std::sinh(x));
}

inline void check_radius(const ModelGeometry& g, double r) {
  if (!(r >= g.R)) throw DomainError("radius " + std::to_string(r) + " below domain start R");
  if (!std::isfinite(r)) throw DomainError("radius must be finite");
  if (const auto* b = std::get_if<BergerExpShrink>(&g.profile); b && r < b->r0)
    throw DomainError("Berger profile is only specified for r >= r0");
  if (const auto* s = std::get_if<CustomSampled>(&g.profile);
      s && (r < s->nodes.front() || r > s->nodes.back()))
    throw DomainError("radius outside the sampled profile range");
}

}  // namespace detail

/// A, B, C, A' and log s at radius r, without domain checks.
inline RadialInvariants radial_invariants_unchecked(const ModelGeometry& g, double r) {
  if (std::holds_alternative<BergerExpShrink>(g.profile)) {
    // mu'/mu = 1, nu'/nu = -1, all second log-derivatives vanish.
    return {1.0, 3.0, -3.0, 0.0, r};
  }
  const detail::WarpRatios q = std::visit(
      [r](const auto& p) -> detail::WarpRatios {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Euclidean>) {
          return {1.0 / r, 0.0, std::log(r)};
        } else if constexpr (std::is_same_v<T, Hyperbolic>) {
          const double sk = std::sqrt(p.kappa);
          return {sk / std::tanh(sk * r), p.kappa, detail::log_sinh(sk * r) - std::log(sk)};
        } else if constexpr (std::is_same_v<T, Periodic>) {
          const double h = 2.0 + std::sin(r);
          return {std::cos(r) / h, -std::sin(r) / h, std::log(h)};
        } else if constexpr (std::is_same_v<T, ALEModel>) {
          const double rt = std::pow(r, -p.tau);
          const double f = 1.0 + p.c * rt;
          if (!(f > 0.0)) throw DomainError("ALE profile has h <= 0 at this radius");
          const double h1 = 1.0 + p.c * (1.0 - p.tau) * rt;
          const double h2 = -p.c * (1.0 - p.tau) * p.tau * rt / r;
          return {h1 / (r * f), h2 / (r * f), std::log(r) + std::log(f)};
        } else if constexpr (std::is_same_v<T, AHModel>) {
          const double e = p.c * std::exp(-r);
          if (!(1.0 + e > 0.0)) throw DomainError("AH profile has h <= 0 at this radius");
          const double ratio = 1.0 / (1.0 + e);
          return {ratio, ratio, r + std::log1p(e)};
        } else if constexpr (std::is_same_v<T, CustomSampled>) {
          return detail::sampled_ratios(p, r);
        } else {
          return {};
        }
      },
      g.profile);
  const double m = static_cast<double>(g.n - 1);
  RadialInvariants inv;
  inv.A = m * q.d1;
  inv.B = m * q.d1 * q.d1;
  inv.dA = m * (q.d2 - q.d1 * q.d1);
  inv.C = -m * q.d2;  // = -A' - B
  inv.log_density = m * q.log_h;
  return inv;
}

inline RadialInvariants radial_invariants(const ModelGeometry& g, double r) {
  detail::check_radius(g, r);
  return radial_invariants_unchecked(g, r);
}

/// Laplacian of the distance function, i.e. the mean curvature of the level set.
inline double laplacian_r(const ModelGeometry& g, double r) { return radial_invariants(g, r).A; }

/// |Hess r|^2
inline double hessian_norm_sq(const ModelGeometry& g, double r) { return radial_invariants(g, r).B; }

/// Ric(grad r, grad r)
inline double radial_ricci(const ModelGeometry& g, double r) { return radial_invariants(g, r).C; }

/// r-dependent factor s(r) of the volume element; overflows to inf for huge r.
inline double volume_density(const ModelGeometry& g, double r) {
  return std::exp(radial_invariants(g, r).log_density);
}

inline double log_volume_density(const ModelGeometry& g, double r) {
  return radial_invariants(g, r).log_density;
}

inline double weight_from_invariants(const RadialInvariants& inv, double r) {
  return 0.25 / (r * r) + 0.25 * inv.A * inv.A - 0.5 * inv.B - 0.5 * inv.C;
}

/// Uncertainty-principle weight W(r).
inline double hardy_weight(const ModelGeometry& g, double r) {
  return weight_from_invariants(radial_invariants(g, r), r);
}

/// Coefficient (Laplacian r - 1/R) of the boundary integral at radius R.
inline double boundary_coefficient(const ModelGeometry& g, double R) {
  return laplacian_r(g, R) - 1.0 / R;
}

/// Bottom of the essential spectrum of the free Laplacian on the model.
inline double essential_threshold(const ModelGeometry& g) {
  const double m = static_cast<double>(g.n - 1);
  return std::visit(
      [m](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Hyperbolic>) return m * m * p.kappa / 4.0;
        else if constexpr (std::is_same_v<T, AHModel>) return m * m / 4.0;
        else if constexpr (std::is_same_v<T, BergerExpShrink>) return 0.25;
        else if constexpr (std::is_same_v<T, CustomSampled>)
          throw DomainError("essential threshold is not available for sampled profiles");
        else return 0.0;
      },
      g.profile);
}

/// Lower end of the radius range where all geometry operations are defined.
inline double domain_start(const ModelGeometry& g) {
  double lo = g.R;
  if (const auto* b = std::get_if<BergerExpShrink>(&g.profile)) lo = std::max(lo, b->r0);
  if (const auto* s = std::get_if<CustomSampled>(&g.profile)) lo = std::max(lo, s->nodes.front());
  return lo;
}

}  // namespace warpspec
