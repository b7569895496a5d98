#pragma once

// Finiteness / infiniteness decision rules for the discrete spectrum below
// the essential-spectrum threshold, by model geometry.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "warpspec/errors.hpp"
#include "warpspec/quadrature.hpp"
#include "warpspec/reduction.hpp"

namespace warpspec {

enum class EnvelopeSide { LowerBound, UpperBound };

/// LowerBound: V >= -(1 - delta) c / (4 r^2) for r >= R0.
/// UpperBound: V <= -(1 + delta) c / (4 r^2) for r >= R0.
/// model_correction adds -(n-1)(n-3) kappa / (4 sinh^2(sqrt(kappa) r)) to a
/// hyperbolic lower envelope.
struct PotentialEnvelope {
  EnvelopeSide side = EnvelopeSide::LowerBound;
  double c = 1.0;
  double delta = 0.0;
  double R0 = 1.0;
  bool model_correction = false;

  void validate() const {
    if (!(delta >= 0.0)) throw DomainError("envelope delta must be >= 0");
    if (!(R0 > 0.0)) throw DomainError("envelope R0 must be > 0");
    if (!std::isfinite(c)) throw DomainError("envelope coefficient must be finite");
  }
};

enum class SpectrumResult { Finite, Infinite, Indeterminate };

inline const char* to_string(SpectrumResult r) {
  switch (r) {
    case SpectrumResult::Finite: return "Finite";
    case SpectrumResult::Infinite: return "Infinite";
    default: return "Indeterminate";
  }
}

struct Verdict {
  SpectrumResult result = SpectrumResult::Indeterminate;
  std::string theorem;
  double threshold = 0.0;
  std::vector<std::string> notes;
};

namespace detail {

inline const std::string kSelfAdjoint = "assumed: -Laplacian + V essentially self-adjoint on smooth compactly supported functions";

struct RuleSet {
  std::string model;
  double border = 1.0;       // critical coefficient of 1/(4 r^2)
  double threshold = 0.0;    // bottom of the essential spectrum
  bool strict = false;       // lower rule needs (1 - delta) c < border and delta > 0
  bool lower_allowed = true;
};

inline Verdict apply_rules(const RuleSet& rs, const PotentialEnvelope& env, std::vector<std::string> notes) {
  env.validate();
  Verdict v;
  v.threshold = rs.threshold;
  v.notes = std::move(notes);
  v.notes.push_back("envelope trusted for r >= " + std::to_string(env.R0));
  if (env.side == EnvelopeSide::LowerBound) {
    const double eff = (1.0 - env.delta) * env.c;
    const bool ok = rs.strict ? (env.delta > 0.0 && env.c >= rs.border && eff < rs.border)
                              : (env.c >= rs.border && eff <= rs.border);
    if (ok && rs.lower_allowed) {
      v.result = SpectrumResult::Finite;
      v.theorem = rs.model + "-finite";
      return v;
    }
  } else {
    const double eff = (1.0 + env.delta) * env.c;
    const bool ok = rs.strict ? (env.delta > 0.0 && eff > rs.border) : eff > rs.border;
    if (ok) {
      v.result = SpectrumResult::Infinite;
      v.theorem = rs.model + "-infinite";
      return v;
    }
  }
  v.result = SpectrumResult::Indeterminate;
  v.theorem = rs.model + "-none";
  v.notes.push_back("no rule applies to this envelope");
  return v;
}

inline bool envelope_holds(const RadialPotential& V, const PotentialEnvelope& env, double correction_n,
                           double kappa) {
  validate(V);
  for (double r : log_spaced(env.R0, 100.0 * env.R0, 1000)) {
    const double v = potential_value(V, r);
    if (env.side == EnvelopeSide::LowerBound) {
      double bound = -(1.0 - env.delta) * env.c / (4.0 * r * r);
      if (env.model_correction && kappa > 0.0) {
        const double sh = std::sinh(std::sqrt(kappa) * r);
        bound -= (correction_n - 1.0) * (correction_n - 3.0) * kappa / (4.0 * sh * sh);
      }
      if (v < bound - 1e-12 * std::abs(bound)) return false;
    } else {
      const double bound = -(1.0 + env.delta) * env.c / (4.0 * r * r);
      if (v > bound + 1e-12 * std::abs(bound)) return false;
    }
  }
  return true;
}

inline Verdict checked(Verdict v, bool holds) {
  if (!holds && v.result != SpectrumResult::Indeterminate) {
    v.result = SpectrumResult::Indeterminate;
    v.notes.push_back("sampled potential violates the claimed envelope on [R0, 100 R0]");
  }
  return v;
}

}  // namespace detail

inline Verdict classify_euclidean(int n, const PotentialEnvelope& env) {
  if (n < 3) throw DomainError("Euclidean rule requires n >= 3");
  const double b = static_cast<double>(n - 2);
  return detail::apply_rules({"euclidean", b * b, 0.0, false, true}, env,
                             {detail::kSelfAdjoint, "assumed: essential spectrum [0, inf)"});
}

inline Verdict classify_hyperbolic(int n, double kappa, const PotentialEnvelope& env) {
  if (n < 2) throw DomainError("hyperbolic rule requires n >= 2");
  if (!(kappa > 0.0)) throw DomainError("hyperbolic rule requires kappa > 0");
  const double m = static_cast<double>(n - 1);
  // for n = 2 the sinh correction raises the envelope, so it must be present
  const bool lower_ok = env.model_correction || n >= 3;
  return detail::apply_rules({"hyperbolic", 1.0, m * m * kappa / 4.0, false, lower_ok}, env,
                             {detail::kSelfAdjoint, "assumed: essential spectrum [(n-1)^2 kappa/4, inf)"});
}

inline Verdict classify_ale(int n, const PotentialEnvelope& env) {
  if (n < 3) throw DomainError("ALE rule requires n >= 3");
  const double b = static_cast<double>(n - 2);
  return detail::apply_rules({"ale", b * b, 0.0, true, true}, env,
                             {detail::kSelfAdjoint, "unchecked: |Rm| <= L r^-(2+tau) outside a compact set",
                              "unchecked: Vol(B_t) >= K t^n", "unchecked: single end, C^2 metric"});
}

inline Verdict classify_ah(int n, const PotentialEnvelope& env) {
  if (n < 2) throw DomainError("AH rule requires n >= 2");
  const double m = static_cast<double>(n - 1);
  return detail::apply_rules({"ah", 1.0, m * m / 4.0, true, true}, env,
                             {detail::kSelfAdjoint, "unchecked: sectional curvature -> -1 at the stated rate",
                              "assumed: essential spectrum [(n-1)^2/4, inf)"});
}

inline Verdict classify_berger(const PotentialEnvelope& env) {
  return detail::apply_rules({"berger", 1.0, 0.25, false, true}, env,
                             {detail::kSelfAdjoint, "assumed: essential spectrum [1/4, inf)"});
}

// Variants that also sample V over [R0, 100 R0] against the claimed envelope.

inline Verdict classify_euclidean(int n, const PotentialEnvelope& env, const RadialPotential& V) {
  return detail::checked(classify_euclidean(n, env), detail::envelope_holds(V, env, n, 0.0));
}
inline Verdict classify_hyperbolic(int n, double kappa, const PotentialEnvelope& env, const RadialPotential& V) {
  return detail::checked(classify_hyperbolic(n, kappa, env), detail::envelope_holds(V, env, n, kappa));
}
inline Verdict classify_ale(int n, const PotentialEnvelope& env, const RadialPotential& V) {
  return detail::checked(classify_ale(n, env), detail::envelope_holds(V, env, n, 0.0));
}
inline Verdict classify_ah(int n, const PotentialEnvelope& env, const RadialPotential& V) {
  return detail::checked(classify_ah(n, env), detail::envelope_holds(V, env, n, 0.0));
}
inline Verdict classify_berger(const PotentialEnvelope& env, const RadialPotential& V) {
  return detail::checked(classify_berger(env), detail::envelope_holds(V, env, 4, 0.0));
}

/// 1 - (2n-5) delta1 + (n^2-4) delta2
inline double theorem31_margin(int n, double delta1, double delta2) {
  if (n < 2) throw DomainError("margin requires n >= 2");
  if (delta1 < delta2) throw DomainError("margin requires delta1 >= delta2");
  const double nn = static_cast<double>(n);
  return 1.0 - (2.0 * nn - 5.0) * delta1 + (nn * nn - 4.0) * delta2;
}

inline Verdict classify_pinched(int n, double kappa, double delta1, double delta2) {
  if (!(kappa > 0.0)) throw DomainError("pinched rule requires kappa > 0");
  const double margin = theorem31_margin(n, delta1, delta2);
  const double m = static_cast<double>(n - 1);
  Verdict v;
  v.threshold = m * m * kappa / 4.0;
  v.notes = {"unchecked: Hess r >= 0 on the boundary of the compact core",
             "unchecked: nonpositive radial sectional curvatures",
             "unchecked: two-sided radial curvature pinching with constants delta1, delta2",
             "margin = " + std::to_string(margin)};
  if (margin > 0.0) {
    v.result = SpectrumResult::Finite;
    v.theorem = "pinched-finite";
  } else {
    v.result = SpectrumResult::Indeterminate;
    v.theorem = "pinched-none";
  }
  return v;
}

/// Diagnostic lower bound on the weight under radial pinching, with
/// t = sqrt(kappa) + delta2/(2 sqrt(kappa) r^2), T = sqrt(kappa) + delta1/(2 sqrt(kappa) r^2):
///   [-(2n-5) T^2 + (n^2-2n-2) t^2]/4 + (n-1)(kappa + delta2/r^2)/2 + 1/(4r^2).
/// Lower-order remainders are dropped, so this is not a certified bound.
inline double pinched_weight_lower_bound(int n, double kappa, double delta1, double delta2, double r) {
  if (n < 2) throw DomainError("pinched bound requires n >= 2");
  if (!(kappa > 0.0)) throw DomainError("pinched bound requires kappa > 0");
  if (!(r > 0.0)) throw DomainError("pinched bound requires r > 0");
  if (delta1 < delta2) throw DomainError("pinched bound requires delta1 >= delta2");
  const double sk = std::sqrt(kappa);
  const double t = sk + delta2 / (2.0 * sk * r * r);
  const double T = sk + delta1 / (2.0 * sk * r * r);
  if (t < 0.0 || T < 0.0) throw DomainError("pinched bound outside its asymptotic range (t or T negative)");
  const double nn = static_cast<double>(n);
  return 0.25 * (-(2.0 * nn - 5.0) * T * T + (nn * nn - 2.0 * nn - 2.0) * t * t) +
         0.5 * (nn - 1.0) * (kappa + delta2 / (r * r)) + 0.25 / (r * r);
}

}  // namespace warpspec
