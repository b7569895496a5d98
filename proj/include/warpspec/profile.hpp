#pragma once

// Radial functions with analytic first derivative. Anything exposing
// value(t) and derivative(t) can be fed to the quadratic-form evaluators;
// support() and breakpoints() are optional refinements.

#include <concepts>
#include <limits>
#include <utility>
#include <vector>

namespace warpspec {

template <class P>
concept RadialProfile = requires(const P& p, double t) {
  { p.value(t) } -> std::convertible_to<double>;
  { p.derivative(t) } -> std::convertible_to<double>;
};

template <class P>
concept CompactlySupported = RadialProfile<P> && requires(const P& p) {
  { p.support() } -> std::convertible_to<std::pair<double, double>>;
};

template <class P>
concept HasBreakpoints = RadialProfile<P> && requires(const P& p) {
  { p.breakpoints() } -> std::convertible_to<std::vector<double>>;
};

template <RadialProfile P>
std::pair<double, double> support_of(const P& p) {
  if constexpr (CompactlySupported<P>) {
    return p.support();
  } else {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
}

template <RadialProfile P>
std::vector<double> breakpoints_of(const P& p) {
  if constexpr (HasBreakpoints<P>) {
    return p.breakpoints();
  } else {
    return {};
  }
}

}  // namespace warpspec
