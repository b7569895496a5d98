#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "warpspec/spectrum.hpp"

using namespace warpspec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr std::pair<Boundary, Boundary> DD{Boundary::Dirichlet, Boundary::Dirichlet};
constexpr std::pair<Boundary, Boundary> NN{Boundary::Neumann, Boundary::Neumann};

ReducedOperator constant(double q, double a = -1e9) {
  return ReducedOperator::from_function([q](double) { return q; }, a);
}

Eigen::VectorXd dense_eigenvalues(const Tridiagonal& T) {
  const auto n = static_cast<Eigen::Index>(T.size());
  if (T.mass.empty()) {
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(T.diag.data(), n);
    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(T.offdiag.data(), n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n), M = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = T.diag[static_cast<std::size_t>(i)];
    M(i, i) = T.mass_at(static_cast<std::size_t>(i));
    if (i + 1 < n) K(i, i + 1) = K(i + 1, i) = T.offdiag[static_cast<std::size_t>(i)];
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

std::size_t dense_count(const Eigen::VectorXd& ev, double E) {
  std::size_t c = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) c += ev(i) < E ? 1 : 0;
  return c;
}

// closed-form Dirichlet count for -u'' - (c/4) u / t^2 on [a, L]:
// in x = log t the operator is -v'' + (1 - c)/4 v with Dirichlet ends
std::size_t inverse_square_count(double c, double a, double L) {
  const double m = 0.25 * (c - 1.0);
  if (m <= 0.0) return 0;
  const double ell = std::log(L / a);
  std::size_t j = 0;
  while ((j + 1) * std::numbers::pi < std::sqrt(m) * ell) ++j;
  return j;
}

}  // namespace

TEST_CASE("discretization of the free operator on [0, pi]") {
  const auto Q0 = constant(0.0);
  const Tridiagonal T = discretize(Q0, 0.0, std::numbers::pi, 2000);
  CHECK(T.size() == 1998);
  CHECK_THAT(eigenvalue_by_bisection(T, 0), WithinAbs(1.0, 1e-5));
  CHECK(count_below(T, 5.0) == 2);
  const auto ev = smallest_eigenvalues(T, 3);
  CHECK_THAT(ev[1], WithinAbs(4.0, 1e-4));
  CHECK_THAT(ev[2], WithinAbs(9.0, 1e-4));
}

TEST_CASE("constant shift lands on the diagonal") {
  const Tridiagonal T = discretize(constant(5.0), 0.0, 2.0, 41);
  for (double d : T.diag) CHECK_THAT(d, WithinRel(2.0 / (T.h_step * T.h_step) + 5.0, 1e-15));
  for (double e : T.offdiag) CHECK_THAT(e, WithinRel(-1.0 / (T.h_step * T.h_step), 1e-15));
}

TEST_CASE("Neumann ends keep the constant mode") {
  const Tridiagonal T = discretize(constant(0.0), 0.0, 1.0, 201, NN);
  CHECK(T.size() == 201);
  CHECK_THAT(eigenvalue_by_bisection(T, 0), WithinAbs(0.0, 1e-8));
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK_THAT(eigenvalue_by_bisection(T, 1), WithinRel(pi2, 1e-4));
  // mixed ends: cos((j + 1/2) pi t) spectrum
  const Tridiagonal M = discretize(constant(0.0), 0.0, 1.0, 401, {Boundary::Neumann, Boundary::Dirichlet});
  CHECK_THAT(eigenvalue_by_bisection(M, 0), WithinRel(pi2 / 4.0, 1e-4));
  const Tridiagonal two = discretize(constant(0.0), 0.0, 1.0, 2, NN);
  CHECK(two.size() == 2);
  CHECK_THAT(eigenvalue_by_bisection(two, 0), WithinAbs(0.0, 1e-12));
}

TEST_CASE("discretization errors") {
  const auto sing = ReducedOperator::from_function([](double t) { return -1.0 / (t * t); }, 0.0);
  CHECK_THROWS_AS(discretize(sing, 0.0, 1.0, 100), DomainError);
  CHECK_THROWS_AS(discretize(sing, 0.0, 1.0, 100, NN), DomainError);
  CHECK_THROWS_AS(discretize(constant(0.0), 1.0, 1.0, 100), DomainError);
  CHECK_THROWS_AS(discretize(constant(0.0), 0.0, 1.0, 1), DomainError);
  CHECK_THROWS_AS(discretize(constant(0.0), 0.0, 1.0, 2), DomainError);
  CHECK_THROWS_AS(discretize(constant(0.0), 1.0, 2.0, 10, NN, Coordinate::LogMapped), DomainError);
  CHECK_THROWS_AS(discretize(constant(0.0), 0.0, 2.0, 10, DD, Coordinate::LogMapped), DomainError);
}

TEST_CASE("count below examples") {
  const Tridiagonal T = discretize(constant(0.0), 0.0, std::numbers::pi, 400);
  CHECK(count_below(T, gershgorin_bounds(T).first - 1.0) == 0);
  CHECK(count_below(T, gershgorin_bounds(T).second + 1.0) == T.size());
  const auto ho = ReducedOperator::from_function([](double t) { return t * t; }, -20.0, 20.0);
  CHECK(count_below(discretize(ho, -20.0, 20.0, 4001), 6.0) == 3);
  const auto lv = smallest_eigenvalues(discretize(ho, -20.0, 20.0, 4001), 3);
  CHECK_THAT(lv[0], WithinAbs(1.0, 1e-4));
  CHECK_THAT(lv[1], WithinAbs(3.0, 1e-4));
  CHECK_THAT(lv[2], WithinAbs(5.0, 1e-4));
}

TEST_CASE("zero pivots are handled") {
  // 2x2 with eigenvalues 0 and 2; pivot is exactly zero at E = 1
  const Tridiagonal T = Tridiagonal::symmetric({1.0, 1.0}, {1.0});
  CHECK(count_below(T, 1.0) == 1);
  CHECK(count_below(T, 0.0) == 0);
  CHECK(count_below(T, 2.0) == 1);
  CHECK(count_below(T, 2.0 + 1e-12) == 2);
  const Tridiagonal Z = Tridiagonal::symmetric({0.0, 0.0, 0.0}, {0.0, 0.0});
  CHECK(count_below(Z, 0.0) == 0);
  CHECK(count_below(Z, 1e-300) == 3);
}

TEST_CASE("Sturm count matches a dense eigensolver") {
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<int> size(1, 200);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::uniform_real_distribution<double> mass(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<std::size_t>(size(rng));
    Tridiagonal T;
    T.diag.resize(n);
    T.offdiag.resize(n - 1);
    for (double& d : T.diag) d = val(rng);
    for (double& e : T.offdiag) e = val(rng);
    if (trial % 2 == 1) {
      T.mass.resize(n);
      for (double& m : T.mass) m = mass(rng);
    }
    const Eigen::VectorXd ev = dense_eigenvalues(T);
    for (int j = 0; j < 5; ++j) {
      const double E = 2.0 * val(rng);
      INFO("trial " << trial << " n=" << n << " E=" << E);
      CHECK(count_below(T, E) == dense_count(ev, E));
    }
    const std::vector<double> bis = smallest_eigenvalues(T, std::min<std::size_t>(n, 4));
    for (std::size_t k = 0; k < bis.size(); ++k)
      CHECK_THAT(bis[k], WithinAbs(ev(static_cast<Eigen::Index>(k)), 1e-10 * std::max(1.0, std::abs(bis[k]))));
  }
}

TEST_CASE("Dirichlet eigenvalues converge at second order") {
  const auto Q0 = constant(0.0);
  std::vector<std::vector<double>> e;
  for (std::size_t N : {101u, 201u, 401u}) {
    const auto ev = smallest_eigenvalues(discretize(Q0, 0.0, std::numbers::pi, N), 5);
    std::vector<double> row;
    for (std::size_t j = 0; j < 5; ++j) row.push_back(std::abs(ev[j] - double((j + 1) * (j + 1))));
    e.push_back(row);
  }
  for (std::size_t j = 0; j < 5; ++j) {
    const double p1 = std::log2(e[0][j] / e[1][j]);
    const double p2 = std::log2(e[1][j] / e[2][j]);
    CHECK_THAT(p1, WithinAbs(2.0, 0.05));
    CHECK_THAT(p2, WithinAbs(2.0, 0.05));
  }
}

TEST_CASE("log-mapped and uniform discretizations agree on a short interval") {
  const auto Q = ReducedOperator::from_function([](double t) { return -3.0 / (t * t) + 0.1 * t; }, 1.0);
  const auto u = smallest_eigenvalues(discretize(Q, 1.0, 8.0, 8001), 3);
  const auto m = smallest_eigenvalues(discretize(Q, 1.0, 8.0, 8001, DD, Coordinate::LogMapped), 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK_THAT(m[j], WithinAbs(u[j], 1e-4 * std::max(1.0, std::abs(u[j]))));
  for (double E : {-1.0, -0.2, 0.0, 0.5, 2.0})
    CHECK(count_below(discretize(Q, 1.0, 8.0, 8001), E) ==
          count_below(discretize(Q, 1.0, 8.0, 8001, DD, Coordinate::LogMapped), E));
}

TEST_CASE("truncation sweep on the Euclidean inverse-square family") {
  const auto g = ModelGeometry::make(3, Euclidean{}, 1.0);
  const std::vector<double> Ls = {1e2, 1e3, 1e4, 1e5};

  const CountReport sub = truncation_sweep(g, InverseSquare{4.0}, 1.0, Ls);
  for (std::size_t i = 0; i < Ls.size(); ++i) CHECK(sub.counts[i] == inverse_square_count(4.0, 1.0, Ls[i]));
  CHECK(sub.counts == std::vector<std::size_t>{1, 1, 2, 3});

  const CountReport border = truncation_sweep(g, InverseSquare{1.0}, 1.0, Ls);
  CHECK(border.counts == std::vector<std::size_t>{0, 0, 0, 0});
  CHECK(border.classification == SweepClass::Stabilized);

  const CountReport zero = truncation_sweep(g, ZeroPotential{}, 1.0, Ls);
  CHECK(zero.classification == SweepClass::Stabilized);
  CHECK(zero.counts == std::vector<std::size_t>{0, 0, 0, 0});

  const auto g4 = ModelGeometry::make(4, Euclidean{}, 1.0);
  const CountReport four = truncation_sweep(g4, InverseSquare{16.0}, 1.0, Ls);
  for (std::size_t i = 0; i < Ls.size(); ++i)
    CHECK(four.counts[i] == inverse_square_count(16.0 - 3.0, 1.0, Ls[i]));  // Q = -13/(4t^2)
  CHECK(four.classification == SweepClass::Growing);
}

TEST_CASE("sweep counts agree with a dense oracle at small size") {
  // uniform-t dense oracle on [1, 100]
  const auto g = ModelGeometry::make(3, Euclidean{}, 1.0);
  for (double c : {1.0, 4.0, 40.0}) {
    const auto Q = liouville_potential(g, InverseSquare{c});
    const Tridiagonal T = discretize(Q, 1.0, 100.0, 1601);
    const std::size_t dense = dense_count(dense_eigenvalues(T), -1e-10);
    const CountReport rep = truncation_sweep(g, InverseSquare{c}, 1.0, {100.0});
    INFO("c=" << c);
    CHECK(rep.counts[0] == dense);
    CHECK(rep.counts[0] == inverse_square_count(c, 1.0, 100.0));
  }
}

TEST_CASE("sweep on other models and threshold shift") {
  const auto h = ModelGeometry::make(3, Hyperbolic{1.0}, 1.0);
  const CountReport free = truncation_sweep(h, ZeroPotential{}, 1.0, {1e1, 1e2, 1e3});
  CHECK(free.threshold == 1.0);
  CHECK(free.counts == std::vector<std::size_t>{0, 0, 0});
  const CountReport sup = truncation_sweep(h, InverseSquare{4.0}, 1.0, {1e2, 1e4, 1e6});
  CHECK(sup.classification == SweepClass::Growing);
  const auto b = ModelGeometry::make(4, BergerExpShrink{1.0}, 1.0);
  CHECK(truncation_sweep(b, ZeroPotential{}, 1.0, {1e1, 1e2, 1e3}).classification == SweepClass::Stabilized);
}

TEST_CASE("sweep is deterministic and counts are monotone") {
  const auto g = ModelGeometry::make(3, Euclidean{}, 1.0);
  std::vector<double> Ls;
  for (double L = 4.0; L <= 1e5; L *= 2.0) Ls.push_back(L);
  SweepOptions serial;
  serial.parallel = false;
  const CountReport a = truncation_sweep(g, InverseSquare{9.0}, 1.0, Ls);
  const CountReport b = truncation_sweep(g, InverseSquare{9.0}, 1.0, Ls, serial);
  CHECK(a.counts == b.counts);
  for (std::size_t i = 1; i < a.counts.size(); ++i) CHECK(a.counts[i] >= a.counts[i - 1]);
}

TEST_CASE("sweep argument checks") {
  const auto g = ModelGeometry::make(3, Euclidean{}, 1.0);
  CHECK_THROWS_AS(truncation_sweep(g, ZeroPotential{}, 1.0, {}), ConfigError);
  CHECK_THROWS_AS(truncation_sweep(g, ZeroPotential{}, 1.0, {10.0, 5.0}), ConfigError);
  CHECK_THROWS_AS(truncation_sweep(g, ZeroPotential{}, 0.5, {10.0}), DomainError);
  CHECK_THROWS_AS(truncation_sweep(g, ZeroPotential{}, 1.0, {1.0}), DomainError);
}

TEST_CASE("count classification rule") {
  CHECK(classify_counts({0, 0, 0}) == SweepClass::Stabilized);
  CHECK(classify_counts({1, 2, 3, 3, 3}) == SweepClass::Stabilized);
  CHECK(classify_counts({1, 2, 3}) == SweepClass::Growing);
  CHECK(classify_counts({1, 1, 2, 3}) == SweepClass::Inconclusive);
  CHECK(classify_counts({2}) == SweepClass::Inconclusive);
}

TEST_CASE("Neumann bracketing of the free operator") {
  const BracketReport rep = neumann_bracket(constant(0.0), 0.0, 1.0, 0.5, 400.0, 401);
  CHECK(rep.split == 0.5);
  REQUIRE(rep.full.size() >= 3);
  CHECK_THAT(rep.merged[0], WithinAbs(0.0, 1e-8));
  CHECK_THAT(rep.merged[1], WithinAbs(0.0, 1e-8));
  CHECK_THAT(rep.full[0], WithinAbs(0.0, 1e-8));
  CHECK(rep.max_violation < 1e-10);
  // closed form: full (j pi)^2, halves (2 j pi)^2 twice each
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK_THAT(rep.full[1], WithinRel(pi2, 1e-4));
  CHECK_THAT(rep.merged[2], WithinRel(4.0 * pi2, 1e-4));
  CHECK_THROWS_AS(neumann_bracket(constant(0.0), 0.0, 1.0, 1.5, 1.0, 101), DomainError);
}

TEST_CASE("Neumann bracketing with random bounded potentials") {
  std::mt19937_64 rng(90210);
  std::uniform_real_distribution<double> coef(-5.0, 5.0), split(0.1, 0.9);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
    const auto Q = ReducedOperator::from_function(
        [=](double t) { return c1 * std::sin(3.0 * t) + c2 * t * t + c3 * std::cos(7.0 * t); }, 0.0, 2.0);
    const BracketReport rep = neumann_bracket(Q, 0.0, 2.0, 2.0 * split(rng), 60.0, 301);
    worst = std::max(worst, rep.max_violation);
    // dense oracle for the full list
    const Eigen::VectorXd ev = dense_eigenvalues(discretize(Q, 0.0, 2.0, 301, NN));
    for (std::size_t i = 0; i < rep.full.size(); ++i)
      CHECK_THAT(rep.full[i], WithinAbs(ev(static_cast<Eigen::Index>(i)), 1e-8));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("min-max lower bound") {
  const auto g = ModelGeometry::make(3, Euclidean{}, 1.0);
  const auto Q = shifted(liouville_potential(g, InverseSquare{5.0}), 0.0);
  CHECK(minmax_lower_bound({}, Q, 1.0, 7000.0, 101).lower_bound == 0);

  const auto fam = witness_family(g, InverseSquare{5.0}, 4.0, 1.0, 2);
  const MinmaxReport rep = minmax_lower_bound(fam, Q, 1.0, 7000.0, 2001);
  CHECK(rep.lower_bound == 2);
  CHECK(rep.sturm_count >= 2);
  CHECK(rep.sturm_count == count_below(discretize(Q, 1.0, 7000.0, rep.nodes, DD, Coordinate::LogMapped), 0.0));

  // too coarse to start with: refinement recovers the count
  const MinmaxReport coarse = minmax_lower_bound(fam, Q, 1.0, 7000.0, 3);
  CHECK(coarse.sturm_count >= 2);
  CHECK(coarse.nodes > 3);
  CHECK_THROWS_AS(minmax_lower_bound(fam, Q, 1.0, 7000.0, 3, 4), RefinementCapError);
  CHECK_THROWS_AS(minmax_lower_bound(fam, Q, 2.0, 7000.0, 101), DomainError);

  // members built on a supercritical envelope but scored against a subcritical Q
  auto positive = fam;
  const auto Qsub = shifted(liouville_potential(g, InverseSquare{1.0}), 0.0);
  for (auto& w : positive)
    w.form_value = form_value(Qsub, w.reduced, Grid1D{w.lo(), w.hi(), 8193, QuadratureRule::Simpson, Spacing::Logarithmic});
  for (const auto& w : positive) CHECK(w.form_value >= 0.0);
  CHECK(minmax_lower_bound(positive, Qsub, 1.0, 7000.0, 101).lower_bound == 0);
}
