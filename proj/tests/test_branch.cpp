#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "normbranch/branch.hpp"
#include "normbranch/errors.hpp"

using namespace normbranch;

namespace {

// max of ρ(λ) from an independent DOP853 shooter with Brent on u(0) and a
// bounded scalar maximization in λ
constexpr double kOracleRhoStar[] = {1.6027881079794801, 5.8694205801868105, 28.5681691506667};
// same oracle, N=3 at the upper 1%-offset end λ = 0.9925λ₁
constexpr double kOracleRhoUpperEnd3 = 0.34556665958506566;

ProblemSpec bn(int N) {
  ProblemSpec s;
  s.dimension = N;
  s.q = critical_exponent(N);
  return s;
}

Branch traced(int N, bool parallel = true, double step = 0.01) {
  const auto w = offset_window(admissible_window(bn(N)), 0.01);
  StepPolicy p;
  p.parallel = parallel;
  p.initialStep = step;
  return trace_branch(bn(N), w.first, w.second, p);
}

}  // namespace

TEST_CASE("admissible windows") {
  const double l1 = lambda1(3, 1.0);
  auto w = admissible_window(bn(3));
  CHECK(w.first == doctest::Approx(l1 / 4));
  CHECK(w.second == doctest::Approx(l1));
  CHECK(admissible_window(bn(4)).first == 0.0);
  const auto o = offset_window({0.0, 10.0}, 0.01);
  CHECK(o.first == doctest::Approx(0.1));
  CHECK(o.second == doctest::Approx(9.9));
}

TEST_CASE("rho star matches the oracle and the dichotomy counts hold") {
  for (int N = 3; N <= 5; ++N) {
    CAPTURE(N);
    const Branch b = traced(N);
    const RhoStar r = find_rho_star(b);
    CHECK(std::abs(r.rhoStar / kOracleRhoStar[N - 3] - 1.0) < 1e-6);
    CHECK(b.points.front().rho < 0.1 * r.rhoStar);
    // for N=3 the mass vanishes only like (λ₁ - λ)^{1/2} at the upper end
    if (N == 3) CHECK(b.points.back().rho == doctest::Approx(kOracleRhoUpperEnd3).epsilon(1e-8));
    else CHECK(b.points.back().rho < 0.1 * r.rhoStar);
    CHECK(solve_normalized(b, 0.5 * r.rhoStar, r).solutions.size() == 2);
    CHECK(solve_normalized(b, r.rhoStar, r).solutions.size() == 1);
    CHECK(solve_normalized(b, 1.5 * r.rhoStar, r).solutions.empty());
    for (const auto& p : b.points) CHECK(p.pohozaevResidual < 1e-6);
  }
}

TEST_CASE("normalized solutions have the requested mass") {
  const Branch b = traced(4);
  const RhoStar r = find_rho_star(b);
  const NormalizedSet s = solve_normalized(b, 0.3 * r.rhoStar, r);
  REQUIRE(s.solutions.size() == 2);
  for (const auto& p : s.solutions) CHECK(p.rho == doctest::Approx(0.3 * r.rhoStar).epsilon(1e-10));
  CHECK(s.solutions[0].lambda < r.lambdaStar);
  CHECK(s.solutions[1].lambda > r.lambdaStar);
  CHECK_FALSE(s.countIsLowerBound);
}

TEST_CASE("serial warm-started march matches the parallel kernel") {
  const Branch a = traced(3, true, 0.05);
  const Branch b = traced(3, false, 0.05);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].lambda == b.points[i].lambda);
    CHECK(a.points[i].rho == doctest::Approx(b.points[i].rho).epsilon(1e-7));
  }
}

TEST_CASE("edges: failed ends are bisected and classified") {
  // N=3 window extended below λ₁/4 where no solution exists
  const double l1 = lambda1(3, 1.0);
  StepPolicy p;
  p.initialStep = 0.05;
  const Branch b = trace_branch(bn(3), 0.1 * l1, 0.9 * l1, p);
  CHECK(b.lowStatus != EndpointStatus::BoundaryOfWindow);
  CHECK(b.points.front().lambda > 0.25 * l1);
  CHECK(b.points.front().lambda < 0.25 * l1 + 0.05 * 0.8 * l1);
  CHECK(b.highStatus == EndpointStatus::BoundaryOfWindow);
  CHECK_THROWS_AS(trace_branch(bn(3), 0.01 * l1, 0.2 * l1, p), SolverError);
}

TEST_CASE("no interior max is reported") {
  const double l1 = lambda1(4, 1.0);
  StepPolicy p;
  p.initialStep = 0.1;
  const Branch b = trace_branch(bn(4), 0.6 * l1, 0.95 * l1, p);
  try {
    find_rho_star(b);
    FAIL("expected NoInteriorMax");
  } catch (const SolverError& e) {
    CHECK(e.kind() == ErrorKind::NoInteriorMax);
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(trace_branch(bn(3), 5.0, 4.0), std::invalid_argument);
  StepPolicy p;
  p.initialStep = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  const Branch b = traced(3, true, 0.05);
  CHECK_THROWS_AS(solve_normalized(b, -1.0), std::invalid_argument);
}

TEST_CASE("mass supremum probe on the critical problem with p = 2") {
  ProblemSpec s;
  s.dimension = 3;
  s.mu = 1.0;
  s.p = 2.0;
  s.q = 6.0;
  ProbeConfig c;
  c.samples = 120;
  const MassSupremum m = mass_supremum_probe(s, c);
  // ω ↦ λ = 1 - ω maps the branch onto the μ = 0 one
  CHECK(std::abs(m.rhoSup / kOracleRhoStar[0] - 1.0) < 1e-6);
  CHECK(m.windowRespected);
  CHECK(solve_normalized(s, 2.0 * m.rhoSup).solutions.empty());
  s.mu = -1.0;
  CHECK_THROWS_AS(mass_supremum_probe(s, c), std::invalid_argument);
}
