#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "normbranch/errors.hpp"
#include "normbranch/profile.hpp"
#include "normbranch/shooter.hpp"
#include "normbranch/verify.hpp"

using namespace normbranch;

namespace {

// DOP853 at rtol 1e-13 with a Brent search on u(0), N=3, q=6, λ = λ₁/2
constexpr double kOracleRhoHalf3 = 1.331241039044648;
constexpr double kOracleCenterHalf3 = 3.1184521861476022;

ProblemSpec linear(int N) {
  ProblemSpec s;
  s.dimension = N;
  s.eta = 0.0;
  s.q = 6.0;
  return s;
}

ProblemSpec bn(int N) {
  ProblemSpec s;
  s.dimension = N;
  s.q = critical_exponent(N);
  return s;
}

}  // namespace

TEST_CASE("linear N=3 shot reproduces sin(πr)/(πr) and its mass 2/π") {
  const double pi = std::numbers::pi;
  const ShotResult shot = integrate_from_center(1.0, -pi * pi, linear(3), [] {
    ShotOptions o;
    o.stopAtFirstZero = false;
    return o;
  }());
  double err = 0.0;
  for (const auto& s : shot.profile) {
    const double exact = s.r > 0.0 ? std::sin(pi * s.r) / (pi * s.r) : 1.0;
    err = std::max(err, std::abs(s.u - exact));
  }
  CHECK(err <= 1e-8);
  RadialProfile p = shot.profile;
  p.back().u = 0.0;
  const Norms n = norms_of(p, linear(3));
  CHECK(std::abs(n.rho - 2.0 / pi) <= 1e-10);
}

TEST_CASE("linear N=1 shot gives cos(πr/2)") {
  const double pi = std::numbers::pi;
  ShotOptions o;
  o.stopAtFirstZero = false;
  const ShotResult shot = integrate_from_center(1.0, -pi * pi / 4, linear(1), o);
  for (const auto& s : shot.profile) CHECK(s.u == doctest::Approx(std::cos(pi * s.r / 2)).epsilon(1e-8));
}

TEST_CASE("shots are classified by the sign of the miss") {
  const ProblemSpec s = bn(3);
  const double om = -0.5 * lambda1(3, 1.0);
  const ShotResult small = integrate_from_center(1e-3, om, s);
  const ShotResult large = integrate_from_center(1e3, om, s);
  CHECK(small.classification == ShotClass::Undershoot);
  CHECK(large.classification == ShotClass::Overshoot);
  CHECK(small.miss > 0.0);
  CHECK(large.miss < 0.0);
  CHECK(large.crossings >= 1);
}

TEST_CASE("Brezis-Nirenberg window for N=3") {
  const double l1 = lambda1(3, 1.0);
  for (double f : {0.05, 0.15, 0.24}) {
    try {
      shoot_ground_state(-f * l1, bn(3));
      FAIL("expected NoBracket at lambda/lambda1 = " << f);
    } catch (const SolverError& e) {
      CHECK(e.kind() == ErrorKind::NoBracket);
    }
  }
  for (double f : {0.3, 0.5, 0.9}) {
    const RadialSolution sol = shoot_ground_state(-f * l1, bn(3));
    CHECK(sol.rho > 0.0);
    CHECK(sol.uniquenessKnown);
    CHECK(pohozaev_residual(sol) < 1e-6);
  }
  CHECK_THROWS_AS(shoot_ground_state(-1.01 * l1, bn(3)), SolverError);
}

TEST_CASE("N=3, λ = λ₁/2 against an independent high-order shooting oracle") {
  const RadialSolution sol = shoot_ground_state(-0.5 * lambda1(3, 1.0), bn(3));
  CHECK(sol.rho == doctest::Approx(kOracleRhoHalf3).epsilon(1e-8));
  CHECK(sol.centerValue == doctest::Approx(kOracleCenterHalf3).epsilon(1e-8));
}

TEST_CASE("solution profile is positive, decreasing and vanishes at R") {
  const RadialSolution sol = shoot_ground_state(-0.5 * lambda1(4, 1.0), bn(4));
  for (std::size_t i = 1; i < sol.profile.size(); ++i) {
    CHECK(sol.profile[i].u <= sol.profile[i - 1].u + 1e-12);
    CHECK(sol.profile[i].du <= 1e-12);
  }
  CHECK(std::abs(sol.profile.back().u) < 1e-8 * sol.centerValue);
  CHECK(sol.profile.front().u == doctest::Approx(sol.centerValue));
}

TEST_CASE("warm start reaches the same solution") {
  const ProblemSpec s = bn(5);
  const double om = -0.4 * lambda1(5, 1.0);
  const RadialSolution a = shoot_ground_state(om, s);
  ShootOptions o;
  o.centerHint = 1.3 * a.centerValue;
  const RadialSolution b = shoot_ground_state(om, s, o);
  CHECK(b.rho == doctest::Approx(a.rho).epsilon(1e-9));
  CHECK(sup_distance(a.profile, b.profile) < 1e-7 * a.centerValue);
}

TEST_CASE("shoot_all and solve_in_bracket") {
  const ProblemSpec s = bn(4);
  const double om = -0.5 * lambda1(4, 1.0);
  const auto all = shoot_all(om, s);
  REQUIRE(all.size() == 1);
  const RadialSolution g = shoot_ground_state(om, s);
  CHECK(all.front().rho == doctest::Approx(g.rho).epsilon(1e-9));
  const RadialSolution b = solve_in_bracket(om, s, 0.5 * g.centerValue, 2.0 * g.centerValue);
  CHECK(b.centerValue == doctest::Approx(g.centerValue).epsilon(1e-9));
  CHECK(shoot_all(-0.1 * lambda1(3, 1.0), bn(3)).empty());
}

TEST_CASE("norms of a solution satisfy the Nehari identity") {
  ProblemSpec s;
  s.dimension = 3;
  s.mu = 1.0;
  s.p = 3.0;
  s.q = 4.0;
  const RadialSolution sol = shoot_ground_state(2.0, s);
  CHECK(std::abs(sol.gradNormSq + sol.omega * sol.rho - sol.lpNorm - sol.lqNorm) < 1e-8 * sol.gradNormSq);
  CHECK(sol.energy == doctest::Approx(0.5 * sol.gradNormSq - sol.lpNorm / 3.0 - sol.lqNorm / 4.0));
}
