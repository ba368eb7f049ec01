#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "normbranch/profile.hpp"
#include "normbranch/shooter.hpp"
#include "normbranch/varflow.hpp"

using namespace normbranch;

namespace {

// ‖W‖₆/(‖W'‖^{1/3}‖W‖^{2/3}) on R for W = (3 sech²(2x))^{1/4}, 30 digits
constexpr double kGnOneSix = 0.860254013828099625;

std::shared_ptr<const Mesh> mesh(int N, int n) { return std::make_shared<const Mesh>(N, 1.0, n); }

}  // namespace

TEST_CASE("mesh weights cover the ball up to the eliminated boundary cell") {
  for (int N = 1; N <= 5; ++N) {
    const auto m = mesh(N, 400);
    double w = 0.0;
    for (double x : m->weights()) w += x;
    CHECK(w == doctest::Approx(ball_volume(N, 1.0 - 0.5 * m->h())).epsilon(1e-12));
    CHECK(m->weights()[0] > 0.0);
  }
}

TEST_CASE("discrete Rayleigh quotient of φ₁ converges to λ₁ at second order") {
  double prev = 0.0;
  for (int n : {500, 1000, 2000}) {
    const Field u = sample_field(mesh(3, n), first_eigenfunction(3, 1.0));
    const double err = std::abs(u.grad_norm_sq() / u.mass() - lambda1(3, 1.0));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("linear flow finds the first eigenpair") {
  ProblemSpec s;
  s.dimension = 4;
  s.q = 4.0;
  s.eta = 0.0;
  const auto m = mesh(4, 1000);
  const Field u0 = sample_field(m, [](double r) { return 1.0 - r * r; });
  FlowConfig c;
  c.certify = false;
  const FlowResult r = flow_to_minimizer(s, 1.0, u0, c);
  CHECK(r.omega == doctest::Approx(-lambda1(4, 1.0)).epsilon(1e-5));
  CHECK(r.positive);
  CHECK(r.u.mass() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("flow minimizer agrees with the shooter at its frequency") {
  ProblemSpec s;
  s.dimension = 4;
  s.mu = 1.0;
  s.p = 3.0;
  s.q = 4.0;
  const auto m = mesh(4, 2000);
  const FlowResult r = flow_to_minimizer(s, 0.1, sample_field(m, first_eigenfunction(4, 1.0)));
  CHECK(r.inAlphaInterior);
  CHECK(r.boundaryCertificate);
  CHECK(r.energy < r.boundaryLevel);
  CHECK(r.maxEnergyIncrease <= 1e-12 * std::abs(r.energy) + 1e-300);
  const RadialSolution sol = shoot_ground_state(r.omega, s);
  CHECK(sol.rho == doctest::Approx(0.1).epsilon(1e-5));
  CHECK(sol.energy == doctest::Approx(r.energy).epsilon(1e-5));
}

TEST_CASE("resample and Richardson recover a smooth profile") {
  auto f = [](double r) { return std::cos(1.5707963267948966 * r); };
  const Field coarse = sample_field(mesh(3, 200), f);
  const Field fine = resample(coarse, mesh(3, 400));
  double err = 0.0;
  for (int i = 0; i < fine.size(); ++i) err = std::max(err, std::abs(fine[i] - f(fine.mesh().node(i))));
  CHECK(err < 1e-7);
  const Field rich = richardson(coarse, sample_field(mesh(3, 400), f));
  for (int i = 0; i < rich.size(); ++i) CHECK(rich[i] == doctest::Approx(f(rich.mesh().node(i))).epsilon(1e-12));
}

TEST_CASE("Gagliardo-Nirenberg constant for N=1, q=6 against the sech profile") {
  const GnResult g = gn_best_constant(1, 6.0);
  CHECK(std::abs(g.constant / kGnOneSix - 1.0) < 2e-6);
  CHECK(g.boundaryRatio < 1e-10);
  CHECK(gn_constant_cached(1, 6.0) == g.constant);
  GnConfig small;
  small.radius = 3.0;
  CHECK_THROWS_AS(gn_best_constant(1, 6.0, small), SolverError);
}

TEST_CASE("GN quotient of any field stays below the best constant") {
  const double C = gn_constant_cached(3, 3.0);
  const auto m = std::make_shared<const Mesh>(3, 30.0, 6000);
  const Field g = sample_field(m, [](double r) { return std::exp(-r * r); });
  const Field e = sample_field(m, [](double r) { return 1.0 / std::cosh(r); });
  CHECK(gn_quotient(g, 3.0) < C);
  CHECK(gn_quotient(e, 3.0) < C);
  CHECK(gn_quotient(e, 3.0) > 0.9 * C);
}

TEST_CASE("theta curve: starts near λ₁ and decreases") {
  const double S = sobolev_constant(4);
  std::vector<double> eps;
  for (double f : {0.02, 0.3, 0.6, 0.9}) eps.push_back(f * S);
  MeshConfig mc;
  mc.intervals = 1000;
  const auto pts = theta_curve(4, 1.0, eps, mc);
  REQUIRE(pts.size() == 4);
  CHECK(std::abs(pts[0].theta / lambda1(4, 1.0) - 1.0) < 0.05);
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].theta < pts[i - 1].theta);
  for (const auto& p : pts) CHECK(p.converged);
  CHECK_THROWS_AS(theta_curve(4, 1.0, {1.1 * S}), std::invalid_argument);
}

TEST_CASE("boundary level lower bound argument checks") {
  ProblemSpec s;
  s.dimension = 3;
  s.q = 7.0;
  CHECK_THROWS_AS(boundary_level_lower_bound(30.0, 0.1, s), std::invalid_argument);
  s.q = 6.0;
  CHECK_THROWS_AS(boundary_level_lower_bound(1.0, 0.1, s), std::invalid_argument);
  // pure critical: αρ/2 - (αρ)^{3}/(6 S³)
  const double S = sobolev_constant(3), a = 30.0, rho = 0.05;
  CHECK(boundary_level_lower_bound(a, rho, s) == doctest::Approx(0.5 * a * rho - std::pow(a * rho, 3) / (6 * S * S * S)));
}
