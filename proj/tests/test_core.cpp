#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "normbranch/core.hpp"
#include "normbranch/profile.hpp"

using namespace normbranch;

namespace {

// squares of the first Bessel zeros j_{N/2-1,1}, from tables
constexpr double kJ01 = 2.404825557695773;
constexpr double kJ11 = 3.831705970207512;
constexpr double kJ321 = 4.493409457909064;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("lambda1 matches Bessel zeros") {
  const double pi = std::numbers::pi;
  CHECK(rel(lambda1(1, 1.0), pi * pi / 4) < 1e-10);
  CHECK(rel(lambda1(2, 1.0), kJ01 * kJ01) < 1e-10);
  CHECK(rel(lambda1(3, 1.0), pi * pi) < 1e-10);
  CHECK(rel(lambda1(4, 1.0), kJ11 * kJ11) < 1e-10);
  CHECK(rel(lambda1(5, 1.0), kJ321 * kJ321) < 1e-10);
}

TEST_CASE("lambda1 scales like R^-2") {
  for (int N = 1; N <= 5; ++N) CHECK(rel(lambda1(N, 2.5), lambda1(N, 1.0) / 6.25) < 1e-10);
}

TEST_CASE("sphere area and ball volume") {
  const double pi = std::numbers::pi;
  CHECK(sphere_area(1) == doctest::Approx(2.0));
  CHECK(sphere_area(2) == doctest::Approx(2 * pi));
  CHECK(sphere_area(3) == doctest::Approx(4 * pi));
  CHECK(sphere_area(4) == doctest::Approx(2 * pi * pi));
  CHECK(ball_volume(3, 2.0) == doctest::Approx(4.0 / 3.0 * pi * 8.0));
}

TEST_CASE("Sobolev constant quadrature against the closed form and tabulated values") {
  // πN(N-2)(Γ(N/2)/Γ(N))^{2/N}, 25-digit evaluation
  const double table[] = {5.477904089531331873625512, 10.26039864129491276435229, 14.81191172000593400015838};
  for (int N = 3; N <= 5; ++N) {
    CHECK(rel(sobolev_constant_closed_form(N), table[N - 3]) < 1e-13);
    CHECK(rel(sobolev_constant(N), table[N - 3]) < 1e-10);
    CHECK(rel(sobolev_constant(N, 0.3), table[N - 3]) < 1e-10);
  }
  CHECK_THROWS_AS(sobolev_constant(2), std::invalid_argument);
}

TEST_CASE("critical exponent and GN exponent") {
  CHECK(critical_exponent(3) == 6.0);
  CHECK(critical_exponent(4) == 4.0);
  CHECK(std::isinf(critical_exponent(2)));
  CHECK(gn_gamma(3, 6.0) == doctest::Approx(1.0));
  CHECK(gn_gamma(3, 2.0) == doctest::Approx(0.0));
  CHECK(gn_gamma(1, 6.0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("compactness threshold formula") {
  const int N = 4;
  const double alpha = 30.0, S = sobolev_constant(N);
  // 2* = 4: (2 S²)^{1} / (α - λ₁)
  CHECK(compactness_mass_threshold(N, alpha, 1.0) == doctest::Approx(2.0 * S * S / (alpha - lambda1(4, 1.0))));
  CHECK_THROWS_AS(compactness_mass_threshold(N, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("first eigenfunction is normalized and matches sin(πr)/r for N=3") {
  const double pi = std::numbers::pi;
  const RadialProfile phi = first_eigenfunction(3, 1.0);
  const double mass = radial_integral(phi, 3, [](const RadialSample& s) { return s.u * s.u; });
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  // ∫ 4π r² sin²(πr)/r² c² = 2π c² = 1
  const double c = 1.0 / std::sqrt(2.0 * pi);
  double err = 0.0;
  for (const auto& s : phi) {
    const double exact = s.r > 0.0 ? c * std::sin(pi * s.r) / s.r : c * pi;
    err = std::max(err, std::abs(s.u - exact));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("ProblemSpec validation and predicates") {
  ProblemSpec s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.brezis_nirenberg());
  s.q = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = ProblemSpec{};
  s.eta = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.eta = 0.0;
  CHECK_NOTHROW(s.validate());
  s = ProblemSpec{};
  s.radius = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = ProblemSpec{};
  s.q = 7.0;
  CHECK(s.supercritical());
  CHECK_FALSE(s.critical());
}

TEST_CASE("nonlinearity, primitive and derivative agree") {
  ProblemSpec s;
  s.dimension = 3;
  s.mu = 0.7;
  s.p = 2.5;
  s.q = 5.0;
  for (double u : {-1.3, -0.2, 0.4, 2.0}) {
    const double h = 1e-6;
    CHECK(s.nonlinearity(u) == doctest::Approx((s.primitive(u + h) - s.primitive(u - h)) / (2 * h)).epsilon(1e-7));
    CHECK(s.nonlinearity_derivative(u) ==
          doctest::Approx((s.nonlinearity(u + h) - s.nonlinearity(u - h)) / (2 * h)).epsilon(1e-7));
  }
  CHECK(s.nonlinearity(2.0) == doctest::Approx(0.7 * std::pow(2.0, 1.5) + 16.0));
  CHECK(s.nonlinearity(-2.0) == doctest::Approx(-(0.7 * std::pow(2.0, 1.5) + 16.0)));
}

TEST_CASE("constants bundle") {
  const Constants c = constants_for(4, 1.0);
  CHECK(c.lambda1 == doctest::Approx(kJ11 * kJ11));
  CHECK(c.critExp == 4.0);
  CHECK(c.gnGamma(3.0) == doctest::Approx(gn_gamma(4, 3.0)));
  CHECK(std::isnan(constants_for(2, 1.0).sobolev));
}
