#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "normbranch/integrator.hpp"
#include "normbranch/numerics.hpp"

using namespace normbranch;
using namespace normbranch::numerics;

TEST_CASE("brent_root finds a simple root") {
  auto f = [](double x) { return std::cos(x) - x; };
  const auto r = brent_root(f, 0.0, 1.0, f(0.0), f(1.0), 1e-15, [](double) { return 0.0; });
  CHECK(r.x == doctest::Approx(0.7390851332151607).epsilon(1e-14));
  CHECK(r.converged);
}

TEST_CASE("maximizers") {
  auto f = [](double x) { return -(x - 0.3) * (x - 0.3) + std::sin(x) * 0.01; };
  const auto b = brent_maximize(f, 0.0, 1.0, 0.5, 1e-12);
  const auto g = golden_maximize(f, 0.0, 1.0, 1e-12);
  // f'(x) = -2(x - 0.3) + 0.01 cos x = 0
  const double x = 0.30476958060309045;
  CHECK(b.x == doctest::Approx(x).epsilon(1e-9));
  CHECK(g.x == doctest::Approx(b.x).epsilon(1e-8));
}

TEST_CASE("monotone cubic keeps monotone data monotone and interpolates") {
  const MonotoneCubic c({0, 1, 2, 3, 4}, {0, 0.1, 0.1, 2, 2.1});
  double prev = -1.0;
  for (double t = 0.0; t <= 4.0; t += 0.01) {
    const double v = c(t);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  CHECK(c(3.0) == doctest::Approx(2.0));
  CHECK(c(1.5) == doctest::Approx(0.1));
}

TEST_CASE("tridiagonal solvers agree with a known solution") {
  const std::vector<double> lo = {0, -1, -1, -1}, di = {2, 2, 2, 2}, up = {-1, -1, -1, 0};
  const std::vector<double> x = {1, 2, 3, 4};
  std::vector<double> b(4);
  for (int i = 0; i < 4; ++i) b[i] = di[i] * x[i] + (i ? lo[i] * x[i - 1] : 0) + (i < 3 ? up[i] * x[i + 1] : 0);
  const auto y = solve_tridiagonal(lo, di, up, b);
  const auto z = solve_tridiagonal_pivoting(lo, di, up, b);
  for (int i = 0; i < 4; ++i) {
    CHECK(y[i] == doctest::Approx(x[i]));
    CHECK(z[i] == doctest::Approx(x[i]));
  }
  // indefinite: zero leading pivot
  const std::vector<double> d2 = {0, 2, 2, 2};
  for (int i = 0; i < 4; ++i) b[i] = d2[i] * x[i] + (i ? lo[i] * x[i - 1] : 0) + (i < 3 ? up[i] * x[i + 1] : 0);
  const auto w = solve_tridiagonal_pivoting(lo, d2, up, b);
  for (int i = 0; i < 4; ++i) CHECK(w[i] == doctest::Approx(x[i]));
}

TEST_CASE("Gauss-Legendre is exact for polynomials of degree 2n-1") {
  const auto [xs, ws] = gauss_legendre(6);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += ws[i] * std::pow(xs[i], 10);
  CHECK(s == doctest::Approx(2.0 / 11.0).epsilon(1e-14));
  CHECK(integrate_gl([](double x) { return std::exp(x); }, 0.0, 1.0, 4) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
}

TEST_CASE("fit_line recovers slope and intercept") {
  const std::vector<double> x = {0, 1, 2, 3}, y = {1, 3, 5, 7};
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.residual < 1e-14);
}

TEST_CASE("DOPRI5 reaches tolerance on the harmonic oscillator and its dense output") {
  auto rhs = [](double, const OdeState<2>& y) { return OdeState<2>{y[1], -y[0]}; };
  OdeOptions opt;
  opt.rtol = 1e-11;
  opt.atol = 1e-13;
  double worst = 0.0;
  OdeStats st;
  const auto status = integrate_dopri5<2>(rhs, 0.0, OdeState<2>{0.0, 1.0}, 10.0, opt,
                                          [&](const DenseStep<2>& s) {
                                            for (double t : {0.25, 0.5, 0.75}) {
                                              const double x = s.x0 + t * s.h;
                                              worst = std::max(worst, std::abs(s(x)[0] - std::sin(x)));
                                            }
                                            return true;
                                          },
                                          &st);
  CHECK(status == OdeStatus::Completed);
  CHECK(worst < 1e-8);
  CHECK(st.accepted > 0);
}

TEST_CASE("DOPRI5 observer can stop the integration") {
  auto rhs = [](double, const OdeState<1>& y) { return OdeState<1>{y[0]}; };
  int calls = 0;
  const auto status = integrate_dopri5<1>(rhs, 0.0, OdeState<1>{1.0}, 5.0, OdeOptions{},
                                          [&](const DenseStep<1>&) { return ++calls < 3; });
  CHECK(status == OdeStatus::StoppedByObserver);
  CHECK(calls == 3);
}
