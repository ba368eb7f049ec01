#pragma once

// Small scalar numerics shared by the solvers: bracketed root finding,
// bounded maximization, monotone cubic interpolation, tridiagonal solves,
// Gauss-Legendre rules and log-log slope fits.

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace normbranch::numerics {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Brent's method on [a, b] with f(a), f(b) of opposite sign (or one zero).
/// Stops when |f| <= ftol(x) or the bracket is narrower than xtol.
RootResult brent_root(const std::function<double(double)>& f, double a, double b, double fa, double fb,
                      double xtol, const std::function<double(double)>& ftol, int maxIter = 200);

struct MaxResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

/// Brent's parabolic/golden-section search for a maximum of f on [a, b].
/// `start` seeds the first interior point when it lies strictly inside.
MaxResult brent_maximize(const std::function<double(double)>& f, double a, double b, double start,
                         double xtol, int maxIter = 200);

/// Plain golden-section search for a maximum of f on [a, b].
MaxResult golden_maximize(const std::function<double(double)>& f, double a, double b, double xtol,
                          int maxIter = 400);

/// Fritsch-Carlson monotone piecewise cubic Hermite interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  double operator()(double t) const;
  const std::vector<double>& x() const { return x_; }

 private:
  std::vector<double> x_, y_, d_;
};

/// Solves the tridiagonal system with sub-diagonal `lower` (lower[0] unused),
/// diagonal `diag` and super-diagonal `upper` (upper[n-1] unused).
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Same system by Gaussian elimination with partial pivoting; safe for
/// indefinite matrices. Throws std::runtime_error when singular.
std::vector<double> solve_tridiagonal_pivoting(std::span<const double> lower, std::span<const double> diag,
                                               std::span<const double> upper, std::span<const double> rhs);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Integrates f over [a, b] by composite Gauss-Legendre on `panels` equal panels.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels, int order = 20);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual
};

/// Least-squares line through (x_i, y_i).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace normbranch::numerics
