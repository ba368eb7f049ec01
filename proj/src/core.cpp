#include "normbranch/core.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "normbranch/numerics.hpp"
#include "normbranch/profile.hpp"
#include "normbranch/shooter.hpp"

namespace normbranch {

void ProblemSpec::validate() const {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("radius must be > 0");
  if (!(p > 1.0)) throw std::invalid_argument("p must be > 1");
  if (!(q >= p)) throw std::invalid_argument("q must satisfy q >= p");
  if (!std::isfinite(mu) || !std::isfinite(q)) throw std::invalid_argument("mu and q must be finite");
  // η = 0 is accepted: it is the linear limit used by several checks.
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
}

double critical_exponent(int dimension) {
  return dimension >= 3 ? 2.0 * dimension / (dimension - 2.0) : std::numeric_limits<double>::infinity();
}

double ProblemSpec::critical_exponent() const { return normbranch::critical_exponent(dimension); }

bool ProblemSpec::critical() const {
  return dimension >= 3 && std::abs(q - critical_exponent()) <= 1e-12 * q;
}

bool ProblemSpec::supercritical() const { return dimension >= 3 && q > critical_exponent() && !critical(); }

bool ProblemSpec::brezis_nirenberg() const { return mu == 0.0 && critical(); }

namespace {

// Exact small integer exponents by repeated multiplication; the rest via pow.
double power(double a, double e) {
  if (e >= 0.0 && e <= 16.0 && e == std::floor(e)) {
    double r = 1.0;
    for (int k = static_cast<int>(e); k > 0; --k) r *= a;
    return r;
  }
  return std::pow(a, e);
}

}  // namespace

double ProblemSpec::nonlinearity(double u) const {
  const double a = std::abs(u);
  const double s = u < 0 ? -1.0 : 1.0;
  double f = s * power(a, q - 1.0);
  if (mu != 0.0) f += mu * s * power(a, p - 1.0);
  return f;
}

double ProblemSpec::primitive(double u) const {
  const double a = std::abs(u);
  double F = power(a, q) / q;
  if (mu != 0.0) F += mu * power(a, p) / p;
  return F;
}

double ProblemSpec::nonlinearity_derivative(double u) const {
  const double a = std::abs(u);
  double d = (q - 1.0) * power(a, q - 2.0);
  if (mu != 0.0) d += mu * (p - 1.0) * power(a, p - 2.0);
  return d;
}

double sphere_area(int dimension) {
  if (dimension < 1) throw std::invalid_argument("sphere_area: dimension must be >= 1");
  const double n = dimension;
  return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

double ball_volume(int dimension, double radius) {
  return sphere_area(dimension) * std::pow(radius, dimension) / dimension;
}

namespace {

ProblemSpec linear_spec(int dimension, double radius) {
  ProblemSpec s;
  s.dimension = dimension;
  s.radius = radius;
  s.mu = 0.0;
  s.p = 2.0;
  s.q = 2.0;
  s.eta = 0.0;
  return s;
}

ShotOptions eigen_shot_options() {
  ShotOptions o;
  o.rtol = 1e-13;
  o.atol = 1e-15;
  o.hitTolerance = 0.0;
  o.stopAtFirstZero = true;
  o.maxStepFraction = 1.0 / 64.0;
  return o;
}

double unit_ball_lambda1(int dimension) {
  static std::mutex mutex;
  static std::map<int, double> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(dimension); it != cache.end()) return it->second;
  }
  // Bisection-type search on the eigenvalue: the linear shot from u(0) = 1
  // stays positive on [0, 1] exactly when λ < λ₁.
  const ProblemSpec spec = linear_spec(dimension, 1.0);
  const ShotOptions opt = eigen_shot_options();
  auto miss = [&](double lambda) { return integrate_from_center(1.0, -lambda, spec, opt).miss; };
  double lo = 0.0, hi = 1.0;
  double fLo = 1.0, fHi = miss(hi);
  while (fHi > 0.0) {
    lo = hi;
    fLo = fHi;
    hi *= 2.0;
    fHi = miss(hi);
  }
  const auto root = numerics::brent_root(miss, lo, hi, fLo, fHi, 1e-16 * hi, [](double) { return 0.0; });
  std::lock_guard lock(mutex);
  cache[dimension] = root.x;
  return root.x;
}

}  // namespace

double lambda1(int dimension, double radius) {
  if (dimension < 1) throw std::invalid_argument("lambda1: dimension must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("lambda1: radius must be > 0");
  return unit_ball_lambda1(dimension) / (radius * radius);
}

RadialProfile first_eigenfunction(int dimension, double radius) {
  const ProblemSpec spec = linear_spec(dimension, radius);
  ShotOptions opt = eigen_shot_options();
  opt.stopAtFirstZero = false;
  opt.maxStepFraction = 1.0 / 256.0;
  ShotResult shot = integrate_from_center(1.0, -lambda1(dimension, radius), spec, opt);
  RadialProfile phi = std::move(shot.profile);
  phi.back().u = 0.0;
  const double mass = radial_integral(phi, dimension, [](const RadialSample& s) { return s.u * s.u; });
  const double scale = 1.0 / std::sqrt(mass);
  for (auto& s : phi) {
    s.u *= scale;
    s.du *= scale;
  }
  return phi;
}

namespace {

// ∫_{rm}^∞ r^{m}(ε² + r²)^{-N} dr for m < 2N - 1 by the binomial series in ε²/r².
double bubble_tail(int N, int m, double eps, double rm) {
  double sum = 0.0;
  double binom = 1.0;  // (-1)^k C(N + k - 1, k)
  for (int k = 0; k < 200; ++k) {
    const double expo = m - 2.0 * N - 2.0 * k + 1.0;  // power after integration
    const double term = binom * std::pow(eps, 2.0 * k) * std::pow(rm, expo) / (-expo);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    binom *= -(N + k) / static_cast<double>(k + 1);
  }
  return sum;
}

double bubble_moment(int N, int m, double eps) {
  // finite part on [0, rm] with geometric panels, plus the analytic tail
  const double rm = 100.0 * eps;
  auto f = [&](double r) { return std::pow(r, m) * std::pow(eps * eps + r * r, -N); };
  double sum = numerics::integrate_gl(f, 0.0, eps / 8.0, 1, 24);
  for (double a = eps / 8.0; a < rm; a *= 2.0) sum += numerics::integrate_gl(f, a, std::min(2.0 * a, rm), 2, 24);
  return sum + bubble_tail(N, m, eps, rm);
}

}  // namespace

double sobolev_constant(int dimension, double eps) {
  if (dimension < 3) throw std::invalid_argument("sobolev_constant: dimension must be >= 3");
  if (!(eps > 0.0)) throw std::invalid_argument("sobolev_constant: eps must be > 0");
  const int N = dimension;
  const double area = sphere_area(N);
  // U = (ε² + r²)^{-(N-2)/2}:  |U'|² r^{N-1} = (N-2)² r^{N+1}(ε²+r²)^{-N},
  // U^{2*} r^{N-1} = r^{N-1}(ε²+r²)^{-N}.
  const double grad = area * (N - 2.0) * (N - 2.0) * bubble_moment(N, N + 1, eps);
  const double crit = area * bubble_moment(N, N - 1, eps);
  return grad / std::pow(crit, 2.0 / critical_exponent(N));
}

double sobolev_constant_closed_form(int dimension) {
  if (dimension < 3) throw std::invalid_argument("sobolev_constant_closed_form: dimension must be >= 3");
  const double n = dimension;
  return std::numbers::pi * n * (n - 2.0) * std::pow(std::tgamma(n / 2.0) / std::tgamma(n), 2.0 / n);
}

double gn_gamma(int dimension, double q) {
  if (dimension < 1) throw std::invalid_argument("gn_gamma: dimension must be >= 1");
  const double crit = critical_exponent(dimension);
  if (!(q >= 2.0) || q > crit * (1.0 + 1e-14))
    throw std::invalid_argument("gn_gamma: q must lie in [2, 2*]");
  return dimension * (q - 2.0) / (2.0 * q);
}

double compactness_mass_threshold(int dimension, double alpha, double radius) {
  if (dimension < 3) throw std::invalid_argument("compactness_mass_threshold: dimension must be >= 3");
  const double l1 = lambda1(dimension, radius);
  if (!(alpha > l1)) throw std::invalid_argument("compactness_mass_threshold: alpha must exceed lambda1");
  const double crit = critical_exponent(dimension);
  const double S = sobolev_constant(dimension);
  return std::pow(crit / 2.0 * std::pow(S, crit / 2.0), 2.0 / (crit - 2.0)) / (alpha - l1);
}

Constants constants_for(int dimension, double radius) {
  Constants c;
  c.dimension = dimension;
  c.radius = radius;
  c.lambda1 = lambda1(dimension, radius);
  c.phi1 = first_eigenfunction(dimension, radius);
  c.critExp = critical_exponent(dimension);
  if (dimension >= 3) c.sobolev = sobolev_constant(dimension);
  c.sphereArea = sphere_area(dimension);
  return c;
}

}  // namespace normbranch
