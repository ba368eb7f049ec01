#include "normbranch/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "normbranch/numerics.hpp"
#include "normbranch/pass.hpp"
#include "normbranch/profile.hpp"

namespace normbranch {

IdentityTerms identity_terms(const RadialSolution& sol) {
  const ProblemSpec& spec = sol.spec;
  IdentityTerms t;
  t.gradNormSq = sol.gradNormSq;
  t.rho = sol.rho;
  t.primitiveIntegral = spec.mu / spec.p * sol.lpNorm + sol.lqNorm / spec.q;
  t.forceIntegral = spec.mu * sol.lpNorm + sol.lqNorm;
  t.boundarySlope = sol.profile.empty() ? sol.boundarySlope : sol.profile.back().du;
  return t;
}

namespace {

double relative(std::initializer_list<double> terms, double residual) {
  double scale = 0.0;
  for (double x : terms) scale = std::max(scale, std::abs(x));
  return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual);
}

}  // namespace

double pohozaev_residual(const IdentityTerms& t, double omega, const ProblemSpec& spec) {
  const int N = spec.dimension;
  const double R = spec.radius;
  const double boundary = 0.5 * t.boundarySlope * t.boundarySlope * std::pow(R, N) * sphere_area(N);
  const double potential = N * spec.eta * t.primitiveIntegral;
  const double mass = 0.5 * N * omega * t.rho;
  const double grad = 0.5 * (N - 2.0) * t.gradNormSq;
  return relative({boundary, potential, mass, grad}, boundary - (potential - mass - grad));
}

double pohozaev_residual(const RadialSolution& sol) { return pohozaev_residual(identity_terms(sol), sol.omega, sol.spec); }

double nehari_residual(const IdentityTerms& t, double omega, const ProblemSpec& spec) {
  const double force = spec.eta * t.forceIntegral;
  return relative({t.gradNormSq, omega * t.rho, force}, t.gradNormSq + omega * t.rho - force);
}

double nehari_residual(const RadialSolution& sol) { return nehari_residual(identity_terms(sol), sol.omega, sol.spec); }

bool multiplier_regime(const ProblemSpec& spec) {
  if (!(spec.mu > 0.0) || !(spec.p > 1.0 && spec.p <= 2.0)) return false;
  const double crit = spec.dimension >= 3 ? critical_exponent(spec.dimension) : std::numeric_limits<double>::infinity();
  return spec.q >= std::max(crit, 3.0) * (1.0 - 1e-14);
}

double multiplier_upper_bound(const ProblemSpec& spec, double rho) {
  const int N = spec.dimension;
  const double vol = ball_volume(N, spec.radius);
  return N * (1.0 / spec.p - 1.0 / spec.q) * spec.mu * std::pow(vol, (2.0 - spec.p) / 2.0) *
         std::pow(rho, (spec.p - 2.0) / 2.0);
}

MultiplierWindow multiplier_window(double omega, double rho, const ProblemSpec& spec) {
  MultiplierWindow w;
  w.lowerMargin = omega + lambda1(spec.dimension, spec.radius);
  w.inRegime = multiplier_regime(spec);
  w.pass = w.lowerMargin > 0.0;
  if (w.inRegime) {
    w.upperBound = multiplier_upper_bound(spec, rho);
    w.pass = w.pass && omega <= w.upperBound + kMultiplierSlack;
  }
  return w;
}

MultiplierWindow multiplier_window(const RadialSolution& sol) { return multiplier_window(sol.omega, sol.rho, sol.spec); }

namespace {

// ∫_a^b g(u(r)) r^{N-1} dr |S^{N-1}| on the Hermite interpolant, panels
// aligned with the profile samples.
double shell_integral(const RadialProfile& profile, int N, double a, double b,
                      const std::function<double(double, double)>& g) {
  const auto [xs, ws] = numerics::gauss_legendre(6);
  double sum = 0.0;
  auto it = std::upper_bound(profile.begin(), profile.end(), a,
                             [](double x, const RadialSample& s) { return x < s.r; });
  double lo = a;
  while (lo < b) {
    double hi = (it == profile.end()) ? b : std::min(b, it->r);
    if (hi > lo) {
      const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = mid + half * xs[k];
        sum += ws[k] * half * g(r, interpolate_profile(profile, r).u) * std::pow(r, N - 1);
      }
    }
    lo = hi;
    if (it == profile.end()) break;
    ++it;
  }
  return sphere_area(N) * sum;
}

}  // namespace

Localization monotonicity_and_localization(const RadialSolution& sol, double r) {
  const double R = sol.spec.radius;
  if (!(r > 0.0) || !(r < 0.5 * R)) throw std::invalid_argument("monotonicity_and_localization: need 0 < r < R/2");
  const int N = sol.spec.dimension;
  Localization loc;
  loc.maxSlope = -std::numeric_limits<double>::infinity();
  for (const auto& s : sol.profile)
    if (s.r > 0.0 && s.r < R) loc.maxSlope = std::max(loc.maxSlope, s.du);
  loc.monotone = loc.maxSlope <= 1e-10;
  auto sq = [](double, double u) { return u * u; };
  const double inner = shell_integral(sol.profile, N, R - r, R, sq);
  const double outer = shell_integral(sol.profile, N, R - 2.0 * r, R - r, sq);
  loc.ratio = inner / outer;
  loc.C = (std::pow(R, N) - std::pow(R - r, N)) / (std::pow(R - r, N) - std::pow(R - 2.0 * r, N));
  loc.bounded = loc.ratio <= loc.C;
  loc.stripMassFraction = inner / sol.rho;
  return loc;
}

namespace {

std::pair<double, double> eigen_integrals(const RadialSolution& sol) {
  const int N = sol.spec.dimension;
  const RadialProfile phi = first_eigenfunction(N, sol.spec.radius);
  const double q = sol.spec.q;
  RadialProfile withPhi = sol.profile;
  // store φ₁ in du to reuse the Simpson integrator
  for (auto& s : withPhi) s.du = interpolate_profile(phi, s.r).u;
  const double top = radial_integral(withPhi, N, [q](const RadialSample& s) { return std::pow(std::abs(s.u), q - 1.0) * s.du; });
  const double bottom = radial_integral(withPhi, N, [](const RadialSample& s) { return s.u * s.du; });
  return {top, bottom};
}

}  // namespace

double eigen_test_ratio(const RadialSolution& sol) {
  const auto [top, bottom] = eigen_integrals(sol);
  return top / bottom;
}

double eigen_test_bound(const RadialSolution& sol) {
  return lambda1(sol.spec.dimension, sol.spec.radius) + sol.omega - sol.spec.eta * eigen_test_ratio(sol);
}

AsymptoticsFit bubble_asymptotics_fit(int N, const std::vector<double>& eps, double radius) {
  if (N < 3) throw std::invalid_argument("bubble_asymptotics_fit: dimension must be >= 3");
  if (eps.size() < 3) throw std::invalid_argument("bubble_asymptotics_fit: need at least 3 scales");
  AsymptoticsFit fit;
  fit.dimension = N;
  fit.eps = eps;
  const double S = sobolev_constant(N);
  const double SN = std::pow(S, N / 2.0);
  std::vector<double> le, lg, lc, lm;
  for (double e : eps) {
    const BubbleNorms b = bubble_norms(N, e, radius);
    fit.gradNormSq.push_back(b.gradNormSq);
    fit.critNorm.push_back(b.critNorm);
    fit.massSq.push_back(b.massSq);
    le.push_back(std::log(e));
    lg.push_back(std::log(std::abs(b.gradNormSq - SN)));
    lc.push_back(std::log(std::abs(SN - b.critNorm)));
    lm.push_back(std::log(b.massSq));
  }
  auto slope = [&](const std::vector<double>& y, double expected) {
    const auto lf = numerics::fit_line(le, y);
    SlopeFit s;
    s.slope = lf.slope;
    s.residual = lf.residual;
    s.expected = expected;
    s.pass = std::abs(lf.slope - expected) <= kSlopeTolerance;
    return s;
  };
  fit.gradientRemainder = slope(lg, N - 2.0);
  fit.criticalRemainder = slope(lc, N);
  fit.mass = slope(lm, N >= 5 ? 2.0 : (N == 4 ? 2.0 : 1.0));
  if (N == 4) {
    // one-parameter models log‖U‖² = log c + log(model(ε))
    auto rms = [&](const std::function<double(double)>& model) {
      std::vector<double> d;
      for (std::size_t i = 0; i < eps.size(); ++i) d.push_back(lm[i] - std::log(model(eps[i])));
      double mean = 0.0;
      for (double x : d) mean += x;
      mean /= d.size();
      double ss = 0.0;
      for (double x : d) ss += (x - mean) * (x - mean);
      return std::sqrt(ss / d.size());
    };
    fit.logModelResidual = rms([](double e) { return e * e * std::abs(std::log(e)); });
    fit.powerModelResidual = rms([](double e) { return e * e; });
    fit.logModelWins = fit.logModelResidual < fit.powerModelResidual;
  }
  return fit;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["pohozaev_residual"] = pohozaevResidual;
  j["nehari_residual"] = nehariResidual;
  j["identities_pass"] = identitiesPass;
  nlohmann::json mw;
  mw["lower_margin"] = multiplierWindow.lowerMargin;
  mw["in_regime"] = multiplierWindow.inRegime;
  mw["upper_bound"] = multiplierWindow.inRegime ? nlohmann::json(multiplierWindow.upperBound) : nlohmann::json(nullptr);
  mw["pass"] = multiplierWindow.pass;
  j["multiplier_window"] = mw;
  nlohmann::json loc;
  loc["strip_width"] = stripWidth;
  loc["max_slope"] = localization.maxSlope;
  loc["monotone"] = localization.monotone;
  loc["ratio"] = localization.ratio;
  loc["C"] = localization.C;
  loc["bounded"] = localization.bounded;
  loc["strip_mass_fraction"] = localization.stripMassFraction;
  j["localization"] = loc;
  j["eigen_test_bound"] = eigenTestBound;
  return j;
}

VerificationReport verify_solution(const RadialSolution& sol, double stripWidth) {
  VerificationReport rep;
  rep.pohozaevResidual = pohozaev_residual(sol);
  rep.nehariResidual = nehari_residual(sol);
  rep.identitiesPass = rep.pohozaevResidual <= kIdentityTolerance && rep.nehariResidual <= kIdentityTolerance;
  rep.multiplierWindow = multiplier_window(sol);
  rep.stripWidth = stripWidth > 0.0 ? stripWidth : 0.1 * sol.spec.radius;
  rep.localization = monotonicity_and_localization(sol, rep.stripWidth);
  rep.eigenTestBound = eigen_test_bound(sol);
  return rep;
}

}  // namespace normbranch
