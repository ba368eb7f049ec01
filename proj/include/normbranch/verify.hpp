#pragma once

// Certificates for computed solutions: integral identities, the multiplier
// window, boundary monotonicity and strip localization, the eigenfunction
// test inequality, and bubble asymptotics fits.

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "normbranch/core.hpp"
#include "normbranch/shooter.hpp"

namespace normbranch {

/// The integrals entering the Pohozaev and Nehari identities.
struct IdentityTerms {
  double gradNormSq = 0.0;
  double rho = 0.0;
  double primitiveIntegral = 0.0;  // ∫ μ|u|^p/p + |u|^q/q
  double forceIntegral = 0.0;      // ∫ f(u)u = μ‖u‖_p^p + ‖u‖_q^q
  double boundarySlope = 0.0;      // u'(R)
};

IdentityTerms identity_terms(const RadialSolution& sol);

/// ½u'(R)²R^N|S^{N-1}| = N[η∫F(u) - ωρ/2] - (N-2)/2‖∇u‖², relative to the
/// largest term.
double pohozaev_residual(const IdentityTerms& t, double omega, const ProblemSpec& spec);
double pohozaev_residual(const RadialSolution& sol);

/// ‖∇u‖² + ωρ = η∫f(u)u, relative to the largest term.
double nehari_residual(const IdentityTerms& t, double omega, const ProblemSpec& spec);
double nehari_residual(const RadialSolution& sol);

/// μ > 0, 1 < p <= 2, q >= max(2*, 3).
bool multiplier_regime(const ProblemSpec& spec);

/// N(1/p - 1/q)μ|Ω|^{(2-p)/2}ρ^{(p-2)/2}.
double multiplier_upper_bound(const ProblemSpec& spec, double rho);

struct MultiplierWindow {
  double lowerMargin = 0.0;  // ω + λ₁
  double upperBound = std::numeric_limits<double>::quiet_NaN();
  bool inRegime = false;
  bool pass = false;
};

inline constexpr double kMultiplierSlack = 1e-8;

MultiplierWindow multiplier_window(double omega, double rho, const ProblemSpec& spec);
MultiplierWindow multiplier_window(const RadialSolution& sol);

struct Localization {
  double maxSlope = 0.0;
  double ratio = 0.0;              // ∫_{Ω_r}u² / ∫_{Ω_2r \ Ω_r}u²
  double C = 0.0;                  // |Ω_r| / |Ω_2r \ Ω_r|
  double stripMassFraction = 0.0;  // ∫_{Ω_r}u² / ρ
  bool monotone = false;
  bool bounded = false;
};

/// Strips are the boundary annuli Ω_r = {R - r < |x| < R}. For a radially
/// decreasing profile the volume ratio C bounds the mass ratio.
Localization monotonicity_and_localization(const RadialSolution& sol, double stripWidth);

/// λ₁ + ω - η(∫u^{q-1}φ₁)/(∫uφ₁).
double eigen_test_bound(const RadialSolution& sol);

/// (∫u^{q-1}φ₁)/(∫uφ₁), the growth quantity of the test inequality.
double eigen_test_ratio(const RadialSolution& sol);

struct SlopeFit {
  double slope = 0.0;
  double residual = 0.0;
  double expected = 0.0;
  bool pass = false;
};

struct AsymptoticsFit {
  int dimension = 0;
  std::vector<double> eps;
  std::vector<double> gradNormSq, critNorm, massSq;
  SlopeFit gradientRemainder;  // ‖∇U_ε‖² - S^{N/2} ~ ε^{N-2}
  SlopeFit criticalRemainder;  // |S^{N/2} - ‖U_ε‖_{2*}^{2*}| ~ ε^N
  SlopeFit mass;               // ‖U_ε‖² ~ ε^2 (N >= 5), ε (N = 3)
  /// N = 4: RMS residuals of log‖U_ε‖² against c·ε²|ln ε| and c·ε².
  double logModelResidual = std::numeric_limits<double>::quiet_NaN();
  double powerModelResidual = std::numeric_limits<double>::quiet_NaN();
  bool logModelWins = false;
};

inline constexpr double kSlopeTolerance = 0.15;

AsymptoticsFit bubble_asymptotics_fit(int dimension, const std::vector<double>& eps, double radius = 1.0);

struct VerificationReport {
  double pohozaevResidual = 0.0;
  double nehariResidual = 0.0;
  MultiplierWindow multiplierWindow;
  Localization localization;
  double stripWidth = 0.0;
  double eigenTestBound = 0.0;
  bool identitiesPass = false;

  nlohmann::json to_json() const;
};

inline constexpr double kIdentityTolerance = 1e-6;

/// A non-positive strip width selects 0.1·R.
VerificationReport verify_solution(const RadialSolution& sol, double stripWidth = 0.0);

}  // namespace normbranch
