#pragma once

// Problem parameterization and the analytic constants every solver shares:
// the first Dirichlet eigenpair of the ball, the Sobolev constant, the
// Gagliardo-Nirenberg exponent and the compactness mass threshold.

#include <cmath>
#include <limits>
#include <vector>

namespace normbranch {

/// -Δu + ωu = η(μ|u|^{p-2}u + |u|^{q-2}u) on the ball B_R ⊂ R^N.
struct ProblemSpec {
  int dimension = 3;
  double radius = 1.0;
  double mu = 0.0;
  double p = 2.0;
  double q = 6.0;
  double eta = 1.0;

  /// Throws std::invalid_argument when the invariants fail.
  void validate() const;

  /// 2N/(N-2) for N >= 3, +inf otherwise.
  double critical_exponent() const;
  bool critical() const;
  bool supercritical() const;
  /// μ = 0, q = 2*: the Brezis-Nirenberg case whose fixed-frequency
  /// positive solution on a ball is unique.
  bool brezis_nirenberg() const;

  /// μ sgn(u)|u|^{p-1} + sgn(u)|u|^{q-1}, without the η factor.
  double nonlinearity(double u) const;
  /// μ|u|^p/p + |u|^q/q, without the η factor.
  double primitive(double u) const;
  /// d/du of nonlinearity(u).
  double nonlinearity_derivative(double u) const;
};

/// One sample of a radial field: value and radial derivative at r.
struct RadialSample {
  double r = 0.0;
  double u = 0.0;
  double du = 0.0;
};

/// Radial profile laid out in Simpson panels: samples (2k, 2k+1, 2k+2) form
/// one panel whose middle sample sits at the panel midpoint.
using RadialProfile = std::vector<RadialSample>;

double critical_exponent(int dimension);

/// Area of the unit (N-1)-sphere; 2 for N = 1.
double sphere_area(int dimension);

double ball_volume(int dimension, double radius);

/// First Dirichlet eigenvalue of -Δ on B_R.
double lambda1(int dimension, double radius);

/// First Dirichlet eigenfunction, positive, normalized to ∫φ² = 1.
RadialProfile first_eigenfunction(int dimension, double radius);

/// Best Sobolev constant from the Rayleigh quotient of the Aubin-Talenti
/// profile (1 + r²/ε²)^{-(N-2)/2}, by Gauss-Legendre on [0, r_max] plus an
/// exact asymptotic tail series. The quotient does not depend on ε.
double sobolev_constant(int dimension, double eps = 1.0);

/// Talenti's closed form πN(N-2)(Γ(N/2)/Γ(N))^{2/N}.
double sobolev_constant_closed_form(int dimension);

/// γ_q = N(q-2)/(2q), for 2 <= q <= 2*.
double gn_gamma(int dimension, double q);

/// Mass bound ((2*/2) S^{2*/2})^{2/(2*-2)} / (α - λ₁) below which
/// minimizing sequences for the local minimization level are compact.
double compactness_mass_threshold(int dimension, double alpha, double radius);

struct Constants {
  int dimension = 0;
  double radius = 0.0;
  double lambda1 = 0.0;
  RadialProfile phi1;
  double sobolev = std::numeric_limits<double>::quiet_NaN();
  double critExp = std::numeric_limits<double>::infinity();
  double sphereArea = 0.0;

  double gnGamma(double q) const { return gn_gamma(dimension, q); }
};

Constants constants_for(int dimension, double radius);

}  // namespace normbranch
