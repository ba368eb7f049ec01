#pragma once

// Fixed-frequency radial problem
//   -u'' - (N-1)u'/r + ωu = η(μ|u|^{p-2}u + |u|^{q-2}u),  u'(0) = 0, u(R) = 0,
// solved by shooting on the center value a = u(0).

#include <limits>
#include <optional>
#include <vector>

#include "normbranch/core.hpp"

namespace normbranch {

enum class ShotClass { Undershoot, Hit, Overshoot };

const char* to_string(ShotClass c);

struct ShotOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  /// Stop at the first interior zero (enough to classify). When false the
  /// integration runs to R and counts every crossing.
  bool stopAtFirstZero = true;
  /// |u(R)| <= hitTolerance · a counts as a hit.
  double hitTolerance = 1e-10;
  /// Step cap as a fraction of R; keeps the Simpson panels fine.
  double maxStepFraction = 1.0 / 128.0;
};

struct ShotResult {
  double centerValue = 0.0;
  RadialProfile profile;
  double boundaryValue = 0.0;  // u at the end of integration (R, or the first zero)
  double boundarySlope = 0.0;
  int crossings = 0;
  ShotClass classification = ShotClass::Undershoot;
  double firstZero = std::numeric_limits<double>::quiet_NaN();
  double blowupRadius = std::numeric_limits<double>::quiet_NaN();
  /// Signed, continuous miss distance: u(R) without an interior zero,
  /// u'(r₀)(R - r₀) when the first zero r₀ lies inside.
  double miss = 0.0;
};

/// Integrates outward from the series start at r = δ and classifies the shot.
/// Throws SolverError(IntegratorFailure) on step-size underflow.
ShotResult integrate_from_center(double centerValue, double omega, const ProblemSpec& spec,
                                 const ShotOptions& options = {});

struct Norms {
  double rho = 0.0;         // ‖u‖₂²
  double gradNormSq = 0.0;  // ‖∇u‖₂²
  double lpNorm = 0.0;      // ‖u‖_p^p
  double lqNorm = 0.0;      // ‖u‖_q^q
  double energy = 0.0;      // I_η(u)
};

/// Simpson quadrature with weight sphereArea · r^{N-1} over the profile panels.
Norms norms_of(const RadialProfile& profile, const ProblemSpec& spec);

struct RadialSolution {
  ProblemSpec spec;
  double omega = 0.0;
  double centerValue = 0.0;
  RadialProfile profile;
  double rho = 0.0;
  double gradNormSq = 0.0;
  double lpNorm = 0.0;
  double lqNorm = 0.0;
  double energy = 0.0;
  double boundarySlope = 0.0;
  /// True only for the Brezis-Nirenberg case on a ball.
  bool uniquenessKnown = false;
  /// Number of undershoot/overshoot transitions seen on the scan grid
  /// (0 when only the first bracket was searched).
  int bracketCount = 0;
  int shots = 0;

  double lambda() const { return -omega; }
};

struct ShootOptions {
  ShotOptions shot;
  /// Seeds the bracket search (warm start); otherwise the search starts at a = 1.
  std::optional<double> centerHint;
  double minCenter = 1e-8;
  double maxCenter = 1e8;
  double expansionRatio = 2.0;
  /// Scan the whole geometric grid to count brackets.
  bool countBrackets = false;
};

/// Positive radially decreasing solution at frequency ω. Throws
/// SolverError(NoBracket) when no undershoot/overshoot pair exists on the
/// geometric scan of [minCenter, maxCenter].
RadialSolution shoot_ground_state(double omega, const ProblemSpec& spec, const ShootOptions& options = {});

/// Every positive solution bracketed on the full geometric scan, ordered by
/// center value. Empty when none.
std::vector<RadialSolution> shoot_all(double omega, const ProblemSpec& spec, const ShootOptions& options = {});

/// Positive solution from an explicit bracket [aLow, aHigh] whose shots
/// classify differently.
RadialSolution solve_in_bracket(double omega, const ProblemSpec& spec, double aLow, double aHigh,
                                const ShootOptions& options = {});

}  // namespace normbranch
