#pragma once

// The mass curve λ ↦ ρ(λ) = ‖u_λ‖₂² of the fixed-frequency ground states,
// its maximum ρ*, normalized solutions at prescribed mass, and the mass
// supremum probe for the nonexistence regime.

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "normbranch/shooter.hpp"

namespace normbranch {

struct BranchPoint {
  double lambda = 0.0;  // -ω
  double omega = 0.0;
  double centerValue = 0.0;
  double rho = 0.0;
  double energy = 0.0;
  double gradNormSq = 0.0;
  double boundarySlope = 0.0;
  double pohozaevResidual = 0.0;
  double nehariResidual = 0.0;
  std::shared_ptr<const RadialSolution> solution;
};

BranchPoint make_branch_point(RadialSolution sol);

enum class EndpointStatus { Vanished, NoSolution, BoundaryOfWindow };

const char* to_string(EndpointStatus s);

struct StepPolicy {
  /// Sample spacing as a fraction of the λ window.
  double initialStep = 0.01;
  /// Edge bisection stops below this fraction of the window.
  double minStep = 1e-6;
  /// Independent cold-started shots on the uniform grid (OpenMP); otherwise
  /// a serial march over the same grid, each shot warm-started from the last.
  bool parallel = true;
  ShootOptions shoot;
  /// An edge whose last mass is below this fraction of the branch max
  /// counts as vanished.
  double vanishFraction = 0.1;

  void validate() const;
};

struct Branch {
  ProblemSpec spec;
  std::vector<BranchPoint> points;  // strictly increasing λ
  double lambdaMin = 0.0, lambdaMax = 0.0;
  EndpointStatus lowStatus = EndpointStatus::BoundaryOfWindow;
  EndpointStatus highStatus = EndpointStatus::BoundaryOfWindow;
  /// Interior λ intervals where shooting failed between solvable samples.
  std::vector<std::pair<double, double>> gaps;
  int shots = 0;

  std::size_t max_index() const;
};

/// (λ₁/4, λ₁) for N = 3, (0, λ₁) for N >= 4 in the Brezis-Nirenberg case;
/// otherwise (-B, λ₁) with B the multiplier bound at mass rho when the spec
/// is in that regime, (-10λ₁, λ₁) when not.
std::pair<double, double> admissible_window(const ProblemSpec& spec, double rho = 1.0);

/// Window shrunk by `offset` of its width at both ends.
std::pair<double, double> offset_window(std::pair<double, double> window, double offset);

/// Throws SolverError(EmptyBranch) when no sample is solvable.
Branch trace_branch(const ProblemSpec& spec, double lambdaMin, double lambdaMax, const StepPolicy& policy = {});

struct RhoStar {
  double rhoStar = 0.0;
  double lambdaStar = 0.0;
  BranchPoint point;
  /// Max of the monotone cubic through the samples, the search start.
  double interpolatedLambda = 0.0;
};

/// Throws SolverError(NoInteriorMax) when the sampled maximum sits at a
/// window end, std::invalid_argument for fewer than 5 points.
RhoStar find_rho_star(const Branch& branch, double lambdaTolerance = 1e-10);

inline constexpr double kRhoStarMatch = 1e-6;

struct NormalizedSet {
  double rho = 0.0;
  std::vector<BranchPoint> solutions;  // increasing λ
  /// Set when fixed-frequency uniqueness is not known (μ ≠ 0): the count
  /// is a lower bound.
  bool countIsLowerBound = false;
};

/// Roots of ρ(λ) = rho along the branch, each re-shot. With ρ* supplied and
/// |rho - ρ*| <= kRhoStarMatch·ρ* the single solution at λ* is returned.
NormalizedSet solve_normalized(const Branch& branch, double rho, const std::optional<RhoStar>& rhoStar = std::nullopt);

/// Traces the admissible window (1e-3 offset, `samples` points) first.
NormalizedSet solve_normalized(const ProblemSpec& spec, double rho, int samples = 201);

struct ProbeConfig {
  int samples = 500;
  /// Window passes: ω_hi = B(rhoSup/2) is recomputed until it settles.
  int maxPasses = 6;
  ShootOptions shoot;
};

struct MassSupremum {
  double rhoSup = 0.0;
  double omegaAtSup = 0.0;
  double omegaUpper = 0.0;  // sweep window top
  int solutions = 0;
  /// Every found solution satisfies ω <= B(ρ) + slack.
  bool windowRespected = true;
  double worstWindowExcess = -std::numeric_limits<double>::infinity();
  int passes = 0;
};

/// Requires μ > 0, 1 < p <= 2 <= q, q >= max(2*, 3). Throws
/// SolverError(EmptyBranch) when no solution is found.
MassSupremum mass_supremum_probe(const ProblemSpec& spec, const ProbeConfig& config = {});

}  // namespace normbranch
