#pragma once

// Mountain-pass machinery on the mass sphere: cutoff bubbles, the straight
// bubble path, string relaxation, bordered Newton refinement of the saddle
// and the level estimates for the saddle energy.

#include <optional>
#include <string>
#include <vector>

#include "normbranch/core.hpp"
#include "normbranch/varflow.hpp"

namespace normbranch {

/// Quintic smoothstep cutoff: 1 on [0, r_in], 0 on [r_out, R].
struct CutoffConfig {
  double innerFraction = 0.5;
  double outerFraction = 0.75;

  void validate() const;
};

double cutoff_value(double r, double radius, const CutoffConfig& cutoff);
double cutoff_derivative(double r, double radius, const CutoffConfig& cutoff);

/// U_ε(r) = φ(r)[N(N-2)ε²]^{(N-2)/4} / (ε² + r²)^{(N-2)/2}.
double bubble_value(int dimension, double eps, double r, double radius, const CutoffConfig& cutoff);
double bubble_derivative(int dimension, double eps, double r, double radius, const CutoffConfig& cutoff);

struct BubbleNorms {
  double gradNormSq = 0.0;  // ‖∇U_ε‖²
  double critNorm = 0.0;    // ‖U_ε‖_{2*}^{2*}
  double massSq = 0.0;      // ‖U_ε‖²
};

/// Norms of U_ε by Gauss-Legendre on geometric panels.
BubbleNorms bubble_norms(int dimension, double eps, double radius, const CutoffConfig& cutoff = {});

struct BubbleFamily {
  double eps = 0.0;
  CutoffConfig cutoff;
  double rIn = 0.0, rOut = 0.0;
  Field profile;     // U_ε on the mesh
  Field normalized;  // v_ε = √ρ U_ε / ‖U_ε‖
  BubbleNorms norms;
};

BubbleFamily bubble(double eps, const ProblemSpec& spec, std::shared_ptr<const Mesh> mesh, double rho,
                    const CutoffConfig& cutoff = {});

struct PathState {
  std::vector<Field> nodes;
  std::vector<double> energies;
  int maxIndex = 0;
  double rho = 0.0;
  double eta = 1.0;

  double max_energy() const { return energies.at(maxIndex); }
  void evaluate(const ProblemSpec& spec);
};

struct PassConfig {
  int intervals = 2000;
  int nodes = 33;
  CutoffConfig cutoff;
  /// Unset: largest 2^{-k} meeting the endpoint conditions.
  std::optional<double> eps0;
  std::optional<double> alpha;
  int stringIterations = 4000;
  /// On the relative constrained gradient of the climbing node; Newton
  /// finishes the job, so this only needs to reach its basin.
  double stringTolerance = 1e-2;
  double stringStep = 1e-2;
  double stringMaxStep = 1.0;
  int newtonIterations = 50;
  double newtonTolerance = 1e-10;
  /// Mesh for the final Newton solve (0 keeps the string mesh); identity
  /// residuals of mesh solutions fall like h².
  int finalIntervals = 0;
};

struct InitialPath {
  PathState path;
  double eps0 = 0.0;
  double alpha = 0.0;
  double boundaryLevel = 0.0;
  double endpointMax = 0.0;
  bool farEndpointOutside = false;  // v_{ε₀} ∉ A_α
  /// max over ε ∈ [ε₀, 1] of I(v_ε) (dense log scan plus golden refine);
  /// the discrete node max can miss a narrow top.
  double curveMax = 0.0;
  double curveMaxEps = 0.0;
  /// The same curve γ₀ with nodes at equal weighted-L² arclength; the
  /// string starts from this one.
  PathState arclength;
};

/// Largest ε = 2^{-k} with v_ε outside A_α and I(v_ε) below the boundary
/// level. Throws SolverError(GeometryFail) when none down to the mesh scale.
double choose_eps0(const ProblemSpec& spec, double rho, std::shared_ptr<const Mesh> mesh, double alpha,
                   const CutoffConfig& cutoff);

/// Nodes v_{(1-t_j)+t_j ε₀}, t_j uniform. Throws SolverError(GeometryFail)
/// when max{I(v₁), I(v_{ε₀})} is not below the boundary level.
InitialPath initial_path(double eps0, int nodes, const ProblemSpec& spec, double rho,
                         std::shared_ptr<const Mesh> mesh, double alpha, const CutoffConfig& cutoff = {});

struct StringReport {
  int iterations = 0;
  double maxGradNorm = 0.0;    // relative constrained gradient at the max node
  double maxIncrease = 0.0;    // largest rise of the path max between iterations
  bool converged = false;
};

/// String method with a climbing max node: one descent step per interior
/// node above the endpoint level in lockstep (the max node ascends along the
/// path tangent instead), then equal-arclength reparameterization in the
/// weighted L² metric on either side of the max node. Stops at tolerance,
/// the cap, or 50 iterations without change of the path max; throws
/// SolverError(Stall) in the last two cases when throwOnStall is set.
PathState string_relax(const PathState& path, const ProblemSpec& spec, const PassConfig& config,
                       StringReport* report = nullptr, bool throwOnStall = false);

/// Serial reference for the lockstep generation update used by string_relax.
PathState string_relax_serial(const PathState& path, const ProblemSpec& spec, const PassConfig& config,
                              StringReport* report = nullptr);

struct SaddleResult {
  Field u;
  double omega = 0.0;
  double energy = 0.0;
  double newtonResidual = 0.0;
  double etaUsed = 1.0;
  int newtonSteps = 0;
  bool positive = false;  // every free node > 0
  double pohozaevResidual = 0.0;
  double nehariResidual = 0.0;
};

/// Roundoff floor of the relative stationarity residual, about 0.02·ε_mach·n²
/// measured; Newton stops at max(tolerance, kNewtonFloorFactor·ε_mach·n²).
inline constexpr double kNewtonFloorFactor = 0.1;

/// Newton on {K u + ωWu - ηWf(u) = 0, Σwu² = ρ} in (u, ω) with a bordered
/// tridiagonal solve. Throws SolverError(NewtonDiverged).
SaddleResult refine_saddle(const Field& u0, double omega0, const ProblemSpec& spec, double rho,
                           int maxIterations = 50, double tolerance = 1e-10);

/// Relative residual of the discrete stationarity system.
double stationarity_residual(const Field& u, double omega, const ProblemSpec& spec, double rho);

struct LevelBounds {
  double upperLeading = 0.0;  // S^{N/2}η^{1-N/2}/N
  double upperFactor = 0.0;   // ρ, ε-dependent factor of h_η
  double upperConstant = 0.0; // C
  double upper = 0.0;
  double lower = 0.0;
  double lowerSlack = 0.0;    // δ needed (first case only)
  bool lowerFirstCase = true;
};

/// S^{N/2}η^{1-N/2}/N + h_η(ρ) with the given C.
double mountain_pass_upper_bound(const ProblemSpec& spec, double rho, double C);
/// The ρ, η factor multiplying C in h_η(ρ).
double upper_bound_factor(const ProblemSpec& spec, double rho);
/// Lower bound for solution energies; first case evaluated with δ = 0.
double solution_energy_lower_bound(const ProblemSpec& spec, double rho);

/// Both sides of the N = 3 inradius condition, evaluated on the ball.
struct InradiusCheck {
  double lhs = 0.0;  // λ₁(B_{R_Ω})
  double rhs = 0.0;
  bool applicable = false;
  bool holds = false;
};
InradiusCheck inradius_condition(const ProblemSpec& spec);

struct PassResult {
  InitialPath initial;
  PathState relaxed;
  StringReport stringReport;
  SaddleResult coarseSaddle;  // on the string mesh
  SaddleResult saddle;        // on the final mesh
  LevelBounds bounds;
  double initialMax = 0.0;
  double relaxedMax = 0.0;
  bool sandwich = false;
  InradiusCheck inradius;
};

/// Full pipeline: initial path, relaxation, Newton refinement of the max
/// node, level bounds (C fitted from the initial path max).
PassResult mountain_pass(const ProblemSpec& spec, double rho, const PassConfig& config = {},
                         const PathState* warmStart = nullptr);

struct EtaLevel {
  double eta = 0.0;
  double level = 0.0;
  double pathMax = 0.0;
  double upperBound = 0.0;
  bool ok = false;
  std::string error;
};

struct EtaScan {
  std::vector<EtaLevel> levels;
  bool nonIncreasing = false;
  double worstIncrease = 0.0;
  /// Polynomial extrapolation of the three largest η < 1 to η = 1, against c₁.
  double leftLimitEstimate = std::numeric_limits<double>::quiet_NaN();
  double leftLimitGap = std::numeric_limits<double>::quiet_NaN();
  /// Richardson error estimate of c₁ on the string mesh (one extra pass on
  /// the doubled mesh).
  double discretizationTolerance = std::numeric_limits<double>::quiet_NaN();
  bool leftContinuous = false;
  double fittedC = 0.0;
};

inline constexpr double kLevelMonotoneSlack = 1e-8;

EtaScan level_vs_eta(const ProblemSpec& spec, double rho, const std::vector<double>& etaGrid,
                     const PassConfig& config = {});

}  // namespace normbranch
