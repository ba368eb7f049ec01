#pragma once

// Grid-based variational solver on a uniform radial mesh: discrete energy,
// mass-constrained semi-implicit gradient flow, the θ_ε minimization and
// the Gagliardo-Nirenberg quotient maximization.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "normbranch/core.hpp"
#include "normbranch/errors.hpp"
#include "normbranch/verify.hpp"

namespace normbranch {

/// Uniform nodes r_i = i·h, i = 0..n, with the Dirichlet node r_n = R
/// eliminated. Each free node owns the cell [r_i - h/2, r_i + h/2] ∩ [0, R]
/// with weight w_i = |S^{N-1}|∫_cell r^{N-1} dr; the stiffness couples
/// neighbours through g_{i+1/2} = |S^{N-1}|∫_{r_i}^{r_{i+1}} r^{N-1} dr / h².
class Mesh {
 public:
  Mesh(int dimension, double radius, int intervals);

  int dimension() const { return dimension_; }
  double radius() const { return radius_; }
  int intervals() const { return n_; }
  /// Number of free nodes (= intervals).
  int size() const { return n_; }
  double h() const { return h_; }
  double node(int i) const { return i * h_; }
  std::span<const double> weights() const { return w_; }
  /// g_{i+1/2} for i = 0..n-1; the last edge joins the boundary node.
  std::span<const double> edges() const { return g_; }

  /// out = K·u.
  void apply_stiffness(std::span<const double> u, std::span<double> out) const;
  /// uᵀKu.
  double stiffness_form(std::span<const double> u) const;
  /// Solves (a·W + b·K + diag(extra)) x = rhs.
  std::vector<double> solve_shifted(double a, double b, std::span<const double> rhs,
                                    std::span<const double> extra = {}) const;

 private:
  int dimension_;
  double radius_;
  int n_;
  double h_;
  std::vector<double> w_, g_;
};

/// Nodal values on a Mesh with cached mass and gradient norm.
class Field {
 public:
  Field() = default;
  Field(std::shared_ptr<const Mesh> mesh, std::vector<double> values);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  std::span<const double> values() const { return u_; }
  double operator[](int i) const { return u_[i]; }
  int size() const { return static_cast<int>(u_.size()); }

  /// Σ w_i u_i².
  double mass() const { return mass_; }
  /// uᵀKu.
  double grad_norm_sq() const { return grad_; }

  void assign(std::vector<double> values);
  void scale(double s);
  /// Rescales to mass rho exactly (up to rounding).
  void normalize(double rho);

 private:
  void refresh();

  std::shared_ptr<const Mesh> mesh_;
  std::vector<double> u_;
  double mass_ = 0.0;
  double grad_ = 0.0;
};

/// Samples a radial profile (Hermite interpolation) on the mesh nodes.
Field sample_field(std::shared_ptr<const Mesh> mesh, const RadialProfile& profile);
Field sample_field(std::shared_ptr<const Mesh> mesh, const std::function<double(double)>& u);

/// Panel-structured profile (even interval counts use Simpson panels) with
/// second-order derivative estimates, for verification and interpolation.
RadialProfile to_profile(const Field& u);

/// Cubic Hermite transfer of u onto another mesh of the same ball.
Field resample(const Field& u, std::shared_ptr<const Mesh> target);

/// (4·fine - coarse)/3 at the coarse nodes; fine must have twice the
/// intervals. Cancels the h² term of mesh solutions.
Field richardson(const Field& coarse, const Field& fine);

double weighted_dot(const Mesh& mesh, std::span<const double> a, std::span<const double> b);

/// ½uᵀKu - η Σ w_i F(u_i).
double discrete_energy(const Field& u, const ProblemSpec& spec);

/// Euclidean gradient of discrete_energy: K u - η W f(u).
std::vector<double> energy_gradient(const Field& u, const ProblemSpec& spec);

/// ω = (η Σ w f(u)u - uᵀKu) / Σ w u².
double multiplier_estimate(const Field& u, const ProblemSpec& spec);

/// ‖W⁻¹Ku + ωu - ηf(u)‖_W relative to the sum of the three term norms.
double constrained_gradient_norm(const Field& u, const ProblemSpec& spec, double omega);

IdentityTerms identity_terms(const Field& u, const ProblemSpec& spec);

inline constexpr double kRoundoffFloorFactor = 8.0;

struct FlowConfig {
  /// On the relative constrained gradient. Roundoff puts a floor near
  /// ε_mach·n² on it, so the effective tolerance is never below
  /// kRoundoffFloorFactor·ε_mach·n².
  double tolerance = 1e-9;
  int maxIterations = 20000;
  double initialStep = 1e-3;
  double maxStep = 1e3;
  double minStep = 1e-14;
  double growth = 1.5;
  /// A_α level; unset selects max(2λ₁, 1.05‖∇v₁‖²/ρ) with v₁ the ε = 1 bubble.
  std::optional<double> alpha;
  /// Skip the Gagliardo-Nirenberg based boundary certificate (it needs
  /// gn_best_constant, which is not free).
  bool certify = true;
};

struct FlowResult {
  Field u;
  double omega = 0.0;
  int iterations = 0;
  double constrainedGradNorm = 0.0;
  double energy = 0.0;
  double alpha = 0.0;
  bool inAlphaInterior = false;
  double alphaMargin = 0.0;  // αρ - ‖∇u‖²
  double boundaryLevel = std::numeric_limits<double>::quiet_NaN();
  bool boundaryCertificate = false;
  bool positive = false;
  double maxEnergyIncrease = 0.0;
};

class FlowError : public SolverError {
 public:
  FlowError(ErrorKind kind, const std::string& what, FlowResult last)
      : SolverError(kind, what), last_(std::move(last)) {}
  const FlowResult& last() const { return last_; }

 private:
  FlowResult last_;
};

/// Non-quadratic part of a functional E(u) = ½uᵀKu + Φ(u): Φ itself and the
/// nodal force -W⁻¹∇Φ.
struct Nonlinearity {
  std::function<double(const Field&)> potential;
  std::function<void(const Field&, std::vector<double>&)> force;
};

Nonlinearity problem_nonlinearity(const ProblemSpec& spec);

struct DescentResult {
  Field u;
  double energy = 0.0;
  double omega = 0.0;
  double gradNorm = 0.0;
  int iterations = 0;
  double maxEnergyIncrease = 0.0;
  bool converged = false;
  bool stalled = false;
};

/// v = u - τ(W + τK)⁻¹(Ku - W·force + ωWu) with ω making the step tangent to
/// the mass sphere at u. Unnormalized; stationary exactly at critical points.
std::vector<double> projected_step(const Field& u, std::span<const double> force, double tau);

/// projected_step iterations, each rescaled to mass rho, with energy
/// backtracking on τ.
DescentResult constrained_descent(const Field& u0, double rho, const Nonlinearity& phi, const FlowConfig& config);

double default_alpha(const ProblemSpec& spec, double rho);

FlowResult flow_to_minimizer(const ProblemSpec& spec, double rho, const Field& u0, const FlowConfig& config = {});

/// αρ/2 - η(|μ|/p)C_{N,p}^p α^{pγ_p/2}ρ^{p/2} - η·(q-term), the q-term being
/// (1/2*)S^{-2*/2}α^{2*/2}ρ^{2*/2} when q = 2* and (1/q)C_{N,q}^q α^{qγ_q/2}ρ^{q/2}
/// when q < 2*.
double boundary_level_lower_bound(double alpha, double rho, const ProblemSpec& spec);

struct MeshConfig {
  int intervals = 2000;
  FlowConfig flow;
};

struct ThetaPoint {
  double eps = 0.0;
  double theta = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string error;
};

/// θ_ε = inf{‖∇u‖² - ε‖u‖_{2*}² : ‖u‖₂ = 1} on B_R, warm-started along the
/// grid in increasing ε.
std::vector<ThetaPoint> theta_curve(int dimension, double radius, const std::vector<double>& epsGrid,
                                    const MeshConfig& config = {});

struct GnConfig {
  double radius = 30.0;
  int intervals = 6000;
  int maxIterations = 5000;
  double tolerance = 1e-13;
};

struct GnResult {
  double constant = 0.0;
  Field maximizer;
  int iterations = 0;
  double boundaryRatio = 0.0;
};

/// Maximizes ‖u‖_q / (‖∇u‖^{γ_q}‖u‖^{1-γ_q}) over fields on B_L by the
/// normalized iteration u ← (K + W)⁻¹W|u|^{q-2}u / ‖·‖, then evaluates the
/// quotient with exact piecewise-linear integrals.
GnResult gn_best_constant(int dimension, double q, const GnConfig& config = {});

/// Quotient of a mesh field with exact piecewise-linear integrals.
double gn_quotient(const Field& u, double q);

/// Cached gn_best_constant(N, q).constant with default configuration.
double gn_constant_cached(int dimension, double q);

}  // namespace normbranch
