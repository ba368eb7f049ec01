#include "normbranch/varflow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "normbranch/numerics.hpp"
#include "normbranch/pass.hpp"
#include "normbranch/profile.hpp"

namespace normbranch {

Mesh::Mesh(int dimension, double radius, int intervals)
    : dimension_(dimension), radius_(radius), n_(intervals), h_(radius / intervals) {
  if (dimension < 1) throw std::invalid_argument("Mesh: dimension must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("Mesh: radius must be > 0");
  if (intervals < 4) throw std::invalid_argument("Mesh: need at least 4 intervals");
  const double A = sphere_area(dimension) / dimension;
  auto pw = [&](double r) { return std::pow(r, dimension); };
  w_.resize(n_);
  g_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    const double r = node(i);
    w_[i] = A * (pw(r + 0.5 * h_) - pw(std::max(0.0, r - 0.5 * h_)));
    g_[i] = A * (pw(node(i + 1)) - pw(r)) / (h_ * h_);
  }
}

void Mesh::apply_stiffness(std::span<const double> u, std::span<double> out) const {
  for (int i = 0; i < n_; ++i) {
    const double right = i + 1 < n_ ? u[i + 1] : 0.0;
    double v = g_[i] * (u[i] - right);
    if (i > 0) v += g_[i - 1] * (u[i] - u[i - 1]);
    out[i] = v;
  }
}

double Mesh::stiffness_form(std::span<const double> u) const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double d = (i + 1 < n_ ? u[i + 1] : 0.0) - u[i];
    s += g_[i] * d * d;
  }
  return s;
}

std::vector<double> Mesh::solve_shifted(double a, double b, std::span<const double> rhs,
                                        std::span<const double> extra) const {
  std::vector<double> lo(n_), di(n_), up(n_);
  for (int i = 0; i < n_; ++i) {
    di[i] = a * w_[i] + b * (g_[i] + (i > 0 ? g_[i - 1] : 0.0)) + (extra.empty() ? 0.0 : extra[i]);
    lo[i] = i > 0 ? -b * g_[i - 1] : 0.0;
    up[i] = -b * g_[i];
  }
  if (extra.empty()) return numerics::solve_tridiagonal(lo, di, up, rhs);
  return numerics::solve_tridiagonal_pivoting(lo, di, up, rhs);
}

Field::Field(std::shared_ptr<const Mesh> mesh, std::vector<double> values) : mesh_(std::move(mesh)), u_(std::move(values)) {
  if (!mesh_) throw std::invalid_argument("Field: null mesh");
  if (static_cast<int>(u_.size()) != mesh_->size()) throw std::invalid_argument("Field: size does not match mesh");
  refresh();
}

void Field::assign(std::vector<double> values) {
  if (static_cast<int>(values.size()) != mesh_->size()) throw std::invalid_argument("Field: size does not match mesh");
  u_ = std::move(values);
  refresh();
}

void Field::scale(double s) {
  for (double& x : u_) x *= s;
  refresh();
}

void Field::normalize(double rho) {
  if (!(mass_ > 0.0)) throw std::invalid_argument("Field::normalize: zero field");
  scale(std::sqrt(rho / mass_));
}

void Field::refresh() {
  const auto w = mesh_->weights();
  double m = 0.0;
  for (std::size_t i = 0; i < u_.size(); ++i) m += w[i] * u_[i] * u_[i];
  mass_ = m;
  grad_ = mesh_->stiffness_form(u_);
}

Field sample_field(std::shared_ptr<const Mesh> mesh, const RadialProfile& profile) {
  std::vector<double> v(mesh->size());
  for (int i = 0; i < mesh->size(); ++i) v[i] = interpolate_profile(profile, mesh->node(i)).u;
  return Field(std::move(mesh), std::move(v));
}

Field sample_field(std::shared_ptr<const Mesh> mesh, const std::function<double(double)>& u) {
  std::vector<double> v(mesh->size());
  for (int i = 0; i < mesh->size(); ++i) v[i] = u(mesh->node(i));
  return Field(std::move(mesh), std::move(v));
}

namespace {

double boundary_slope(const Field& u) {
  const int n = u.size();
  return (-4.0 * u[n - 1] + u[n - 2]) / (2.0 * u.mesh().h());
}

}  // namespace

RadialProfile to_profile(const Field& u) {
  const Mesh& m = u.mesh();
  const int n = m.size();
  if (n % 2 != 0) throw std::invalid_argument("to_profile: needs an even number of intervals");
  auto val = [&](int i) { return i < n ? u[i] : 0.0; };
  RadialProfile p(n + 1);
  const double h = m.h();
  for (int i = 0; i <= n; ++i) {
    double du;
    if (i == 0) du = 0.0;
    else if (i == n) du = boundary_slope(u);
    else du = (val(i + 1) - val(i - 1)) / (2.0 * h);
    p[i] = {m.node(i), val(i), du};
  }
  return p;
}

Field resample(const Field& u, std::shared_ptr<const Mesh> target) {
  if (target->dimension() != u.mesh().dimension() || target->radius() != u.mesh().radius())
    throw std::invalid_argument("resample: meshes live on different balls");
  return sample_field(std::move(target), to_profile(u));
}

Field richardson(const Field& coarse, const Field& fine) {
  if (fine.mesh().intervals() != 2 * coarse.mesh().intervals() || fine.mesh().radius() != coarse.mesh().radius())
    throw std::invalid_argument("richardson: fine mesh must halve the coarse spacing");
  std::vector<double> v(coarse.size());
  for (int i = 0; i < coarse.size(); ++i) v[i] = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
  return Field(coarse.mesh_ptr(), std::move(v));
}

double weighted_dot(const Mesh& mesh, std::span<const double> a, std::span<const double> b) {
  const auto w = mesh.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

double discrete_energy(const Field& u, const ProblemSpec& spec) {
  const auto w = u.mesh().weights();
  double pot = 0.0;
  for (int i = 0; i < u.size(); ++i) pot += w[i] * spec.primitive(u[i]);
  return 0.5 * u.grad_norm_sq() - spec.eta * pot;
}

std::vector<double> energy_gradient(const Field& u, const ProblemSpec& spec) {
  const auto w = u.mesh().weights();
  std::vector<double> g(u.size());
  u.mesh().apply_stiffness(u.values(), g);
  for (int i = 0; i < u.size(); ++i) g[i] -= spec.eta * w[i] * spec.nonlinearity(u[i]);
  return g;
}

double multiplier_estimate(const Field& u, const ProblemSpec& spec) {
  const auto w = u.mesh().weights();
  double f = 0.0;
  for (int i = 0; i < u.size(); ++i) f += w[i] * spec.nonlinearity(u[i]) * u[i];
  return (spec.eta * f - u.grad_norm_sq()) / u.mass();
}

namespace {

double residual_norm(const Field& u, std::span<const double> force, double omega) {
  const Mesh& m = u.mesh();
  const auto w = m.weights();
  std::vector<double> ku(u.size());
  m.apply_stiffness(u.values(), ku);
  double s = 0.0, sk = 0.0, sf = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double k = ku[i] / w[i];
    const double r = k - force[i] + omega * u[i];
    s += w[i] * r * r;
    sk += w[i] * k * k;
    sf += w[i] * force[i] * force[i];
  }
  const double scale = std::sqrt(sk) + std::abs(omega) * std::sqrt(u.mass()) + std::sqrt(sf);
  return std::sqrt(s) / scale;
}

}  // namespace

double constrained_gradient_norm(const Field& u, const ProblemSpec& spec, double omega) {
  std::vector<double> force(u.size());
  for (int i = 0; i < u.size(); ++i) force[i] = spec.eta * spec.nonlinearity(u[i]);
  return residual_norm(u, force, omega);
}

IdentityTerms identity_terms(const Field& u, const ProblemSpec& spec) {
  const auto w = u.mesh().weights();
  IdentityTerms t;
  t.gradNormSq = u.grad_norm_sq();
  t.rho = u.mass();
  for (int i = 0; i < u.size(); ++i) {
    t.primitiveIntegral += w[i] * spec.primitive(u[i]);
    t.forceIntegral += w[i] * spec.nonlinearity(u[i]) * u[i];
  }
  t.boundarySlope = boundary_slope(u);
  return t;
}

Nonlinearity problem_nonlinearity(const ProblemSpec& spec) {
  Nonlinearity phi;
  phi.potential = [spec](const Field& u) {
    const auto w = u.mesh().weights();
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i) s += w[i] * spec.primitive(u[i]);
    return -spec.eta * s;
  };
  phi.force = [spec](const Field& u, std::vector<double>& f) {
    f.resize(u.size());
    for (int i = 0; i < u.size(); ++i) f[i] = spec.eta * spec.nonlinearity(u[i]);
  };
  return phi;
}

std::vector<double> projected_step(const Field& u, std::span<const double> force, double tau) {
  const Mesh& m = u.mesh();
  const auto w = m.weights();
  const int n = u.size();
  std::vector<double> r(n), wu(n);
  m.apply_stiffness(u.values(), r);
  for (int i = 0; i < n; ++i) {
    r[i] -= w[i] * force[i];
    wu[i] = w[i] * u[i];
  }
  const std::vector<double> a = m.solve_shifted(1.0, tau, r);
  const std::vector<double> b = m.solve_shifted(1.0, tau, wu);
  double ab = 0.0, bb = 0.0;
  for (int i = 0; i < n; ++i) {
    ab += wu[i] * a[i];
    bb += wu[i] * b[i];
  }
  const double omega = -ab / bb;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = u[i] - tau * (a[i] + omega * b[i]);
  return v;
}

DescentResult constrained_descent(const Field& u0, double rho, const Nonlinearity& phi, const FlowConfig& config) {
  if (!(rho > 0.0)) throw std::invalid_argument("constrained_descent: rho must be > 0");
  DescentResult res;
  res.u = u0;
  res.u.normalize(rho);
  const Mesh& m = res.u.mesh();
  const auto w = m.weights();
  const int n = m.size();
  auto energy = [&](const Field& f) { return 0.5 * f.grad_norm_sq() + phi.potential(f); };
  double E = energy(res.u);
  double tau = config.initialStep;
  std::vector<double> force;
  const double tol = std::max(config.tolerance, kRoundoffFloorFactor * std::numeric_limits<double>::epsilon() * n * n);
  for (res.iterations = 0; res.iterations < config.maxIterations; ++res.iterations) {
    phi.force(res.u, force);
    double fu = 0.0;
    for (int i = 0; i < n; ++i) fu += w[i] * force[i] * res.u[i];
    res.omega = (fu - res.u.grad_norm_sq()) / rho;
    res.gradNorm = residual_norm(res.u, force, res.omega);
    if (res.gradNorm <= tol) {
      res.converged = true;
      break;
    }
    while (true) {
      Field v(res.u.mesh_ptr(), projected_step(res.u, force, tau));
      if (!(v.mass() > 0.0) || !std::isfinite(v.mass())) {
        tau *= 0.5;
      } else {
        v.normalize(rho);
        const double Ev = energy(v);
        if (Ev <= E + 1e-12 * std::max(1.0, std::abs(E))) {
          res.maxEnergyIncrease = std::max(res.maxEnergyIncrease, Ev - E);
          res.u = std::move(v);
          E = Ev;
          tau = std::min(tau * config.growth, config.maxStep);
          break;
        }
        tau *= 0.5;
      }
      if (tau < config.minStep) {
        res.stalled = true;
        break;
      }
    }
    if (res.stalled) break;
  }
  res.energy = E;
  return res;
}

double default_alpha(const ProblemSpec& spec, double rho) {
  (void)rho;
  const double l1 = lambda1(spec.dimension, spec.radius);
  if (spec.dimension < 3) return 2.0 * l1;
  const BubbleNorms b = bubble_norms(spec.dimension, 1.0, spec.radius);
  return std::max(2.0 * l1, 1.05 * b.gradNormSq / b.massSq);
}

FlowResult flow_to_minimizer(const ProblemSpec& spec, double rho, const Field& u0, const FlowConfig& config) {
  spec.validate();
  if (!(rho > 0.0)) throw std::invalid_argument("flow_to_minimizer: rho must be > 0");
  const DescentResult d = constrained_descent(u0, rho, problem_nonlinearity(spec), config);
  FlowResult r;
  r.u = d.u;
  r.omega = d.omega;
  r.iterations = d.iterations;
  r.constrainedGradNorm = d.gradNorm;
  r.energy = discrete_energy(d.u, spec);
  r.maxEnergyIncrease = d.maxEnergyIncrease;
  r.alpha = config.alpha.value_or(default_alpha(spec, rho));
  r.alphaMargin = r.alpha * rho - r.u.grad_norm_sq();
  r.inAlphaInterior = r.alphaMargin > 0.0;
  bool allPos = true, allNeg = true;
  for (int i = 0; i < r.u.size(); ++i) {
    allPos = allPos && r.u[i] > 0.0;
    allNeg = allNeg && r.u[i] < 0.0;
  }
  if (allNeg) r.u.scale(-1.0);
  r.positive = allPos || allNeg;
  if (config.certify) {
    try {
      r.boundaryLevel = boundary_level_lower_bound(r.alpha, rho, spec);
      r.boundaryCertificate = r.energy < r.boundaryLevel;
    } catch (const std::invalid_argument&) {
    }
  }
  if (d.stalled) {
    std::ostringstream os;
    os << "energy stalled at iteration " << d.iterations << " (gradient norm " << d.gradNorm << ")";
    throw FlowError(ErrorKind::EnergyStall, os.str(), r);
  }
  if (!d.converged) {
    std::ostringstream os;
    os << "no convergence in " << d.iterations << " iterations (gradient norm " << d.gradNorm << ")";
    throw FlowError(ErrorKind::MaxIterations, os.str(), r);
  }
  if (!r.positive) throw FlowError(ErrorKind::EnergyStall, "flow limit changes sign", r);
  return r;
}

double boundary_level_lower_bound(double alpha, double rho, const ProblemSpec& spec) {
  const int N = spec.dimension;
  const double l1 = lambda1(N, spec.radius);
  if (alpha < l1 * (1.0 - 1e-12)) throw std::invalid_argument("boundary_level_lower_bound: alpha must be >= lambda1");
  double value = 0.5 * alpha * rho;
  auto gn_term = [&](double s) {
    if (s < 2.0) throw std::invalid_argument("boundary_level_lower_bound: exponent below 2");
    const double C = s == 2.0 ? 1.0 : gn_constant_cached(N, s);
    const double g = gn_gamma(N, s);
    return std::pow(C, s) * std::pow(alpha, s * g / 2.0) * std::pow(rho, s / 2.0);
  };
  if (spec.mu != 0.0) value -= spec.eta * std::abs(spec.mu) / spec.p * gn_term(spec.p);
  if (spec.critical()) {
    const double crit = critical_exponent(N);
    const double S = sobolev_constant(N);
    value -= spec.eta / crit * std::pow(S, -crit / 2.0) * std::pow(alpha * rho, crit / 2.0);
  } else if (spec.supercritical()) {
    throw std::invalid_argument("boundary_level_lower_bound: q above the critical exponent");
  } else {
    value -= spec.eta / spec.q * gn_term(spec.q);
  }
  return value;
}

std::vector<ThetaPoint> theta_curve(int N, double radius, const std::vector<double>& epsGrid, const MeshConfig& config) {
  if (N < 3) throw std::invalid_argument("theta_curve: dimension must be >= 3");
  const double S = sobolev_constant(N);
  for (std::size_t i = 0; i < epsGrid.size(); ++i) {
    if (!(epsGrid[i] > 0.0 && epsGrid[i] < S)) throw std::invalid_argument("theta_curve: eps must lie in (0, S)");
    if (i > 0 && !(epsGrid[i] > epsGrid[i - 1])) throw std::invalid_argument("theta_curve: grid must increase");
  }
  const double crit = critical_exponent(N);
  auto mesh = std::make_shared<const Mesh>(N, radius, config.intervals);
  Field u = sample_field(mesh, first_eigenfunction(N, radius));
  std::vector<ThetaPoint> out;
  for (double eps : epsGrid) {
    Nonlinearity phi;
    auto lcrit = [crit](const Field& f) {
      const auto w = f.mesh().weights();
      double s = 0.0;
      for (int i = 0; i < f.size(); ++i) s += w[i] * std::pow(std::abs(f[i]), crit);
      return s;
    };
    phi.potential = [eps, crit, lcrit](const Field& f) { return -0.5 * eps * std::pow(lcrit(f), 2.0 / crit); };
    phi.force = [eps, crit, lcrit](const Field& f, std::vector<double>& g) {
      const double scale = eps * std::pow(lcrit(f), 2.0 / crit - 1.0);
      g.resize(f.size());
      for (int i = 0; i < f.size(); ++i) g[i] = scale * std::pow(std::abs(f[i]), crit - 2.0) * f[i];
    };
    ThetaPoint tp;
    tp.eps = eps;
    try {
      const DescentResult d = constrained_descent(u, 1.0, phi, config.flow);
      tp.theta = 2.0 * d.energy;
      tp.iterations = d.iterations;
      tp.converged = d.converged;
      if (!d.converged) tp.error = d.stalled ? "EnergyStall" : "MaxIterations";
      u = d.u;
    } catch (const std::exception& e) {
      tp.error = e.what();
    }
    out.push_back(tp);
  }
  return out;
}

double gn_quotient(const Field& u, double q) {
  const Mesh& m = u.mesh();
  const int N = m.dimension();
  const auto [xs, ws] = numerics::gauss_legendre(8);
  double aq = 0.0, mass = 0.0;
  const double h = m.h();
  for (int i = 0; i < m.size(); ++i) {
    const double u0 = u[i], u1 = i + 1 < m.size() ? u[i + 1] : 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double t = 0.5 * (1.0 + xs[k]);
      const double r = m.node(i) + t * h;
      const double v = (1.0 - t) * u0 + t * u1;
      const double jac = 0.5 * h * ws[k] * std::pow(r, N - 1);
      aq += jac * std::pow(std::abs(v), q);
      mass += jac * v * v;
    }
  }
  const double A = sphere_area(N);
  aq *= A;
  mass *= A;
  const double grad = u.grad_norm_sq();
  const double g = gn_gamma(N, q);
  return std::pow(aq, 1.0 / q) / (std::pow(grad, g / 2.0) * std::pow(mass, (1.0 - g) / 2.0));
}

GnResult gn_best_constant(int N, double q, const GnConfig& config) {
  if (N < 1) throw std::invalid_argument("gn_best_constant: dimension must be >= 1");
  const double crit = critical_exponent(N);
  if (!(q > 2.0) || !(q < crit)) throw std::invalid_argument("gn_best_constant: q must lie in (2, 2*)");
  auto mesh = std::make_shared<const Mesh>(N, config.radius, config.intervals);
  const auto w = mesh->weights();
  const int n = mesh->size();
  Field u = sample_field(mesh, [](double r) { return std::exp(-0.5 * r * r); });
  u.normalize(1.0);
  GnResult res;
  double Q = gn_quotient(u, q);
  std::vector<double> rhs(n);
  for (res.iterations = 0; res.iterations < config.maxIterations; ++res.iterations) {
    for (int i = 0; i < n; ++i) rhs[i] = w[i] * std::pow(std::abs(u[i]), q - 2.0) * u[i];
    Field v(mesh, mesh->solve_shifted(1.0, 1.0, rhs));
    v.normalize(1.0);
    double change = 0.0;
    for (int i = 0; i < n; ++i) change = std::max(change, std::abs(v[i] - u[i]));
    u = std::move(v);
    const double Qn = gn_quotient(u, q);
    const bool done = std::abs(Qn - Q) <= config.tolerance * Qn && change <= 1e-10;
    Q = Qn;
    if (done) break;
  }
  double peak = 0.0, edge = 0.0;
  for (int i = 0; i < n; ++i) {
    peak = std::max(peak, std::abs(u[i]));
    if (mesh->node(i) >= config.radius - 1.0) edge = std::max(edge, std::abs(u[i]));
  }
  res.boundaryRatio = edge / peak;
  res.constant = Q;
  res.maximizer = u;
  if (res.boundaryRatio > 1e-10) {
    std::ostringstream os;
    os << "maximizer reaches the boundary (ratio " << res.boundaryRatio << "); enlarge the ball";
    throw SolverError(ErrorKind::DomainTooSmall, os.str());
  }
  return res;
}

double gn_constant_cached(int N, double q) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, double> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find({N, q}); it != cache.end()) return it->second;
  }
  const double c = gn_best_constant(N, q).constant;
  std::lock_guard lock(mutex);
  cache[{N, q}] = c;
  return c;
}

}  // namespace normbranch
