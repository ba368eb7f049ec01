#include "normbranch/pass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "normbranch/numerics.hpp"

namespace normbranch {

void CutoffConfig::validate() const {
  if (!(innerFraction > 0.0 && innerFraction < outerFraction && outerFraction <= 1.0))
    throw std::invalid_argument("CutoffConfig: need 0 < inner < outer <= 1");
}

double cutoff_value(double r, double radius, const CutoffConfig& c) {
  const double a = c.innerFraction * radius, b = c.outerFraction * radius;
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  const double s = (r - a) / (b - a);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double cutoff_derivative(double r, double radius, const CutoffConfig& c) {
  const double a = c.innerFraction * radius, b = c.outerFraction * radius;
  if (r <= a || r >= b) return 0.0;
  const double s = (r - a) / (b - a);
  return -30.0 * s * s * (1.0 - s) * (1.0 - s) / (b - a);
}

namespace {

double bubble_scale(int N, double eps) { return std::pow(N * (N - 2.0) * eps * eps, (N - 2.0) / 4.0); }

void require_bubble_dimension(int N) {
  if (N < 3) throw std::invalid_argument("bubbles need dimension >= 3");
}

}  // namespace

double bubble_value(int N, double eps, double r, double radius, const CutoffConfig& cutoff) {
  require_bubble_dimension(N);
  const double phi = cutoff_value(r, radius, cutoff);
  if (phi == 0.0) return 0.0;
  return phi * bubble_scale(N, eps) * std::pow(eps * eps + r * r, -(N - 2.0) / 2.0);
}

double bubble_derivative(int N, double eps, double r, double radius, const CutoffConfig& cutoff) {
  require_bubble_dimension(N);
  const double d = eps * eps + r * r;
  const double c = bubble_scale(N, eps);
  return c * (cutoff_derivative(r, radius, cutoff) * std::pow(d, -(N - 2.0) / 2.0) -
              cutoff_value(r, radius, cutoff) * (N - 2.0) * r * std::pow(d, -N / 2.0));
}

BubbleNorms bubble_norms(int N, double eps, double radius, const CutoffConfig& cutoff) {
  require_bubble_dimension(N);
  cutoff.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("bubble_norms: eps must be > 0");
  const double rIn = cutoff.innerFraction * radius, rOut = cutoff.outerFraction * radius;
  std::vector<double> breaks{0.0};
  for (double x = eps / 16.0; x < rIn; x *= 2.0) breaks.push_back(x);
  for (int k = 0; k <= 8; ++k) breaks.push_back(rIn + (rOut - rIn) * k / 8.0);
  const auto [xs, ws] = numerics::gauss_legendre(20);
  const double crit = critical_exponent(N);
  BubbleNorms b;
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    const double lo = breaks[j], hi = breaks[j + 1];
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double r = mid + half * xs[k];
      const double wr = ws[k] * half * std::pow(r, N - 1);
      const double u = bubble_value(N, eps, r, radius, cutoff);
      const double du = bubble_derivative(N, eps, r, radius, cutoff);
      b.gradNormSq += wr * du * du;
      b.critNorm += wr * std::pow(u, crit);
      b.massSq += wr * u * u;
    }
  }
  const double A = sphere_area(N);
  b.gradNormSq *= A;
  b.critNorm *= A;
  b.massSq *= A;
  return b;
}

BubbleFamily bubble(double eps, const ProblemSpec& spec, std::shared_ptr<const Mesh> mesh, double rho,
                    const CutoffConfig& cutoff) {
  require_bubble_dimension(spec.dimension);
  cutoff.validate();
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("bubble: eps must lie in (0, 1]");
  if (!(rho > 0.0)) throw std::invalid_argument("bubble: rho must be > 0");
  BubbleFamily f;
  f.eps = eps;
  f.cutoff = cutoff;
  f.rIn = cutoff.innerFraction * spec.radius;
  f.rOut = cutoff.outerFraction * spec.radius;
  const int N = spec.dimension;
  const double R = spec.radius;
  f.profile = sample_field(mesh, [&](double r) { return bubble_value(N, eps, r, R, cutoff); });
  f.normalized = f.profile;
  f.normalized.normalize(rho);
  f.norms = bubble_norms(N, eps, R, cutoff);
  return f;
}

void PathState::evaluate(const ProblemSpec& spec) {
  energies.resize(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) energies[j] = discrete_energy(nodes[j], spec);
  maxIndex = static_cast<int>(std::max_element(energies.begin(), energies.end()) - energies.begin());
  eta = spec.eta;
}

double choose_eps0(const ProblemSpec& spec, double rho, std::shared_ptr<const Mesh> mesh, double alpha,
                   const CutoffConfig& cutoff) {
  const double level = boundary_level_lower_bound(alpha, rho, spec);
  for (double eps = 1.0; eps >= 2.0 * mesh->h(); eps *= 0.5) {
    const BubbleFamily b = bubble(eps, spec, mesh, rho, cutoff);
    if (b.normalized.grad_norm_sq() > alpha * rho && discrete_energy(b.normalized, spec) < level) return eps;
  }
  std::ostringstream os;
  os << "no eps = 2^-k down to the mesh scale leaves A_alpha below the boundary level " << level;
  throw SolverError(ErrorKind::GeometryFail, os.str());
}

InitialPath initial_path(double eps0, int nodes, const ProblemSpec& spec, double rho,
                         std::shared_ptr<const Mesh> mesh, double alpha, const CutoffConfig& cutoff) {
  if (nodes < 3) throw std::invalid_argument("initial_path: need at least 3 nodes");
  if (!(eps0 > 0.0 && eps0 < 1.0)) throw std::invalid_argument("initial_path: eps0 must lie in (0, 1)");
  InitialPath ip;
  ip.eps0 = eps0;
  ip.alpha = alpha;
  ip.boundaryLevel = boundary_level_lower_bound(alpha, rho, spec);
  ip.path.rho = rho;
  for (int j = 0; j < nodes; ++j) {
    const double t = static_cast<double>(j) / (nodes - 1);
    const double eps = j == nodes - 1 ? eps0 : (1.0 - t) + t * eps0;
    ip.path.nodes.push_back(bubble(eps, spec, mesh, rho, cutoff).normalized);
  }
  ip.path.evaluate(spec);
  ip.endpointMax = std::max(ip.path.energies.front(), ip.path.energies.back());
  ip.farEndpointOutside = ip.path.nodes.back().grad_norm_sq() > alpha * rho;
  if (!(ip.endpointMax < ip.boundaryLevel) || !ip.farEndpointOutside) {
    std::ostringstream os;
    os << "endpoint energies I(v_1) = " << ip.path.energies.front() << ", I(v_eps0) = " << ip.path.energies.back()
       << ", boundary level " << ip.boundaryLevel;
    if (!ip.farEndpointOutside) os << "; v_eps0 lies inside A_alpha";
    throw SolverError(ErrorKind::GeometryFail, os.str());
  }
  const int N = spec.dimension;
  const double R = spec.radius;
  auto node_at = [&](double eps) {
    Field f = sample_field(mesh, [&](double r) { return bubble_value(N, eps, r, R, cutoff); });
    f.normalize(rho);
    return f;
  };
  const int dense = 40 * nodes;
  std::vector<double> eps(dense), energy(dense), s(dense, 0.0);
  Field prev;
  for (int k = 0; k < dense; ++k) {
    eps[k] = std::pow(eps0, static_cast<double>(k) / (dense - 1));
    Field f = node_at(eps[k]);
    energy[k] = discrete_energy(f, spec);
    if (k > 0) {
      std::vector<double> d(mesh->size());
      for (int i = 0; i < mesh->size(); ++i) d[i] = f[i] - prev[i];
      s[k] = s[k - 1] + std::sqrt(weighted_dot(*mesh, d, d));
    }
    prev = std::move(f);
  }
  const int top = static_cast<int>(std::max_element(energy.begin(), energy.end()) - energy.begin());
  const double lo = std::log(eps[std::min(dense - 1, top + 1)]), hi = std::log(eps[std::max(0, top - 1)]);
  const auto best = numerics::golden_maximize([&](double le) { return discrete_energy(node_at(std::exp(le)), spec); },
                                              lo, hi, 1e-10);
  ip.curveMax = std::max(best.fx, energy[top]);
  ip.curveMaxEps = best.fx >= energy[top] ? std::exp(best.x) : eps[top];
  ip.arclength.rho = rho;
  for (int j = 0; j < nodes; ++j) {
    const double target = s.back() * j / (nodes - 1);
    const int k = std::clamp(static_cast<int>(std::lower_bound(s.begin(), s.end(), target) - s.begin()), 1, dense - 1);
    const double t = (target - s[k - 1]) / (s[k] - s[k - 1]);
    const double le = (1.0 - t) * std::log(eps[k - 1]) + t * std::log(eps[k]);
    ip.arclength.nodes.push_back(j == 0 ? node_at(1.0) : (j == nodes - 1 ? node_at(eps0) : node_at(std::exp(le))));
  }
  ip.arclength.evaluate(spec);
  return ip;
}

namespace {

// One backtracked semi-implicit step; false when τ underflows.
bool descend_node(Field& u, double& energy, double& tau, const ProblemSpec& spec, double rho, double maxStep) {
  const int n = u.size();
  std::vector<double> force(n);
  for (int i = 0; i < n; ++i) force[i] = spec.eta * spec.nonlinearity(u[i]);
  while (tau >= 1e-14) {
    Field v(u.mesh_ptr(), projected_step(u, force, tau));
    if (v.mass() > 0.0 && std::isfinite(v.mass())) {
      v.normalize(rho);
      const double e = discrete_energy(v, spec);
      if (e <= energy + 1e-12 * std::max(1.0, std::abs(energy))) {
        u = std::move(v);
        energy = e;
        tau = std::min(1.5 * tau, maxStep);
        return true;
      }
    }
    tau *= 0.5;
  }
  return false;
}

// Equal W-arclength redistribution of nodes lo..hi, both kept fixed, nodes
// back on the sphere.
void reparameterize(PathState& path, int lo, int hi) {
  if (hi - lo < 2) return;
  const Mesh& m = path.nodes.front().mesh();
  const int n = m.size();
  const int M = hi - lo + 1;
  std::vector<double> s(M, 0.0), diff(n);
  for (int j = 1; j < M; ++j) {
    for (int i = 0; i < n; ++i) diff[i] = path.nodes[lo + j][i] - path.nodes[lo + j - 1][i];
    s[j] = s[j - 1] + std::sqrt(weighted_dot(m, diff, diff));
  }
  const double L = s.back();
  if (!(L > 0.0)) return;
  std::vector<Field> out(M - 2);
  int seg = 0;
  for (int k = 1; k < M - 1; ++k) {
    const double target = L * k / (M - 1);
    while (seg < M - 2 && s[seg + 1] < target) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double t = len > 0.0 ? std::clamp((target - s[seg]) / len, 0.0, 1.0) : 0.0;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = (1.0 - t) * path.nodes[lo + seg][i] + t * path.nodes[lo + seg + 1][i];
    out[k - 1] = Field(path.nodes.front().mesh_ptr(), std::move(v));
    out[k - 1].normalize(path.rho);
  }
  for (int k = 1; k < M - 1; ++k) path.nodes[lo + k] = std::move(out[k - 1]);
}

double relative_gradient(const Field& u, const ProblemSpec& spec) {
  return constrained_gradient_norm(u, spec, multiplier_estimate(u, spec));
}

// Climbing step: descend normal to the path, ascend along the tangent. τ is
// accepted when the constrained gradient shrinks.
void climb_node(Field& u, std::span<const double> tangent, double& tau, double& grad, const ProblemSpec& spec,
                double rho, double maxStep) {
  const Mesh& m = u.mesh();
  const int n = u.size();
  std::vector<double> force(n), t(tangent.begin(), tangent.end());
  for (int i = 0; i < n; ++i) force[i] = spec.eta * spec.nonlinearity(u[i]);
  const double tu = weighted_dot(m, t, u.values()) / u.mass();
  for (int i = 0; i < n; ++i) t[i] -= tu * u[i];
  const double tt = weighted_dot(m, t, t);
  while (tau >= 1e-14) {
    std::vector<double> v = projected_step(u, force, tau);
    if (tt > 0.0) {
      // v = u - τd; flip the tangential part of d
      std::vector<double> d(n);
      for (int i = 0; i < n; ++i) d[i] = (u[i] - v[i]) / tau;
      const double c = 2.0 * weighted_dot(m, d, t) / tt;
      for (int i = 0; i < n; ++i) v[i] = u[i] - tau * (d[i] - c * t[i]);
    }
    Field f(u.mesh_ptr(), std::move(v));
    if (f.mass() > 0.0 && std::isfinite(f.mass())) {
      f.normalize(rho);
      const double g = relative_gradient(f, spec);
      if (g < grad) {
        u = std::move(f);
        grad = g;
        tau = std::min(1.5 * tau, maxStep);
        return;
      }
    }
    tau *= 0.5;
  }
}

PathState relax(const PathState& start, const ProblemSpec& spec, const PassConfig& config, StringReport* report,
                bool throwOnStall, bool parallel) {
  PathState path = start;
  const int M = static_cast<int>(path.nodes.size());
  if (M < 3) throw std::invalid_argument("string_relax: need at least 3 nodes");
  for (const Field& f : path.nodes)
    if (std::abs(f.mass() - path.rho) > 1e-10 * path.rho) throw std::invalid_argument("string_relax: node off the mass sphere");
  path.evaluate(spec);
  std::vector<double> tau(M, config.stringStep);
  StringReport rep;
  double lastMax = path.max_energy();
  // nodes below both endpoints never carry the path max; descending them
  // only lets the far side run off to -inf
  const double floor = std::max(path.energies.front(), path.energies.back());
  double climbGrad = std::numeric_limits<double>::infinity();
  int climber = -1, stagnant = 0;
  for (rep.iterations = 0; rep.iterations < config.stringIterations; ++rep.iterations) {
    const int k = path.maxIndex;
    if (k == 0 || k == M - 1) break;
    if (k != climber) {
      climber = k;
      climbGrad = relative_gradient(path.nodes[k], spec);
    }
    rep.maxGradNorm = climbGrad;
    if (climbGrad < config.stringTolerance) {
      rep.converged = true;
      break;
    }
    std::vector<double> tangent(path.nodes[k].size());
    for (int i = 0; i < path.nodes[k].size(); ++i) tangent[i] = path.nodes[k + 1][i] - path.nodes[k - 1][i];
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int j = 1; j < M - 1; ++j) {
      if (j == k)
        climb_node(path.nodes[j], tangent, tau[j], climbGrad, spec, path.rho, config.stringMaxStep);
      else if (path.energies[j] > floor)
        descend_node(path.nodes[j], path.energies[j], tau[j], spec, path.rho, config.stringMaxStep);
    }
    reparameterize(path, 0, k);
    reparameterize(path, k, M - 1);
    path.evaluate(spec);
    if (path.maxIndex != k) climber = -1;
    rep.maxIncrease = std::max(rep.maxIncrease, path.max_energy() - lastMax);
    stagnant = std::abs(path.max_energy() - lastMax) <= 1e-13 * std::abs(lastMax) ? stagnant + 1 : 0;
    lastMax = path.max_energy();
    if (stagnant >= 50) break;
  }
  if (report) *report = rep;
  if (!rep.converged && throwOnStall) {
    std::ostringstream os;
    os << "string not converged after " << rep.iterations << " iterations (normal gradient " << rep.maxGradNorm
       << ", max node " << path.maxIndex << ")";
    throw SolverError(ErrorKind::Stall, os.str());
  }
  return path;
}

}  // namespace

PathState string_relax(const PathState& path, const ProblemSpec& spec, const PassConfig& config, StringReport* report,
                       bool throwOnStall) {
  return relax(path, spec, config, report, throwOnStall, true);
}

PathState string_relax_serial(const PathState& path, const ProblemSpec& spec, const PassConfig& config,
                              StringReport* report) {
  return relax(path, spec, config, report, false, false);
}

namespace {

struct Residual {
  std::vector<double> F;
  double g = 0.0;
  double value = 0.0;
};

Residual stationarity(const Field& u, double omega, const ProblemSpec& spec, double rho) {
  const Mesh& m = u.mesh();
  const auto w = m.weights();
  const int n = u.size();
  Residual r;
  r.F.resize(n);
  m.apply_stiffness(u.values(), r.F);
  double sk = 0.0, sf = 0.0, sr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ku = r.F[i], f = spec.eta * w[i] * spec.nonlinearity(u[i]);
    r.F[i] = ku + omega * w[i] * u[i] - f;
    sk += ku * ku / w[i];
    sf += f * f / w[i];
    sr += r.F[i] * r.F[i] / w[i];
  }
  r.g = u.mass() - rho;
  const double scale = std::sqrt(sk) + std::abs(omega) * std::sqrt(u.mass()) + std::sqrt(sf);
  r.value = std::max(std::sqrt(sr) / scale, std::abs(r.g) / rho);
  return r;
}

}  // namespace

double stationarity_residual(const Field& u, double omega, const ProblemSpec& spec, double rho) {
  return stationarity(u, omega, spec, rho).value;
}

SaddleResult refine_saddle(const Field& u0, double omega0, const ProblemSpec& spec, double rho, int maxIterations,
                           double tolerance) {
  if (!(rho > 0.0)) throw std::invalid_argument("refine_saddle: rho must be > 0");
  const Mesh& m = u0.mesh();
  const auto w = m.weights();
  const int n = u0.size();
  Field u = u0;
  double omega = omega0;
  Residual res = stationarity(u, omega, spec, rho);
  tolerance = std::max(tolerance, kNewtonFloorFactor * std::numeric_limits<double>::epsilon() * double(n) * n);
  int increases = 0, steps = 0;
  std::vector<double> extra(n), rhs1(n), rhs2(n);
  while (res.value > tolerance) {
    if (steps >= maxIterations) {
      std::ostringstream os;
      os << "no convergence in " << steps << " Newton steps (residual " << res.value << ")";
      throw SolverError(ErrorKind::NewtonDiverged, os.str());
    }
    for (int i = 0; i < n; ++i) {
      extra[i] = -spec.eta * w[i] * spec.nonlinearity_derivative(u[i]);
      rhs1[i] = -res.F[i];
      rhs2[i] = w[i] * u[i];
    }
    std::vector<double> x1, x2;
    try {
      x1 = m.solve_shifted(omega, 1.0, rhs1, extra);
      x2 = m.solve_shifted(omega, 1.0, rhs2, extra);
    } catch (const std::runtime_error& e) {
      throw SolverError(ErrorKind::NewtonDiverged, e.what());
    }
    double a = 0.0, b = 0.0;
    for (int i = 0; i < n; ++i) {
      a += rhs2[i] * x1[i];
      b += rhs2[i] * x2[i];
    }
    const double dOmega = (2.0 * a + res.g) / (2.0 * b);
    const double prev = res.value;
    // damped step: halve until the residual drops, else take the shortest
    Field trial;
    Residual tr;
    double step = 1.0;
    for (int k = 0; k < 12; ++k, step *= 0.5) {
      std::vector<double> v(n);
      for (int i = 0; i < n; ++i) v[i] = u[i] + step * (x1[i] - dOmega * x2[i]);
      trial = Field(u.mesh_ptr(), std::move(v));
      tr = stationarity(trial, omega + step * dOmega, spec, rho);
      if (tr.value < prev) break;
    }
    u = std::move(trial);
    omega += step * dOmega;
    res = std::move(tr);
    ++steps;
    if (!std::isfinite(res.value)) throw SolverError(ErrorKind::NewtonDiverged, "non-finite residual");
    increases = res.value > prev ? increases + 1 : 0;
    if (increases >= 5) {
      std::ostringstream os;
      os << "residual grew for 5 consecutive steps (now " << res.value << ")";
      throw SolverError(ErrorKind::NewtonDiverged, os.str());
    }
  }
  SaddleResult s;
  s.u = u;
  s.omega = omega;
  s.energy = discrete_energy(u, spec);
  s.newtonResidual = res.value;
  s.etaUsed = spec.eta;
  s.newtonSteps = steps;
  s.positive = std::all_of(u.values().begin(), u.values().end(), [](double x) { return x > 0.0; });
  const IdentityTerms t = identity_terms(u, spec);
  s.pohozaevResidual = pohozaev_residual(t, omega, spec);
  s.nehariResidual = nehari_residual(t, omega, spec);
  return s;
}

double upper_bound_factor(const ProblemSpec& spec, double rho) {
  const int N = spec.dimension;
  const double eta = spec.eta;
  if (N >= 5) return std::pow(rho, (N - 2.0) / 2.0) * std::pow(eta, (N - 2.0) * (N - 4.0) / 4.0);
  if (N == 4) return rho / std::abs(std::log(rho * eta));
  if (N == 3) return rho * rho * std::sqrt(eta);
  throw std::invalid_argument("upper_bound_factor: dimension must be >= 3");
}

namespace {

double upper_fixed_part(const ProblemSpec& spec, double rho) {
  const int N = spec.dimension;
  double v = std::pow(sobolev_constant(N), N / 2.0) * std::pow(spec.eta, 1.0 - N / 2.0) / N;
  if (N == 3) v += 0.25 * lambda1(N, spec.radius) * rho;
  return v;
}

}  // namespace

double mountain_pass_upper_bound(const ProblemSpec& spec, double rho, double C) {
  return upper_fixed_part(spec, rho) + C * upper_bound_factor(spec, rho);
}

double solution_energy_lower_bound(const ProblemSpec& spec, double rho) {
  const int N = spec.dimension;
  const double l1 = lambda1(N, spec.radius);
  if (spec.p <= 2.0 + 4.0 / N) return l1 * rho / N;
  return (0.5 - 2.0 / (N * (spec.p - 2.0))) * l1 * rho;
}

InradiusCheck inradius_condition(const ProblemSpec& spec) {
  InradiusCheck c;
  if (spec.dimension != 3) return c;
  const double l1 = lambda1(3, spec.radius);
  c.lhs = l1;  // the inradius of a ball is its radius
  if (spec.p > 2.0 && spec.p <= 10.0 / 3.0) {
    c.applicable = true;
    c.rhs = 4.0 / 3.0 * l1;
  } else if (spec.p > 14.0 / 3.0 && spec.p < 6.0) {
    c.applicable = true;
    c.rhs = (2.0 - 8.0 / (3.0 * (spec.p - 2.0))) * l1;
  }
  c.holds = c.applicable && c.lhs < c.rhs;
  return c;
}

namespace {

LevelBounds level_bounds(const ProblemSpec& spec, double rho, double energy, double pathMax) {
  LevelBounds lb;
  const int N = spec.dimension;
  lb.upperLeading = std::pow(sobolev_constant(N), N / 2.0) * std::pow(spec.eta, 1.0 - N / 2.0) / N;
  lb.upperFactor = upper_bound_factor(spec, rho);
  lb.upperConstant = std::max(0.0, (pathMax - upper_fixed_part(spec, rho)) / lb.upperFactor);
  lb.upper = mountain_pass_upper_bound(spec, rho, lb.upperConstant);
  lb.lower = solution_energy_lower_bound(spec, rho);
  lb.lowerFirstCase = spec.p <= 2.0 + 4.0 / N;
  lb.lowerSlack = lb.lowerFirstCase ? std::max(0.0, (lb.lower - energy) / rho) : 0.0;
  return lb;
}

}  // namespace

PassResult mountain_pass(const ProblemSpec& spec, double rho, const PassConfig& config, const PathState* warmStart) {
  spec.validate();
  require_bubble_dimension(spec.dimension);
  if (!(rho > 0.0)) throw std::invalid_argument("mountain_pass: rho must be > 0");
  auto mesh = std::make_shared<const Mesh>(spec.dimension, spec.radius, config.intervals);
  PassResult r;
  const double alpha = config.alpha.value_or(default_alpha(spec, rho));
  const double eps0 = config.eps0.value_or(choose_eps0(spec, rho, mesh, alpha, config.cutoff));
  r.initial = initial_path(eps0, config.nodes, spec, rho, mesh, alpha, config.cutoff);
  r.initialMax = std::max(r.initial.curveMax, r.initial.path.max_energy());
  PathState start = r.initial.arclength;
  if (warmStart && warmStart->nodes.size() == start.nodes.size() &&
      warmStart->nodes.front().size() == mesh->size() && warmStart->rho == rho) {
    for (std::size_t j = 1; j + 1 < start.nodes.size(); ++j) start.nodes[j] = Field(mesh, std::vector<double>(warmStart->nodes[j].values().begin(), warmStart->nodes[j].values().end()));
    start.evaluate(spec);
  }
  r.relaxed = string_relax(start, spec, config, &r.stringReport, false);
  r.relaxedMax = r.relaxed.max_energy();
  const Field& top = r.relaxed.nodes[r.relaxed.maxIndex];
  r.coarseSaddle = refine_saddle(top, multiplier_estimate(top, spec), spec, rho, config.newtonIterations,
                                 config.newtonTolerance);
  r.saddle = r.coarseSaddle;
  if (config.finalIntervals > config.intervals) {
    Field fine = resample(r.coarseSaddle.u, std::make_shared<const Mesh>(spec.dimension, spec.radius, config.finalIntervals));
    r.saddle = refine_saddle(fine, r.coarseSaddle.omega, spec, rho, config.newtonIterations, config.newtonTolerance);
  }
  r.bounds = level_bounds(spec, rho, r.saddle.energy, r.initialMax);
  r.sandwich = r.saddle.energy > r.bounds.lower && r.saddle.energy <= r.bounds.upper;
  r.inradius = inradius_condition(spec);
  return r;
}

EtaScan level_vs_eta(const ProblemSpec& spec, double rho, const std::vector<double>& etaGrid,
                     const PassConfig& config) {
  for (std::size_t i = 0; i < etaGrid.size(); ++i) {
    if (!(etaGrid[i] > 0.0 && etaGrid[i] <= 1.0)) throw std::invalid_argument("level_vs_eta: eta must lie in (0, 1]");
    if (i > 0 && !(etaGrid[i] > etaGrid[i - 1])) throw std::invalid_argument("level_vs_eta: grid must increase");
  }
  EtaScan scan;
  std::optional<PathState> warm;
  std::vector<double> initialMax;
  for (double eta : etaGrid) {
    ProblemSpec s = spec;
    s.eta = eta;
    EtaLevel lv;
    lv.eta = eta;
    try {
      const PassResult r = mountain_pass(s, rho, config, warm ? &*warm : nullptr);
      lv.level = r.saddle.energy;
      lv.pathMax = r.relaxedMax;
      lv.ok = true;
      warm = r.relaxed;
      initialMax.push_back(r.initialMax);
      scan.fittedC = std::max(scan.fittedC, r.bounds.upperConstant);
    } catch (const std::exception& e) {
      lv.error = e.what();
      initialMax.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    scan.levels.push_back(lv);
  }
  scan.nonIncreasing = true;
  const EtaLevel* prev = nullptr;
  for (auto& lv : scan.levels) {
    if (!lv.ok) {
      scan.nonIncreasing = false;
      continue;
    }
    ProblemSpec s = spec;
    s.eta = lv.eta;
    lv.upperBound = mountain_pass_upper_bound(s, rho, scan.fittedC);
    if (prev) {
      scan.worstIncrease = std::max(scan.worstIncrease, lv.level - prev->level);
      if (lv.level > prev->level + kLevelMonotoneSlack) scan.nonIncreasing = false;
    }
    prev = &lv;
  }
  // Lagrange extrapolation to η = 1 through the (up to) three largest η < 1
  std::vector<const EtaLevel*> below;
  const EtaLevel* one = nullptr;
  for (const auto& lv : scan.levels) {
    if (!lv.ok) continue;
    if (lv.eta == 1.0) one = &lv;
    else below.push_back(&lv);
  }
  if (below.size() > 3) below.erase(below.begin(), below.end() - 3);
  if (below.size() >= 2 && one) {
    double est = 0.0;
    for (std::size_t i = 0; i < below.size(); ++i) {
      double l = 1.0;
      for (std::size_t j = 0; j < below.size(); ++j)
        if (j != i) l *= (1.0 - below[j]->eta) / (below[i]->eta - below[j]->eta);
      est += l * below[i]->level;
    }
    scan.leftLimitEstimate = est;
    scan.leftLimitGap = std::abs(est - one->level);
    // error of c₁ on the string mesh, from one pass on the doubled mesh
    try {
      ProblemSpec s = spec;
      s.eta = 1.0;
      PassConfig fine = config;
      fine.intervals = 2 * config.intervals;
      fine.finalIntervals = 0;
      const double cFine = mountain_pass(s, rho, fine).saddle.energy;
      const double cCoarse = config.finalIntervals > 0 ? mountain_pass(s, rho, [&] {
        PassConfig c = config;
        c.finalIntervals = 0;
        return c;
      }()).saddle.energy : one->level;
      scan.discretizationTolerance = 4.0 / 3.0 * std::abs(cFine - cCoarse);
      scan.leftContinuous = scan.leftLimitGap <= scan.discretizationTolerance;
    } catch (const std::exception&) {
    }
  }
  return scan;
}

}  // namespace normbranch
