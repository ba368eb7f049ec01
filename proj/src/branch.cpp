#include "normbranch/branch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "normbranch/errors.hpp"
#include "normbranch/numerics.hpp"
#include "normbranch/verify.hpp"

namespace normbranch {

BranchPoint make_branch_point(RadialSolution sol) {
  BranchPoint p;
  p.omega = sol.omega;
  p.lambda = -sol.omega;
  p.centerValue = sol.centerValue;
  p.rho = sol.rho;
  p.energy = sol.energy;
  p.gradNormSq = sol.gradNormSq;
  p.boundarySlope = sol.profile.empty() ? sol.boundarySlope : sol.profile.back().du;
  p.pohozaevResidual = pohozaev_residual(sol);
  p.nehariResidual = nehari_residual(sol);
  p.solution = std::make_shared<const RadialSolution>(std::move(sol));
  return p;
}

const char* to_string(EndpointStatus s) {
  switch (s) {
    case EndpointStatus::Vanished: return "vanished";
    case EndpointStatus::NoSolution: return "no-solution";
    case EndpointStatus::BoundaryOfWindow: return "boundary-of-window";
  }
  return "unknown";
}

void StepPolicy::validate() const {
  if (!(initialStep > 0.0 && initialStep <= 0.5)) throw std::invalid_argument("StepPolicy: initialStep must lie in (0, 0.5]");
  if (!(minStep > 0.0 && minStep < initialStep)) throw std::invalid_argument("StepPolicy: need 0 < minStep < initialStep");
  if (!(vanishFraction > 0.0 && vanishFraction < 1.0)) throw std::invalid_argument("StepPolicy: vanishFraction must lie in (0, 1)");
}

std::size_t Branch::max_index() const {
  if (points.empty()) throw std::logic_error("Branch::max_index: empty branch");
  return std::max_element(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.rho < b.rho; }) -
         points.begin();
}

std::pair<double, double> admissible_window(const ProblemSpec& spec, double rho) {
  const double l1 = lambda1(spec.dimension, spec.radius);
  if (spec.brezis_nirenberg()) return {spec.dimension == 3 ? 0.25 * l1 : 0.0, l1};
  if (multiplier_regime(spec)) return {-multiplier_upper_bound(spec, rho), l1};
  return {-10.0 * l1, l1};
}

std::pair<double, double> offset_window(std::pair<double, double> w, double offset) {
  const double d = offset * (w.second - w.first);
  return {w.first + d, w.second - d};
}

namespace {

std::optional<BranchPoint> solve_at(double lambda, const ProblemSpec& spec, ShootOptions options,
                                    std::optional<double> hint) {
  if (hint) options.centerHint = hint;
  try {
    return make_branch_point(shoot_ground_state(-lambda, spec, options));
  } catch (const SolverError&) {
    return std::nullopt;
  }
}

}  // namespace

Branch trace_branch(const ProblemSpec& spec, double lambdaMin, double lambdaMax, const StepPolicy& policy) {
  spec.validate();
  policy.validate();
  if (!(lambdaMin < lambdaMax)) throw std::invalid_argument("trace_branch: need lambdaMin < lambdaMax");
  const double width = lambdaMax - lambdaMin;
  const int K = static_cast<int>(std::ceil(1.0 / policy.initialStep - 1e-9));
  std::vector<double> grid(K + 1);
  for (int k = 0; k <= K; ++k) grid[k] = lambdaMin + width * k / K;
  std::vector<std::optional<BranchPoint>> found(K + 1);
  if (policy.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k <= K; ++k) found[k] = solve_at(grid[k], spec, policy.shoot, std::nullopt);
  } else {
    std::optional<double> hint;
    for (int k = 0; k <= K; ++k) {
      found[k] = solve_at(grid[k], spec, policy.shoot, hint);
      if (!found[k] && hint) found[k] = solve_at(grid[k], spec, policy.shoot, std::nullopt);
      hint = found[k] ? std::optional<double>(found[k]->centerValue) : std::nullopt;
    }
  }
  Branch b;
  b.spec = spec;
  b.lambdaMin = lambdaMin;
  b.lambdaMax = lambdaMax;
  b.shots = K + 1;
  int first = -1, last = -1;
  for (int k = 0; k <= K; ++k) {
    if (!found[k]) continue;
    if (first < 0) first = k;
    else if (k - last > 1) b.gaps.emplace_back(grid[last], grid[k]);
    last = k;
    b.points.push_back(std::move(*found[k]));
  }
  if (first < 0) {
    std::ostringstream os;
    os << "no solvable lambda in [" << lambdaMin << ", " << lambdaMax << "]";
    throw SolverError(ErrorKind::EmptyBranch, os.str());
  }
  // bisect toward each edge that failed
  auto refine_edge = [&](double good, double bad, double hint) {
    while (std::abs(good - bad) > policy.minStep * width) {
      const double mid = 0.5 * (good + bad);
      ++b.shots;
      if (auto p = solve_at(mid, spec, policy.shoot, hint)) {
        hint = p->centerValue;
        good = mid;
        b.points.push_back(std::move(*p));
      } else {
        bad = mid;
      }
    }
  };
  const double firstHint = b.points.front().centerValue, lastHint = b.points.back().centerValue;
  if (first > 0) refine_edge(grid[first], grid[first - 1], firstHint);
  if (last < K) refine_edge(grid[last], grid[last + 1], lastHint);
  std::sort(b.points.begin(), b.points.end(), [](const auto& x, const auto& y) { return x.lambda < y.lambda; });
  const double peak = b.points[b.max_index()].rho;
  auto status = [&](bool failed, const BranchPoint& edge) {
    if (!failed) return EndpointStatus::BoundaryOfWindow;
    return edge.rho < policy.vanishFraction * peak ? EndpointStatus::Vanished : EndpointStatus::NoSolution;
  };
  b.lowStatus = status(first > 0, b.points.front());
  b.highStatus = status(last < K, b.points.back());
  return b;
}

RhoStar find_rho_star(const Branch& branch, double lambdaTolerance) {
  const auto& pts = branch.points;
  if (pts.size() < 5) throw std::invalid_argument("find_rho_star: need at least 5 branch points");
  const std::size_t i = branch.max_index();
  if (i == 0 || i + 1 == pts.size()) {
    std::ostringstream os;
    os << "sampled mass maximum at the window end lambda = " << pts[i].lambda;
    throw SolverError(ErrorKind::NoInteriorMax, os.str());
  }
  std::vector<double> xs, ys;
  for (const auto& p : pts) {
    xs.push_back(p.lambda);
    ys.push_back(p.rho);
  }
  const numerics::MonotoneCubic cubic(xs, ys);
  const double a = pts[i - 1].lambda, b = pts[i + 1].lambda;
  RhoStar r;
  r.interpolatedLambda = numerics::golden_maximize([&](double x) { return cubic(x); }, a, b, 1e-12 * (b - a)).x;
  // the cubic peaks at a node when the samples are monotone around it, so
  // it only seeds the search on the re-shot mass
  const double hint = pts[i].centerValue;
  ShootOptions opts;
  opts.centerHint = hint;
  auto rho_at = [&](double lam) {
    try {
      return shoot_ground_state(-lam, branch.spec, opts).rho;
    } catch (const SolverError&) {
      return 0.0;
    }
  };
  const double xtol = lambdaTolerance * std::max(1.0, std::abs(pts[i].lambda));
  const auto m = numerics::brent_maximize(rho_at, a, b, r.interpolatedLambda, xtol);
  r.lambdaStar = m.x;
  r.point = make_branch_point(shoot_ground_state(-m.x, branch.spec, opts));
  if (r.point.rho < pts[i].rho) {
    r.point = pts[i];
    r.lambdaStar = pts[i].lambda;
  }
  r.rhoStar = r.point.rho;
  return r;
}

NormalizedSet solve_normalized(const Branch& branch, double rho, const std::optional<RhoStar>& rhoStar) {
  if (!(rho > 0.0)) throw std::invalid_argument("solve_normalized: rho must be > 0");
  NormalizedSet out;
  out.rho = rho;
  out.countIsLowerBound = !branch.spec.brezis_nirenberg();
  if (rhoStar && std::abs(rho - rhoStar->rhoStar) <= kRhoStarMatch * rhoStar->rhoStar) {
    out.solutions.push_back(rhoStar->point);
    return out;
  }
  std::vector<BranchPoint> nodes = branch.points;
  if (rhoStar) {
    nodes.push_back(rhoStar->point);
    std::sort(nodes.begin(), nodes.end(), [](const auto& x, const auto& y) { return x.lambda < y.lambda; });
  }
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double fj = nodes[j].rho - rho;
    if (fj == 0.0) {
      out.solutions.push_back(nodes[j]);
      continue;
    }
    if (j + 1 == nodes.size()) break;
    const double fk = nodes[j + 1].rho - rho;
    if (fk == 0.0 || (fj > 0.0) == (fk > 0.0)) continue;
    ShootOptions opts;
    opts.centerHint = nodes[j].centerValue;
    auto f = [&](double lam) {
      try {
        return shoot_ground_state(-lam, branch.spec, opts).rho - rho;
      } catch (const SolverError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    const auto root = numerics::brent_root(f, nodes[j].lambda, nodes[j + 1].lambda, fj, fk,
                                           1e-14 * std::max(1.0, std::abs(nodes[j].lambda)),
                                           [&](double) { return 1e-12 * rho; });
    out.solutions.push_back(make_branch_point(shoot_ground_state(-root.x, branch.spec, opts)));
  }
  return out;
}

NormalizedSet solve_normalized(const ProblemSpec& spec, double rho, int samples) {
  if (samples < 5) throw std::invalid_argument("solve_normalized: need at least 5 samples");
  const auto w = offset_window(admissible_window(spec, rho), 1e-3);
  StepPolicy policy;
  policy.initialStep = 1.0 / (samples - 1);
  Branch b;
  try {
    b = trace_branch(spec, w.first, w.second, policy);
  } catch (const SolverError& e) {
    if (e.kind() != ErrorKind::EmptyBranch) throw;
    NormalizedSet none;
    none.rho = rho;
    none.countIsLowerBound = !spec.brezis_nirenberg();
    return none;
  }
  std::optional<RhoStar> star;
  try {
    if (b.points.size() >= 5) star = find_rho_star(b);
  } catch (const SolverError&) {
  }
  return solve_normalized(b, rho, star);
}

MassSupremum mass_supremum_probe(const ProblemSpec& spec, const ProbeConfig& config) {
  spec.validate();
  const double crit = spec.dimension >= 3 ? critical_exponent(spec.dimension) : std::numeric_limits<double>::infinity();
  if (!(spec.mu > 0.0 && spec.p > 1.0 && spec.p <= 2.0 && spec.q >= 2.0 && spec.q >= std::max(crit, 3.0) * (1.0 - 1e-14)))
    throw std::invalid_argument("mass_supremum_probe: needs mu > 0, 1 < p <= 2 <= q, q >= max(2*, 3)");
  if (config.samples < 3) throw std::invalid_argument("mass_supremum_probe: need at least 3 samples");
  const double l1 = lambda1(spec.dimension, spec.radius);
  const double omegaLo = -l1 * (1.0 - 1e-3);
  MassSupremum out;
  double rhoRef = 1.0;
  double lastUpper = -std::numeric_limits<double>::infinity();
  std::vector<double> omegas;
  std::vector<std::vector<RadialSolution>> sols;
  for (out.passes = 1; out.passes <= config.maxPasses; ++out.passes) {
    const double upper = multiplier_upper_bound(spec, rhoRef);
    if (upper <= omegaLo) {
      rhoRef *= 0.01;
      continue;
    }
    if (std::abs(upper - lastUpper) <= 1e-12 * std::max(1.0, std::abs(upper))) break;
    lastUpper = upper;
    const int K = config.samples;
    omegas.assign(K, 0.0);
    sols.assign(K, {});
    for (int k = 0; k < K; ++k) omegas[k] = omegaLo + (upper - omegaLo) * k / (K - 1);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < K; ++k) {
      try {
        sols[k] = shoot_all(omegas[k], spec, config.shoot);
      } catch (const SolverError&) {
      }
    }
    double best = 0.0;
    for (const auto& v : sols)
      for (const auto& s : v) best = std::max(best, s.rho);
    out.omegaUpper = upper;
    if (best == 0.0) {
      rhoRef *= 0.01;
      continue;
    }
    if (spec.p == 2.0) break;  // the bound does not depend on the mass
    rhoRef = 0.5 * best;
  }
  int kBest = -1;
  std::size_t sBest = 0;
  out.solutions = 0;
  for (std::size_t k = 0; k < sols.size(); ++k) {
    for (std::size_t s = 0; s < sols[k].size(); ++s) {
      const RadialSolution& sol = sols[k][s];
      ++out.solutions;
      const double excess = sol.omega - multiplier_upper_bound(spec, sol.rho);
      out.worstWindowExcess = std::max(out.worstWindowExcess, excess);
      if (excess > kMultiplierSlack) out.windowRespected = false;
      if (kBest < 0 || sol.rho > sols[kBest][sBest].rho) {
        kBest = static_cast<int>(k);
        sBest = s;
      }
    }
  }
  if (kBest < 0) throw SolverError(ErrorKind::EmptyBranch, "no positive solution on the multiplier window");
  out.rhoSup = sols[kBest][sBest].rho;
  out.omegaAtSup = sols[kBest][sBest].omega;
  const double a = omegas[std::max(0, kBest - 1)];
  const double b = omegas[std::min<int>(omegas.size() - 1, kBest + 1)];
  if (b > a) {
    ShootOptions opts = config.shoot;
    opts.centerHint = sols[kBest][sBest].centerValue;
    auto rho_at = [&](double om) {
      try {
        return shoot_ground_state(om, spec, opts).rho;
      } catch (const SolverError&) {
        return 0.0;
      }
    };
    const auto m = numerics::brent_maximize(rho_at, a, b, out.omegaAtSup, 1e-10 * std::max(1.0, std::abs(out.omegaAtSup)));
    if (m.fx > out.rhoSup) {
      out.rhoSup = m.fx;
      out.omegaAtSup = m.x;
    }
  }
  return out;
}

}  // namespace normbranch
