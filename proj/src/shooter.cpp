#include "normbranch/shooter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "normbranch/errors.hpp"
#include "normbranch/integrator.hpp"
#include "normbranch/numerics.hpp"
#include "normbranch/profile.hpp"

namespace normbranch {

const char* to_string(ShotClass c) {
  switch (c) {
    case ShotClass::Undershoot: return "undershoot";
    case ShotClass::Hit: return "hit";
    case ShotClass::Overshoot: return "overshoot";
  }
  return "unknown";
}

namespace {
double amplitude_scale(double a) { return std::min(a, 1.0 / a); }
}  // namespace

ShotResult integrate_from_center(double a, double omega, const ProblemSpec& spec, const ShotOptions& options) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("integrate_from_center: center value must be > 0");
  const int N = spec.dimension;
  const double R = spec.radius;
  const double eta = spec.eta;

  // Series start: u = a + c r² + O(r⁴), with δ small enough that the
  // quartic term sits far below the integrator tolerance.
  const double c = (omega * a - eta * spec.nonlinearity(a)) / (2.0 * N);
  double delta = 1e-6 * R;
  if (c != 0.0) delta = std::min(delta, 1e-3 * std::sqrt(a / std::abs(c)));

  ShotResult res;
  res.centerValue = a;
  res.profile.push_back({0.0, a, 0.0});
  res.profile.push_back({0.5 * delta, a + 0.25 * c * delta * delta, c * delta});
  res.profile.push_back({delta, a + c * delta * delta, 2.0 * c * delta});

  auto rhs = [&](double r, const OdeState<2>& y) -> OdeState<2> {
    const double damping = N == 1 ? 0.0 : (N - 1) / r * y[1];
    return {y[1], -damping + omega * y[0] - eta * spec.nonlinearity(y[0])};
  };

  OdeOptions opt;
  opt.rtol = options.rtol;
  // Far from a concentrated core u is O(1/a), so the absolute floor follows
  // whichever of a and 1/a is smaller.
  opt.atol = options.atol * amplitude_scale(a);
  opt.maxStep = options.maxStepFraction * R;

  double sign = 1.0;
  bool stopped = false;
  auto observer = [&](const DenseStep<2>& ds) {
    const double x0 = ds.x0, x1 = ds.x1();
    OdeState<2> y1 = ds(x1);
    if (!std::isfinite(y1[0]) || std::abs(y1[0]) > 1e150) {
      res.blowupRadius = x1;
      stopped = true;
      return false;
    }
    if (y1[0] * sign < 0.0) {
      auto uAt = [&](double r) { return ds(r)[0]; };
      auto root = numerics::brent_root(uAt, x0, x1, ds.c[0][0], y1[0], 1e-15 * std::max(1.0, x1),
                                       [](double) { return 0.0; });
      const double r0 = root.x;
      ++res.crossings;
      sign = -sign;
      if (res.crossings == 1) {
        res.firstZero = r0;
        const double du0 = ds(r0)[1];
        res.miss = du0 * (R - r0);
        if (options.stopAtFirstZero) {
          const auto ym = ds(0.5 * (x0 + r0));
          res.profile.push_back({0.5 * (x0 + r0), ym[0], ym[1]});
          res.profile.push_back({r0, 0.0, du0});
          stopped = true;
          return false;
        }
      }
    }
    const double xm = 0.5 * (x0 + x1);
    const auto ym = ds(xm);
    res.profile.push_back({xm, ym[0], ym[1]});
    res.profile.push_back({x1, y1[0], y1[1]});
    return true;
  };

  OdeState<2> y0{a + c * delta * delta, 2.0 * c * delta};
  const OdeStatus status = integrate_dopri5<2>(rhs, delta, y0, R, opt, observer);
  if (status == OdeStatus::StepUnderflow || status == OdeStatus::TooManySteps) {
    std::ostringstream os;
    os << "step-size underflow at a = " << a << ", omega = " << omega;
    throw SolverError(ErrorKind::IntegratorFailure, os.str());
  }
  (void)stopped;

  const RadialSample& last = res.profile.back();
  res.boundaryValue = last.u;
  res.boundarySlope = last.du;

  const double tol = options.hitTolerance * a;
  if (!std::isnan(res.blowupRadius)) {
    res.classification = ShotClass::Overshoot;
    res.miss = -a;
  } else if (!std::isnan(res.firstZero) && res.firstZero < R) {
    res.classification = std::abs(res.miss) <= tol ? ShotClass::Hit : ShotClass::Overshoot;
  } else {
    res.miss = res.boundaryValue;
    res.classification = std::abs(res.miss) <= tol ? ShotClass::Hit : ShotClass::Undershoot;
  }
  return res;
}

Norms norms_of(const RadialProfile& profile, const ProblemSpec& spec) {
  const int N = spec.dimension;
  Norms n;
  n.rho = radial_integral(profile, N, [](const RadialSample& s) { return s.u * s.u; });
  n.gradNormSq = radial_integral(profile, N, [](const RadialSample& s) { return s.du * s.du; });
  n.lpNorm = radial_integral(profile, N, [&](const RadialSample& s) { return std::pow(std::abs(s.u), spec.p); });
  n.lqNorm = radial_integral(profile, N, [&](const RadialSample& s) { return std::pow(std::abs(s.u), spec.q); });
  n.energy = 0.5 * n.gradNormSq - spec.eta * (spec.mu / spec.p * n.lpNorm + n.lqNorm / spec.q);
  return n;
}

namespace {

struct ScanPoint {
  double a;
  double miss;
  ShotClass cls;
};

// Scan decisions use the sign of the miss; the hit tolerance only decides
// convergence. A concentrated large-a shot can sit inside 1e-10·a of zero
// without a sign change nearby.
int sign_of(const ScanPoint& s) { return s.miss > 0.0 ? 1 : (s.miss < 0.0 ? -1 : 0); }

// Strongly concentrated shots lose the tail to integration error and can fake
// a sign change; a bracket counts only if it survives 100x tighter tolerances.
bool bracket_confirmed(double aLow, double aHigh, double omega, const ProblemSpec& spec, const ShootOptions& options) {
  ShotOptions tight = options.shot;
  tight.rtol *= 0.01;
  tight.atol *= 0.01;
  try {
    const double lo = integrate_from_center(aLow, omega, spec, tight).miss;
    const double hi = integrate_from_center(aHigh, omega, spec, tight).miss;
    return lo == 0.0 || hi == 0.0 || (lo > 0.0) != (hi > 0.0);
  } catch (const SolverError& e) {
    if (e.kind() != ErrorKind::IntegratorFailure) throw;
    return false;
  }
}

RadialSolution finish(double a, double omega, const ProblemSpec& spec, const ShootOptions& options, int shots) {
  ShotOptions full = options.shot;
  full.stopAtFirstZero = false;
  ShotResult shot = integrate_from_center(a, omega, spec, full);
  const double tolLoose = 1e-6 * a;
  const double miss = std::isnan(shot.firstZero) ? shot.boundaryValue : shot.miss;
  if (std::abs(miss) > tolLoose || shot.crossings > 1) {
    std::ostringstream os;
    os << "shooting did not converge at omega = " << omega << " (miss " << miss << ")";
    throw SolverError(ErrorKind::IntegratorFailure, os.str());
  }
  // Pin the boundary sample to the Dirichlet value.
  shot.profile.back().u = 0.0;

  RadialSolution sol;
  sol.spec = spec;
  sol.omega = omega;
  sol.centerValue = a;
  sol.boundarySlope = shot.profile.back().du;
  const Norms n = norms_of(shot.profile, spec);
  sol.rho = n.rho;
  sol.gradNormSq = n.gradNormSq;
  sol.lpNorm = n.lpNorm;
  sol.lqNorm = n.lqNorm;
  sol.energy = n.energy;
  sol.profile = std::move(shot.profile);
  sol.uniquenessKnown = spec.brezis_nirenberg();
  sol.shots = shots + 1;
  return sol;
}

}  // namespace

RadialSolution solve_in_bracket(double omega, const ProblemSpec& spec, double aLow, double aHigh,
                                const ShootOptions& options) {
  int shots = 0;
  auto miss = [&](double a) {
    ++shots;
    return integrate_from_center(a, omega, spec, options.shot).miss;
  };
  const double fLow = miss(aLow);
  const double fHigh = miss(aHigh);
  const double hitTol = options.shot.hitTolerance;
  if (fLow == 0.0) return finish(aLow, omega, spec, options, shots);
  if (fHigh == 0.0) return finish(aHigh, omega, spec, options, shots);
  if ((fLow > 0) == (fHigh > 0))
    throw SolverError(ErrorKind::NoBracket, "solve_in_bracket: endpoints classify alike");
  auto root = numerics::brent_root(miss, aLow, aHigh, fLow, fHigh, 1e-15 * std::max(aLow, aHigh),
                                   [hitTol](double a) { return hitTol * amplitude_scale(a); });
  return finish(root.x, omega, spec, options, shots);
}

RadialSolution shoot_ground_state(double omega, const ProblemSpec& spec, const ShootOptions& options) {
  spec.validate();
  const double a0 = std::clamp(options.centerHint.value_or(1.0), options.minCenter, options.maxCenter);
  const double ratio = options.expansionRatio;
  const int kMax = static_cast<int>(std::floor(std::log(options.maxCenter / a0) / std::log(ratio) + 1e-12));
  const int kMin = -static_cast<int>(std::floor(std::log(a0 / options.minCenter) / std::log(ratio) + 1e-12));

  std::map<int, ScanPoint> scan;
  int shots = 0;
  // A shot the integrator cannot resolve (extreme concentration) ends the
  // scan in that direction.
  int kHi = kMax, kLo = kMin;
  auto eval = [&](int k) -> bool {
    const double a = a0 * std::pow(ratio, k);
    ++shots;
    try {
      const ShotResult r = integrate_from_center(a, omega, spec, options.shot);
      scan[k] = ScanPoint{a, r.miss, r.classification};
      return true;
    } catch (const SolverError& e) {
      if (e.kind() != ErrorKind::IntegratorFailure) throw;
      if (k >= 0) kHi = std::min(kHi, k - 1);
      if (k <= 0) kLo = std::max(kLo, k + 1);
      return false;
    }
  };

  std::optional<std::pair<int, int>> bracket;
  std::optional<int> hit;
  auto check = [&](int k) {
    if (!scan.count(k)) return;
    const ScanPoint& s = scan.at(k);
    if (sign_of(s) == 0) {
      if (!hit) hit = k;
      return;
    }
    for (int nb : {k - 1, k + 1}) {
      auto it = scan.find(nb);
      if (it != scan.end() && sign_of(it->second) == -sign_of(s) && !bracket) {
        shots += 2;
        if (bracket_confirmed(std::min(s.a, it->second.a), std::max(s.a, it->second.a), omega, spec, options))
          bracket = std::minmax(k, nb);
      }
    }
  };

  if (options.countBrackets) {
    for (int k = 0; k <= kHi; ++k) eval(k);
    for (int k = -1; k >= kLo; --k) eval(k);
    int transitions = 0;
    std::optional<std::pair<int, int>> best;
    for (int k = kLo; k < kHi; ++k) {
      const int s0 = sign_of(scan.at(k)), s1 = sign_of(scan.at(k + 1));
      if (s0 != 0 && s1 != 0 && s0 != s1 && bracket_confirmed(scan.at(k).a, scan.at(k + 1).a, omega, spec, options)) {
        ++transitions;
        if (!best || std::min(std::abs(k), std::abs(k + 1)) < std::min(std::abs(best->first), std::abs(best->second)))
          best = std::make_pair(k, k + 1);
      }
      if (s0 == 0 && !hit) hit = k;
    }
    bracket = best;
    RadialSolution sol;
    if (hit && (!bracket || std::abs(*hit) <= std::min(std::abs(bracket->first), std::abs(bracket->second)))) {
      sol = finish(scan.at(*hit).a, omega, spec, options, shots);
    } else if (bracket) {
      sol = solve_in_bracket(omega, spec, scan.at(bracket->first).a, scan.at(bracket->second).a, options);
      sol.shots += shots;
    } else {
      std::ostringstream os;
      os << "no undershoot/overshoot pair for omega = " << omega << " on [" << options.minCenter << ", "
         << options.maxCenter << "]";
      throw SolverError(ErrorKind::NoBracket, os.str());
    }
    sol.bracketCount = transitions;
    return sol;
  }

  if (eval(0)) check(0);
  for (int step = 1; !bracket && !hit && (step <= kHi || -step >= kLo); ++step) {
    if (step <= kHi && eval(step)) {
      check(step);
      if (bracket || hit) break;
    }
    if (-step >= kLo && eval(-step)) check(-step);
  }
  if (hit) return finish(scan.at(*hit).a, omega, spec, options, shots);
  if (!bracket) {
    std::ostringstream os;
    os << "no undershoot/overshoot pair for omega = " << omega << " on [" << options.minCenter << ", "
       << options.maxCenter << "]";
    throw SolverError(ErrorKind::NoBracket, os.str());
  }
  RadialSolution sol = solve_in_bracket(omega, spec, scan.at(bracket->first).a, scan.at(bracket->second).a, options);
  sol.shots += shots;
  return sol;
}

std::vector<RadialSolution> shoot_all(double omega, const ProblemSpec& spec, const ShootOptions& options) {
  spec.validate();
  const double ratio = options.expansionRatio;
  std::vector<ScanPoint> scan;
  int shots = 0;
  for (double a = options.minCenter; a <= options.maxCenter * (1 + 1e-12); a *= ratio) {
    ++shots;
    try {
      const ShotResult r = integrate_from_center(a, omega, spec, options.shot);
      scan.push_back({a, r.miss, r.classification});
    } catch (const SolverError& e) {
      if (e.kind() != ErrorKind::IntegratorFailure) throw;
      break;
    }
  }
  std::vector<RadialSolution> out;
  int transitions = 0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (sign_of(scan[i]) == 0) {
      out.push_back(finish(scan[i].a, omega, spec, options, 0));
      continue;
    }
    if (i + 1 < scan.size() && sign_of(scan[i + 1]) != 0 && sign_of(scan[i + 1]) != sign_of(scan[i]) &&
        bracket_confirmed(scan[i].a, scan[i + 1].a, omega, spec, options)) {
      ++transitions;
      out.push_back(solve_in_bracket(omega, spec, scan[i].a, scan[i + 1].a, options));
    }
  }
  for (auto& s : out) {
    s.bracketCount = transitions;
    s.shots += shots;
  }
  return out;
}

}  // namespace normbranch
