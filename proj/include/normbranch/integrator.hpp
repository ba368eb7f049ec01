#pragma once

// Adaptive Dormand-Prince 5(4) integrator with the 4th-order continuous
// extension of Hairer & Wanner (DOPRI5). Each accepted step is handed to a
// caller-supplied observer together with its dense interpolant, which is
// what event location and per-step quadrature are built on.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace normbranch {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initialStep = 0.0;  // 0: pick automatically
  double maxStep = std::numeric_limits<double>::infinity();
  long maxSteps = 2'000'000;
};

enum class OdeStatus { Completed, StoppedByObserver, StepUnderflow, TooManySteps };

template <std::size_t Dim>
using OdeState = std::array<double, Dim>;

/// Dense interpolant over one accepted step [x0, x0 + h].
template <std::size_t Dim>
struct DenseStep {
  double x0 = 0.0;
  double h = 0.0;
  std::array<OdeState<Dim>, 5> c{};

  double x1() const { return x0 + h; }

  OdeState<Dim> operator()(double x) const {
    const double t = (x - x0) / h;
    const double t1 = 1.0 - t;
    OdeState<Dim> y;
    for (std::size_t i = 0; i < Dim; ++i)
      y[i] = c[0][i] + t * (c[1][i] + t1 * (c[2][i] + t * (c[3][i] + t1 * c[4][i])));
    return y;
  }
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

/// Integrates y' = rhs(x, y) from x0 to x1 (x1 > x0). `observer(step)` is
/// invoked after every accepted step and returns false to stop early.
template <std::size_t Dim, class Rhs, class Observer>
OdeStatus integrate_dopri5(Rhs&& rhs, double x0, OdeState<Dim> y, double x1, const OdeOptions& opt,
                           Observer&& observer, OdeStats* stats = nullptr) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                   d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                   d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  OdeStats local;
  OdeStats& st = stats ? *stats : local;

  using S = OdeState<Dim>;
  S k1, k2, k3, k4, k5, k6, k7, yt, y1;
  double x = x0;
  k1 = rhs(x, y);
  ++st.evaluations;

  double h = opt.initialStep;
  if (!(h > 0.0)) {
    // Hairer's starting-step heuristic, first-order version.
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
      const double sk = opt.atol + opt.rtol * std::abs(y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, x1 - x0);
  }
  h = std::min(h, opt.maxStep);

  const double eps = std::numeric_limits<double>::epsilon();
  bool last = false;
  while (true) {
    if (st.accepted + st.rejected >= opt.maxSteps) return OdeStatus::TooManySteps;
    if (!(h > 10.0 * eps * std::abs(x)) || h < std::numeric_limits<double>::min()) return OdeStatus::StepUnderflow;
    if (x + 1.01 * h >= x1) {
      h = x1 - x;
      last = true;
    }

    for (std::size_t i = 0; i < Dim; ++i) yt[i] = y[i] + h * a21 * k1[i];
    k2 = rhs(x + c2 * h, yt);
    for (std::size_t i = 0; i < Dim; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(x + c3 * h, yt);
    for (std::size_t i = 0; i < Dim; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(x + c4 * h, yt);
    for (std::size_t i = 0; i < Dim; ++i)
      yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(x + c5 * h, yt);
    for (std::size_t i = 0; i < Dim; ++i)
      yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double xph = last ? x1 : x + h;
    k6 = rhs(xph, yt);
    for (std::size_t i = 0; i < Dim; ++i)
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = rhs(xph, y1);
    st.evaluations += 6;

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < Dim; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += (ei / sk) * (ei / sk);
      finite = finite && std::isfinite(y1[i]);
    }
    err = finite ? std::sqrt(err / Dim) : std::numeric_limits<double>::infinity();

    if (err <= 1.0) {
      ++st.accepted;
      DenseStep<Dim> ds;
      ds.x0 = x;
      ds.h = xph - x;
      for (std::size_t i = 0; i < Dim; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        ds.c[0][i] = y[i];
        ds.c[1][i] = ydiff;
        ds.c[2][i] = bspl;
        ds.c[3][i] = ydiff - h * k7[i] - bspl;
        ds.c[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      x = xph;
      y = y1;
      k1 = k7;
      if (!observer(ds)) return OdeStatus::StoppedByObserver;
      if (last) return OdeStatus::Completed;
      const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-30), -0.2), 0.2, 5.0);
      h = std::min(h * fac, opt.maxStep);
    } else {
      ++st.rejected;
      last = false;
      const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0) : 0.1;
      h *= fac;
    }
  }
}

}  // namespace normbranch
