#pragma once

#include <functional>

#include "normbranch/core.hpp"

namespace normbranch {

/// Composite Simpson quadrature of sphereArea · ∫ g(sample) r^{N-1} dr over
/// a panel-structured profile.
double radial_integral(const RadialProfile& profile, int dimension,
                       const std::function<double(const RadialSample&)>& g);

/// Cubic Hermite interpolation of (u, u') at radius r. Radii beyond the last
/// sample return zero.
RadialSample interpolate_profile(const RadialProfile& profile, double r);

/// Largest |u_a(r) - u_b(r)| over the union of both sample sets.
double sup_distance(const RadialProfile& a, const RadialProfile& b);

}  // namespace normbranch
