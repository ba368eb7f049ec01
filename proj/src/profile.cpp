#include "normbranch/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace normbranch {

double radial_integral(const RadialProfile& profile, int dimension,
                       const std::function<double(const RadialSample&)>& g) {
  if (profile.size() < 3 || profile.size() % 2 == 0)
    throw std::invalid_argument("radial_integral: profile must hold an odd number (>= 3) of samples");
  const int m = dimension - 1;
  auto weighted = [&](const RadialSample& s) { return g(s) * (m == 0 ? 1.0 : std::pow(s.r, m)); };
  double sum = 0.0;
  for (std::size_t k = 0; k + 2 < profile.size(); k += 2) {
    const double h = profile[k + 2].r - profile[k].r;
    sum += h / 6.0 * (weighted(profile[k]) + 4.0 * weighted(profile[k + 1]) + weighted(profile[k + 2]));
  }
  return sphere_area(dimension) * sum;
}

RadialSample interpolate_profile(const RadialProfile& profile, double r) {
  if (profile.empty()) throw std::invalid_argument("interpolate_profile: empty profile");
  if (r <= profile.front().r) return {r, profile.front().u, profile.front().du};
  if (r > profile.back().r) return {r, 0.0, 0.0};
  auto it = std::upper_bound(profile.begin(), profile.end(), r,
                             [](double x, const RadialSample& s) { return x < s.r; });
  if (it == profile.end()) return profile.back();
  const RadialSample& b = *it;
  const RadialSample& a = *(it - 1);
  const double h = b.r - a.r;
  const double s = (r - a.r) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  const double u = h00 * a.u + h10 * h * a.du + h01 * b.u + h11 * h * b.du;
  const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
  const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
  const double du = (d00 * a.u + d01 * b.u) / h + d10 * a.du + d11 * b.du;
  return {r, u, du};
}

double sup_distance(const RadialProfile& a, const RadialProfile& b) {
  double d = 0.0;
  for (const auto& s : a) d = std::max(d, std::abs(s.u - interpolate_profile(b, s.r).u));
  for (const auto& s : b) d = std::max(d, std::abs(s.u - interpolate_profile(a, s.r).u));
  return d;
}

}  // namespace normbranch
