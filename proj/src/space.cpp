#include "treebound/space.hpp"

#include <algorithm>
#include <string>

namespace treebound {

void SpaceSpec::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw DomainError("space exponent p must lie in (1, inf), got " +
                      std::to_string(p));
  }
  if (dim < 1) {
    throw DomainError("space dimension must be positive, got " +
                      std::to_string(dim));
  }
}

double lp_norm(std::span<const double> x, double p) {
  if (p == 2.0) {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return std::sqrt(s);
  }
  double amax = 0.0;
  for (double xi : x) amax = std::max(amax, std::abs(xi));
  if (amax == 0.0) return 0.0;
  double s = 0.0;
  for (double xi : x) s += pow_real(std::abs(xi) / amax, p);
  return amax * pow_real(s, 1.0 / p);
}

double lp_dist(std::span<const double> a, std::span<const double> b,
               double p) {
  if (p == 2.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double z = a[i] - b[i];
      s += z * z;
    }
    return std::sqrt(s);
  }
  double amax = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    amax = std::max(amax, std::abs(a[i] - b[i]));
  }
  if (amax == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += pow_real(std::abs(a[i] - b[i]) / amax, p);
  }
  return amax * pow_real(s, 1.0 / p);
}

double norm_value(const SpaceSpec& space, std::span<const double> x) {
  space.validate();
  if (static_cast<int>(x.size()) != space.dim) {
    throw DomainError("vector has dimension " + std::to_string(x.size()) +
                      ", space expects " + std::to_string(space.dim));
  }
  return lp_norm(x, space.p);
}

}  // namespace treebound
