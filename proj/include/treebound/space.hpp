#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "treebound/errors.hpp"

namespace treebound {

/// Host space l_p^d: the exponent of the norm and the dimension.
struct SpaceSpec {
  double p = 2.0;
  int dim = 1;

  void validate() const;
};

/// x^y with fast paths for the small integer and half-integer exponents that
/// dominate the inner loops (p in {1,2,3,4}, 1/p = 0.5).
inline double pow_real(double x, double y) {
  if (y == 1.0) return x;
  if (y == 2.0) return x * x;
  if (y == 3.0) return x * x * x;
  if (y == 4.0) {
    const double s = x * x;
    return s * s;
  }
  if (y == 0.5) return std::sqrt(x);
  return std::pow(x, y);
}

/// l_p norm of a raw coordinate span. Scales by the max coordinate before
/// exponentiation so large p and large coordinates do not overflow.
double lp_norm(std::span<const double> x, double p);

/// l_p distance between two coordinate spans of equal length.
double lp_dist(std::span<const double> a, std::span<const double> b, double p);

/// (sum |x_i|^p)^(1/p); zero iff x = 0. Dimension-checked public entry.
double norm_value(const SpaceSpec& space, std::span<const double> x);

}  // namespace treebound
