#pragma once

#include <cstdint>
#include <vector>

#include "treebound/convexity.hpp"

namespace treebound {

/// Certified lower bound on the distortion of the depth-n binary tree for
/// any n with floor(log2 n) = m.
struct LowerBoundResult {
  enum class Method { iterative, asymptotic };

  std::int64_t m = 0;
  ConvexityProfile profile;
  double value = 1.0;
  Method method = Method::iterative;
  double tau = 0.0;
  /// Iterates D_0..D_m at the returned value (populated for small m only).
  std::vector<double> d_sequence;
  /// Leading order only: lower-order terms are dropped.
  bool leading_order_only = false;
  bool monotonicity_validated = false;
  bool used_scan_fallback = false;

  const char* method_name() const {
    return method == Method::iterative ? "iterative" : "asymptotic";
  }
};

/// One self-improvement step f(D) = D - K(D)/D^(p-1).
double f_step(double D, const ConvexityProfile& profile, double tau);

struct IterationOutcome {
  double value = 0.0;
  std::int64_t steps_survived = 0;
  bool dropped_below_one = false;
};

/// Applies f up to m times, stopping early once an iterate drops below 1
/// (f is only defined on [1, inf)).
IterationOutcome f_iterate(double D, std::int64_t m,
                           const ConvexityProfile& profile, double tau);

/// Minimal D >= 1 (relative tolerance 1e-9) whose m iterates all stay >= 1,
/// found by bisection after a coarse monotonicity check of the survival
/// predicate; falls back to an ascending scan if that check fails.
LowerBoundResult lower_bound_iterative(std::int64_t m,
                                       const ConvexityProfile& profile,
                                       double tau);

/// Leading-order closed form (p c / 2)^(1/p) m^(1/p). Below 1 the bound is
/// vacuous; the raw value is still returned so the constant can be read off.
LowerBoundResult lower_bound_asymptotic(std::int64_t m,
                                        const ConvexityProfile& profile);

}  // namespace treebound
