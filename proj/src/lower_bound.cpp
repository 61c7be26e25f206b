#include "treebound/lower_bound.hpp"

#include <cmath>
#include <string>

#include "treebound/fork.hpp"

namespace treebound {

namespace {

// Survival predicate for the bisection: every iterate stays >= 1.
bool survives(double D, std::int64_t m, const ConvexityProfile& profile,
              double tau) {
  return !f_iterate(D, m, profile, tau).dropped_below_one;
}

}  // namespace

double f_step(double D, const ConvexityProfile& profile, double tau) {
  const double K = fork_constant(D, profile, tau);
  return D - K / pow_real(D, profile.p_type - 1.0);
}

IterationOutcome f_iterate(double D, std::int64_t m,
                           const ConvexityProfile& profile, double tau) {
  if (!(D >= 1.0)) {
    throw DomainError("iteration needs D >= 1, got " + std::to_string(D));
  }
  if (m < 0) {
    throw DomainError("iteration count must be nonnegative");
  }
  IterationOutcome out;
  out.value = D;
  if (m == 0) return out;

  // First step through the fully guarded path; the remaining steps run the
  // same bisection core directly, which matters at m ~ 10^6.
  out.value = f_step(out.value, profile, tau);
  if (out.value < 1.0) {
    out.dropped_below_one = true;
    return out;
  }
  out.steps_survived = 1;
  const double p = profile.p_type;
  const double c = profile.c;
  for (std::int64_t step = 1; step < m; ++step) {
    const double u = detail::fork_constant_root(out.value, p, c, tau);
    const double K = 0.5 * c * pow_real(u, p);
    out.value -= K / pow_real(out.value, p - 1.0);
    if (out.value < 1.0) {
      out.dropped_below_one = true;
      out.steps_survived = step;
      return out;
    }
    out.steps_survived = step + 1;
  }
  return out;
}

LowerBoundResult lower_bound_iterative(std::int64_t m,
                                       const ConvexityProfile& profile,
                                       double tau) {
  if (m < 1) {
    throw DomainError("iterative bound needs m >= 1, got " +
                      std::to_string(m));
  }
  const double p = profile.p_type;
  const double c = profile.c;

  LowerBoundResult result;
  result.m = m;
  result.profile = profile;
  result.method = LowerBoundResult::Method::iterative;
  result.tau = tau;

  double lo = 1.0;  // f(1) < 1, so the left end always fails
  double hi = pow_real(2.0 * p * c * static_cast<double>(m), 1.0 / p) + 2.0;
  int widenings = 0;
  while (!survives(hi, m, profile, tau)) {
    hi *= 2.0;
    if (++widenings > 60) {
      throw ConvergenceError("no surviving upper bracket for m = " +
                             std::to_string(m));
    }
  }

  // Coarse monotonicity check of the survival predicate before trusting
  // bisection: survivors must form an upper set of the grid.
  result.monotonicity_validated = true;
  {
    constexpr int kGridPoints = 5;
    bool previous = false;
    for (int i = 0; i < kGridPoints; ++i) {
      const double D = lo + (hi - lo) * (i + 1) / (kGridPoints + 1);
      const bool s = survives(D, m, profile, tau);
      if (previous && !s) {
        result.monotonicity_validated = false;
        break;
      }
      previous = s;
    }
  }

  if (result.monotonicity_validated) {
    while (hi - lo > 1e-9 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (survives(mid, m, profile, tau)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  } else {
    // Ascending scan with step refinement; slower but assumption-free.
    result.used_scan_fallback = true;
    double step = (hi - lo) / 64.0;
    double base = lo;
    while (step > 1e-10 * hi) {
      double probe = base;
      while (!survives(probe + step, m, profile, tau)) {
        probe += step;
      }
      base = probe;
      hi = probe + step;
      step /= 16.0;
    }
    lo = base;
  }
  result.value = hi;

  if (m <= 1024) {
    result.d_sequence.clear();
    result.d_sequence.push_back(hi);
    double D = hi;
    for (std::int64_t i = 0; i < m; ++i) {
      D = f_step(D, profile, tau);
      result.d_sequence.push_back(D);
    }
  }
  return result;
}

LowerBoundResult lower_bound_asymptotic(std::int64_t m,
                                        const ConvexityProfile& profile) {
  if (m < 1) {
    throw DomainError("asymptotic bound needs m >= 1, got " +
                      std::to_string(m));
  }
  const double p = profile.p_type;
  LowerBoundResult result;
  result.m = m;
  result.profile = profile;
  result.method = LowerBoundResult::Method::asymptotic;
  result.leading_order_only = true;
  result.value = pow_real(p * profile.c / 2.0, 1.0 / p) *
                 pow_real(static_cast<double>(m), 1.0 / p);
  return result;
}

}  // namespace treebound
