#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treebound/space.hpp"

namespace treebound {

/// Witness (p_type, c) for delta(eps) >= c * eps^p_type on (0, 2].
struct ConvexityProfile {
  enum class Source { analytic, numeric };

  double p_type = 2.0;
  double c = 0.125;
  Source source = Source::analytic;

  std::string source_name() const {
    return source == Source::analytic ? "analytic" : "numeric";
  }
};

/// Modulus of convexity of l_p for p >= 2: 1 - (1 - (eps/2)^p)^(1/p).
/// Evaluated through log1p/expm1 so the small-eps regime keeps full
/// relative precision. Throws Unsupported for p < 2.
double modulus_analytic(const SpaceSpec& space, double eps);

/// Result of the numeric modulus search: the estimate, the achieving unit
/// pair, and how well the separation constraint was met.
struct ModulusEstimate {
  double value = 0.0;
  std::vector<double> x;
  std::vector<double> y;
  double separation = 0.0;
  double constraint_residual = 0.0;
  int restarts_used = 0;
};

/// Numeric estimate of inf{1 - |(x+y)/2| : |x|=|y|=1, |x-y| >= eps}.
/// Midpoint + half-chord parameterization keeps |x-y| = eps exact; the two
/// unit-sphere constraints are driven by a penalty schedule and finished by
/// alternating projection. Always an upper bound on the infimum up to the
/// 1e-10 constraint tolerance.
ModulusEstimate modulus_numeric(const SpaceSpec& space, double eps,
                                std::uint64_t seed = 7,
                                std::int64_t budget = 400000);

/// Type-p constant for the host space. For p >= 2 the sharp uniform family
/// c = 1/(p 2^p) is returned analytically; for p in (1,2) a numeric fit
/// over an eps grid is shrunk by a 10% safety factor and tagged numeric.
ConvexityProfile convexity_profile(const SpaceSpec& space);

}  // namespace treebound
