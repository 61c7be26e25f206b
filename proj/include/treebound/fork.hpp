#pragma once

#include <string>
#include <utility>
#include <vector>

#include "treebound/convexity.hpp"
#include "treebound/embedding.hpp"

namespace treebound {

/// The four-vertex tree the key geometric step runs on: a root a0 with one
/// child a1 and the two grandchildren a2, a2p through a1. Stored as heap ids
/// inside the ambient tree.
struct Fork {
  VertexId a0 = 0;
  VertexId a1 = 0;
  VertexId a2 = 0;
  VertexId a2p = 0;
};

/// Outcome of one fork check: which grandchild was kept and the inequality
/// that certifies it. Both sides of the inequality are recorded so the
/// certificate can be audited without re-running anything.
struct ForkCertificate {
  Fork fork;
  double D = 0.0;
  double eta = 0.0;    // K(D) / D^(p-1)
  double bound = 0.0;  // 2 (D - eta)
  VertexId kept = 0;
  double kept_norm = 0.0;
  double other_norm = 0.0;
};

/// One recorded inequality: name, both sides, and whether it held.
struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Numeric replay of the geometric argument on a concrete witness pair.
struct ProofTrace {
  std::vector<double> x1;
  std::vector<double> x2;
  std::vector<double> v;  // (|x1|/|x2-x1|) (x2-x1)
  double eta = 0.0;
  double eps = 0.0;  // (2 eta / (c D))^(1/p)
  std::vector<InequalityCheck> hypotheses;
  std::vector<InequalityCheck> checks;
  bool hypotheses_ok = false;
  bool all_checks_hold = false;
};

/// HypothesisError that still carries the partially evaluated trace, with
/// the failing hypothesis marked.
class ReplayHypothesisError : public HypothesisError {
 public:
  ReplayHypothesisError(const std::string& what, ProofTrace trace)
      : HypothesisError(what), trace_(std::move(trace)) {}

  const ProofTrace& trace() const { return trace_; }

 private:
  ProofTrace trace_;
};

/// Per-level record of the self-improvement chain.
struct ExtractionLevel {
  int depth = 0;        // depth of the embedding this level started from
  double distortion = 0.0;
  std::vector<ForkCertificate> certificates;
};

struct ExtractionTrace {
  std::vector<ExtractionLevel> levels;
  std::vector<double> d_sequence;  // D_0, D_1, ... across the chain
  double lower_bound = 0.0;        // certified bound for the starting depth
  bool d0_dominates = false;       // observed D_0 >= lower_bound
  std::string certified_statement;
};

namespace detail {

/// Bisection core behind fork_constant, substituting u = (2K/c)^(1/p) so
/// the constraint halves to (c/D^(p-1)) u^p + u <= 1 - tau. Returns the
/// feasible end u_lo of the final bracket; inputs are pre-validated.
/// Inline because the bound iteration runs it millions of times.
inline double fork_constant_root(double D, double p, double c, double tau) {
  const double target = 1.0 - tau;
  const double coeff = c / pow_real(D, p - 1.0);
  const double utol = 1e-12 / p;  // relative tolerance 1e-12 on K = c u^p / 2
  double lo = 0.0;
  double hi = target;

  // Warm start: an estimate of the root tightens the bracket from
  // [0, target] to a few hundred ulps. Both candidate ends are verified
  // against the constraint before use, so a bad estimate only costs the
  // fallback to the full bracket; the bisection below stays authoritative.
  double guess = 0.0;
  if (p == 2.0) {
    guess = 2.0 * target / (1.0 + std::sqrt(1.0 + 4.0 * coeff * target));
  } else {
    double u = target;  // h is convex; Newton from the right stays above
    for (int i = 0; i < 12; ++i) {
      const double h = coeff * pow_real(u, p) + u - target;
      const double dh = coeff * p * pow_real(u, p - 1.0) + 1.0;
      const double next = u - h / dh;
      if (!(next > 0.0) || !(next <= u)) break;
      const bool done = u - next <= 1e-11 * next;
      u = next;
      if (done) break;
    }
    guess = u;
  }
  if (guess > 0.0) {
    const double cand_lo = guess * (1.0 - 1e-9);
    const double cand_hi = guess * (1.0 + 1e-9);
    if (coeff * pow_real(cand_lo, p) + cand_lo <= target &&
        cand_hi <= target &&
        coeff * pow_real(cand_hi, p) + cand_hi > target) {
      lo = cand_lo;
      hi = cand_hi;
    }
  }

  if (p == 2.0) {
    // Branchless update; a bisection step's direction is unpredictable.
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const bool ok = coeff * mid * mid + mid <= target;
      lo = ok ? mid : lo;
      hi = ok ? hi : mid;
      if (hi - lo <= utol * lo) break;
    }
    return lo;
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const bool ok = coeff * pow_real(mid, p) + mid <= target;
    lo = ok ? mid : lo;
    hi = ok ? hi : mid;
    if (hi - lo <= utol * lo) break;
  }
  return lo;
}

}  // namespace detail

/// Largest K > 0 with 4K/D^(p-1) + 2 (2K/c)^(1/p) <= 2 (1 - tau), located
/// by bisection of the strictly increasing left side to relative tolerance
/// 1e-12. The proof's separation (2K/(c D^p))^(1/p) is checked against the
/// modulus domain (0, 2].
double fork_constant(double D, const ConvexityProfile& profile, double tau);

/// The fork conclusion bound 2 (D - K(D)/D^(p-1)); strictly below 2D.
double fork_bound(double D, const ConvexityProfile& profile, double tau);

/// Checks the fork hypotheses on a normalized embedding and returns the
/// certificate for the grandchild of smaller |phi(a0) - phi(.)| (ties keep
/// the lower vertex id). A kept norm above the bound is impossible for
/// valid inputs and reported as LemmaViolation.
ForkCertificate check_fork(const Embedding& e, const Fork& fork, double D,
                           const ConvexityProfile& profile, double tau);

/// Recomputes every displayed inequality of the geometric argument on a
/// witness (x1, x2) with phi(a0) at the origin, recording lhs/rhs pairs.
ProofTrace replay_lemma_proof(std::span<const double> x1,
                              std::span<const double> x2, double D,
                              const ConvexityProfile& profile,
                              double tau = 1e-6);

struct ExtractHalfResult {
  Embedding embedding;
  ExtractionTrace trace;
};

/// One self-improvement step: greedy fork checks at every selected vertex,
/// restriction to the kept grandchildren, renormalization. The output
/// embedding of T_(n/2) has distortion at most D - K(D)/D^(p-1) + 1e-9.
ExtractHalfResult extract_half(const Embedding& e,
                               const ConvexityProfile& profile, double tau);

/// Full chain: normalize, then halve the depth until 1, recording every
/// level. Also computes the applicable certified lower bound and checks the
/// observed distortion dominates it.
ExtractionTrace certify_chain(const Embedding& e,
                              const ConvexityProfile& profile, double tau);

}  // namespace treebound
