#include "treebound/fork.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "treebound/lower_bound.hpp"

namespace treebound {

namespace {

// Relative slack absorbing roundoff in hypothesis checks on normalized
// embeddings; orders of magnitude below the tau margin baked into K.
constexpr double kHypothesisSlack = 1e-9;

void check_profile(const ConvexityProfile& profile) {
  if (!(profile.p_type >= 2.0) || !(profile.c > 0.0) ||
      !std::isfinite(profile.c)) {
    throw DomainError("invalid convexity profile (p_type = " +
                      std::to_string(profile.p_type) + ", c = " +
                      std::to_string(profile.c) + ")");
  }
}

std::vector<double> subtract(std::span<const double> a,
                             std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace

double fork_constant(double D, const ConvexityProfile& profile, double tau) {
  check_profile(profile);
  if (!(D >= 1.0) || !std::isfinite(D)) {
    throw DomainError("fork constant needs D >= 1, got " + std::to_string(D));
  }
  if (!(tau >= 0.0) || !(tau < 1.0)) {
    throw DomainError("margin tau must lie in [0, 1), got " +
                      std::to_string(tau));
  }
  const double p = profile.p_type;
  const double c = profile.c;
  const double target = 1.0 - tau;
  if (!(target > 0.0)) {
    throw InfeasibleMargin("no positive K satisfies the margin tau = " +
                           std::to_string(tau));
  }

  const double u = detail::fork_constant_root(D, p, c, tau);
  if (u <= 0.0) {
    throw InfeasibleMargin("bisection found no positive K for D = " +
                           std::to_string(D));
  }

  // The proof separates two unit vectors by (2K/(c D^p))^(1/p) = u/D; the
  // modulus is only defined on (0, 2].
  if (u / D > 2.0) {
    throw DomainError("proof separation " + std::to_string(u / D) +
                      " leaves the modulus domain (0, 2]");
  }
  return 0.5 * c * pow_real(u, p);
}

double fork_bound(double D, const ConvexityProfile& profile, double tau) {
  const double K = fork_constant(D, profile, tau);
  return 2.0 * (D - K / pow_real(D, profile.p_type - 1.0));
}

ForkCertificate check_fork(const Embedding& e, const Fork& fork, double D,
                           const ConvexityProfile& profile, double tau) {
  e.validate();
  if (!(D >= 1.0)) {
    throw DomainError("fork check needs D >= 1, got " + std::to_string(D));
  }
  const auto& tree = e.tree;
  if (!tree.contains(fork.a0) || !tree.contains(fork.a1) ||
      !tree.contains(fork.a2) || !tree.contains(fork.a2p)) {
    throw IndexError("fork vertex outside the tree");
  }
  if (fork.a1 != left_child(fork.a0) && fork.a1 != right_child(fork.a0)) {
    throw DomainError("fork vertex a1 is not a child of a0");
  }
  if (std::minmax(fork.a2, fork.a2p) !=
      std::minmax(left_child(fork.a1), right_child(fork.a1))) {
    throw DomainError("fork vertices a2, a2p are not the children of a1");
  }

  // Hypotheses: distance non-decreasing and D-Lipschitz on all fork pairs.
  const VertexId ids[4] = {fork.a0, fork.a1, fork.a2, fork.a2p};
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const double img = e.pair_distance(ids[i], ids[j]);
      const double d = tree_distance(tree, ids[i], ids[j]);
      if (img < d * (1.0 - kHypothesisSlack)) {
        std::ostringstream msg;
        msg << "fork pair (" << ids[i] << ", " << ids[j]
            << ") contracts below tree distance: " << img << " < " << d;
        throw HypothesisError(msg.str());
      }
      if (img > D * d * (1.0 + kHypothesisSlack)) {
        std::ostringstream msg;
        msg << "fork pair (" << ids[i] << ", " << ids[j]
            << ") expands above D: " << img << " > " << D * d;
        throw HypothesisError(msg.str());
      }
    }
  }

  const double norm2 = e.pair_distance(fork.a0, fork.a2);
  const double norm2p = e.pair_distance(fork.a0, fork.a2p);
  VertexId kept = fork.a2;
  double kept_norm = norm2;
  double other_norm = norm2p;
  if (norm2p < norm2 || (norm2p == norm2 && fork.a2p < fork.a2)) {
    kept = fork.a2p;
    kept_norm = norm2p;
    other_norm = norm2;
  }

  const double K = fork_constant(D, profile, tau);
  const double eta = K / pow_real(D, profile.p_type - 1.0);
  const double bound = 2.0 * (D - eta);
  if (kept_norm > bound) {
    std::ostringstream msg;
    msg << "fork conclusion failed: min grandchild norm " << kept_norm
        << " exceeds 2(D - eta) = " << bound << " at D = " << D
        << "; the embedding or profile is inconsistent";
    throw LemmaViolation(msg.str());
  }

  ForkCertificate cert;
  cert.fork = fork;
  cert.D = D;
  cert.eta = eta;
  cert.bound = bound;
  cert.kept = kept;
  cert.kept_norm = kept_norm;
  cert.other_norm = other_norm;
  return cert;
}

ProofTrace replay_lemma_proof(std::span<const double> x1,
                              std::span<const double> x2, double D,
                              const ConvexityProfile& profile, double tau) {
  check_profile(profile);
  if (x1.size() != x2.size() || x1.empty()) {
    throw DomainError("witness vectors must share a positive dimension");
  }
  if (!(D >= 1.0)) {
    throw DomainError("replay needs D >= 1, got " + std::to_string(D));
  }
  const double p = profile.p_type;
  const double c = profile.c;
  const double K = fork_constant(D, profile, tau);
  const double eta = K / pow_real(D, p - 1.0);
  const double eps = pow_real(2.0 * eta / (c * D), 1.0 / p);

  ProofTrace trace;
  trace.x1.assign(x1.begin(), x1.end());
  trace.x2.assign(x2.begin(), x2.end());
  trace.eta = eta;
  trace.eps = eps;

  const double n1 = lp_norm(x1, p);
  const std::vector<double> step = subtract(x2, x1);
  const double nstep = lp_norm(step, p);
  const double n2 = lp_norm(x2, p);

  auto hypothesis = [&trace](const std::string& name, double lhs, double rhs,
                             bool ge) {
    const bool holds = ge ? lhs >= rhs : lhs <= rhs;
    trace.hypotheses.push_back({name, lhs, rhs, holds});
    return holds;
  };
  bool ok = true;
  ok &= hypothesis("x1_norm_at_least_1", n1, 1.0, true);
  ok &= hypothesis("x1_norm_at_most_D", n1, D, false);
  ok &= hypothesis("step_norm_at_least_1", nstep, 1.0, true);
  ok &= hypothesis("step_norm_at_most_D", nstep, D, false);
  ok &= hypothesis("x2_norm_at_least_2", n2, 2.0, true);
  ok &= hypothesis("x2_norm_at_least_2(D-eta)", n2, 2.0 * (D - eta), true);
  trace.hypotheses_ok = ok;
  if (!ok) {
    throw ReplayHypothesisError(
        "witness violates the replay preconditions; see trace.hypotheses",
        trace);
  }

  // v = (|x1|/|x2-x1|) (x2-x1).
  const std::size_t d = x1.size();
  trace.v.resize(d);
  for (std::size_t i = 0; i < d; ++i) trace.v[i] = (n1 / nstep) * step[i];

  std::vector<double> x1pv(d), x1pv_m_x2(d), x1mv(d), twox1_m_x2(d);
  for (std::size_t i = 0; i < d; ++i) {
    x1pv[i] = x1[i] + trace.v[i];
    x1pv_m_x2[i] = x1pv[i] - x2[i];
    x1mv[i] = x1[i] - trace.v[i];
    twox1_m_x2[i] = 2.0 * x1[i] - x2[i];
  }

  auto check = [&trace](const std::string& name, double lhs, double rhs,
                        bool ge) {
    trace.checks.push_back({name, lhs, rhs, ge ? lhs >= rhs : lhs <= rhs});
  };
  check("x1_norm_floor", n1, D - 2.0 * eta, true);
  check("step_norm_floor", nstep, D - 2.0 * eta, true);
  check("rebalanced_residual", lp_norm(x1pv_m_x2, p), 2.0 * eta, false);
  check("rebalanced_sum_floor", lp_norm(x1pv, p), 2.0 * D - 4.0 * eta, true);
  check("midpoint_norm_floor", lp_norm(x1pv, p) / (2.0 * n1),
        1.0 - 2.0 * eta / D, true);
  check("convexity_collapse", lp_norm(x1mv, p), eps * D, false);
  check("doubled_point_residual", lp_norm(twox1_m_x2, p),
        2.0 * eta + eps * D, false);

  trace.all_checks_hold =
      std::all_of(trace.checks.begin(), trace.checks.end(),
                  [](const InequalityCheck& c) { return c.holds; });
  return trace;
}

ExtractHalfResult extract_half(const Embedding& e,
                               const ConvexityProfile& profile, double tau) {
  e.validate();
  if (e.tree.depth < 2) {
    throw DepthError("extraction needs tree depth >= 2, got " +
                     std::to_string(e.tree.depth));
  }
  const DistortionReport report = evaluate_distortion(e);
  if (std::abs(report.contraction - 1.0) > kHypothesisSlack) {
    throw HypothesisError("embedding is not normalized (contraction = " +
                          std::to_string(report.contraction) + ")");
  }
  const double D = report.distortion;
  const double p = profile.p_type;
  const double K = fork_constant(D, profile, tau);
  const double improved = D - K / pow_real(D, p - 1.0);

  const BinaryTree half_tree = build_tree(e.tree.depth / 2);
  std::vector<VertexId> sigma(half_tree.vertex_count() + 1, 0);
  sigma[1] = 1;
  Selection kept;
  std::vector<ForkCertificate> certificates;
  certificates.reserve(half_tree.vertex_count() - 1);
  for (VertexId w = 1; w <= half_tree.vertex_count() / 2; ++w) {
    const VertexId s = sigma[w];
    const Fork fork_left{s, left_child(s), left_child(left_child(s)),
                         right_child(left_child(s))};
    const Fork fork_right{s, right_child(s), left_child(right_child(s)),
                          right_child(right_child(s))};
    const ForkCertificate cert_left =
        check_fork(e, fork_left, D, profile, tau);
    const ForkCertificate cert_right =
        check_fork(e, fork_right, D, profile, tau);
    kept[s] = KeptGrandchildren{cert_left.kept, cert_right.kept};
    sigma[left_child(w)] = cert_left.kept;
    sigma[right_child(w)] = cert_right.kept;
    certificates.push_back(cert_left);
    certificates.push_back(cert_right);
  }

  Embedding restricted = restrict_to_selection(e, kept);
  const DistortionReport restricted_report = evaluate_distortion(restricted);
  if (restricted_report.distortion > improved + 1e-9) {
    std::ostringstream msg;
    msg << "extraction contract failed: restricted distortion "
        << restricted_report.distortion << " exceeds f(D) = " << improved;
    throw LemmaViolation(msg.str());
  }
  const double inv = 1.0 / restricted_report.contraction;
  for (double& coord : restricted.coords) coord *= inv;

  ExtractHalfResult result{std::move(restricted), {}};
  ExtractionLevel level;
  level.depth = e.tree.depth;
  level.distortion = D;
  level.certificates = std::move(certificates);
  result.trace.levels.push_back(std::move(level));
  result.trace.d_sequence = {D, restricted_report.distortion};
  return result;
}

ExtractionTrace certify_chain(const Embedding& e,
                              const ConvexityProfile& profile, double tau) {
  e.validate();
  if (e.tree.depth < 2) {
    throw DepthError("certification needs tree depth >= 2, got " +
                     std::to_string(e.tree.depth));
  }
  Embedding current = normalize_embedding(e);

  ExtractionTrace trace;
  trace.d_sequence.push_back(evaluate_distortion(current).distortion);
  while (current.tree.depth >= 2) {
    ExtractHalfResult step = extract_half(current, profile, tau);
    trace.levels.push_back(std::move(step.trace.levels.front()));
    trace.d_sequence.push_back(step.trace.d_sequence.back());
    current = std::move(step.embedding);
  }

  const auto m = static_cast<std::int64_t>(trace.levels.size());
  trace.lower_bound = lower_bound_iterative(m, profile, tau).value;
  const double d0 = trace.d_sequence.front();
  trace.d0_dominates = d0 >= trace.lower_bound;

  std::ostringstream statement;
  statement.precision(12);
  statement << "Every embedding of the depth-" << e.tree.depth
            << " binary tree into a space with delta(eps) >= " << profile.c
            << " * eps^" << profile.p_type << " (" << profile.source_name()
            << ") has distortion >= " << trace.lower_bound
            << "; the supplied embedding has distortion " << d0 << " and its "
            << m << "-step extraction chain respects the fork bound at every "
            << "level.";
  trace.certified_statement = statement.str();
  return trace;
}

}  // namespace treebound
