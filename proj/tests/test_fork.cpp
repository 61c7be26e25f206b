#include <doctest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "treebound/fork.hpp"
#include "treebound/lower_bound.hpp"
#include "treebound/optimizer.hpp"

using namespace treebound;

namespace {

const ConvexityProfile kHilbert{2.0, 0.125,
                                ConvexityProfile::Source::analytic};

}  // namespace

TEST_CASE("fork_constant matches the independent bisection oracle") {
  // Frozen from the p = 2 closed form (c/D) u^2 + u = 1, K = c u^2 / 2.
  CHECK(fork_constant(10.0, kHilbert, 0.0) ==
        doctest::Approx(0.060984680808032793).epsilon(1e-10));
  CHECK(fork_constant(2.0, kHilbert, 0.0) ==
        doctest::Approx(0.055728090000841266).epsilon(1e-10));
  CHECK(fork_constant(1.0, kHilbert, 0.0) ==
        doctest::Approx(0.050510257216821855).epsilon(1e-10));

  for (double p : {2.0, 2.5, 3.0}) {
    const ConvexityProfile profile{p, 1.0 / (p * std::pow(2.0, p)),
                                   ConvexityProfile::Source::analytic};
    for (double D : {1.0, 1.3, 2.0, 7.5}) {
      for (double tau : {0.0, 1e-6, 0.01}) {
        CHECK(fork_constant(D, profile, tau) ==
              doctest::Approx(oracles::fork_constant_bisect(D, p, profile.c,
                                                            tau))
                  .epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("fork_constant approaches c/2 for large D") {
  CHECK(fork_constant(1e9, kHilbert, 0.0) ==
        doctest::Approx(0.0625).epsilon(1e-6));
}

TEST_CASE("fork_constant monotonicity in D, c and tau") {
  double prev = 0.0;
  for (double D : {1.0, 1.5, 2.5, 5.0, 20.0}) {
    const double K = fork_constant(D, kHilbert, 1e-6);
    CHECK(K > prev);
    prev = K;
  }
  prev = 0.0;
  for (double c : {0.05, 0.125, 0.3}) {
    const ConvexityProfile profile{2.0, c,
                                   ConvexityProfile::Source::analytic};
    const double K = fork_constant(2.0, profile, 1e-6);
    CHECK(K > prev);
    prev = K;
  }
  prev = 1.0;
  for (double tau : {0.0, 1e-3, 0.1, 0.5}) {
    const double K = fork_constant(2.0, kHilbert, tau);
    CHECK(K < prev);
    prev = K;
  }
}

TEST_CASE("fork_constant domain") {
  CHECK_THROWS_AS(fork_constant(0.9, kHilbert, 0.0), DomainError);
  CHECK_THROWS_AS(fork_constant(2.0, kHilbert, 1.0), DomainError);
  CHECK_THROWS_AS(fork_constant(2.0, kHilbert, -0.1), DomainError);
  const ConvexityProfile bad{1.5, 0.125, ConvexityProfile::Source::analytic};
  CHECK_THROWS_AS(fork_constant(2.0, bad, 0.0), DomainError);
}

TEST_CASE("fork_bound values and the strict 2D ceiling") {
  CHECK(fork_bound(2.0, kHilbert, 0.0) ==
        doctest::Approx(3.9442719099991587).epsilon(1e-10));
  CHECK(fork_bound(1.0, kHilbert, 0.0) ==
        doctest::Approx(2.0 * (1.0 - 0.050510257216821855)).epsilon(1e-10));
  for (double D : {1.0, 1.2, 3.0, 50.0}) {
    CHECK(fork_bound(D, kHilbert, 1e-6) < 2.0 * D);
  }
}

TEST_CASE("check_fork keeps the nearer grandchild on a worked example") {
  // a0 -> (0,0), a1 -> (1,0), a2 -> (2,0), a2' -> (1,2): D = 2 via (a1,a2').
  const BinaryTree tree = build_tree(2);
  std::vector<double> coords(tree.vertex_count() * 2, 0.0);
  coords[(2 - 1) * 2] = 1.0;
  coords[(4 - 1) * 2] = 2.0;
  coords[(5 - 1) * 2] = 1.0;
  coords[(5 - 1) * 2 + 1] = 2.0;
  const Embedding e{tree, SpaceSpec{2.0, 2}, coords};
  const ForkCertificate cert =
      check_fork(e, Fork{1, 2, 4, 5}, 2.0, kHilbert, 0.0);
  CHECK(cert.kept == 4);
  CHECK(cert.kept_norm == doctest::Approx(2.0));
  CHECK(cert.other_norm == doctest::Approx(std::sqrt(5.0)));
  CHECK(cert.bound == doctest::Approx(3.9442719099991587).epsilon(1e-10));
  CHECK(cert.kept_norm <= cert.bound);
  CHECK(cert.kept_norm <= cert.other_norm);
  CHECK(cert.eta > 0.0);
  CHECK(cert.bound < 2.0 * cert.D);
}

TEST_CASE("check_fork on a near-isometric fork leaves slack above 2") {
  // a2' at exact tree distances from a0 and a2 forces |phi(a1)-phi(a2')|
  // up to sqrt(3), so D = sqrt(3); the bound still clears 2.
  const BinaryTree tree = build_tree(2);
  std::vector<double> coords(tree.vertex_count() * 2, 0.0);
  coords[(2 - 1) * 2] = 1.0;
  coords[(4 - 1) * 2] = 2.0;
  coords[(5 - 1) * 2] = 1.0;
  coords[(5 - 1) * 2 + 1] = std::sqrt(3.0);
  const Embedding e{tree, SpaceSpec{2.0, 2}, coords};
  const double D = std::sqrt(3.0) * (1.0 + 1e-12);
  const ForkCertificate cert =
      check_fork(e, Fork{1, 2, 4, 5}, D, kHilbert, 1e-6);
  CHECK(cert.kept_norm == doctest::Approx(2.0));
  CHECK(cert.bound > 2.0);
}

TEST_CASE("check_fork validates the fork shape and hypotheses") {
  const Embedding e = random_embedding(2, SpaceSpec{2.0, 2}, 3);
  CHECK_THROWS_AS(check_fork(e, Fork{1, 2, 4, 6}, 2.0, kHilbert, 1e-6),
                  DomainError);
  CHECK_THROWS_AS(check_fork(e, Fork{1, 3, 4, 5}, 2.0, kHilbert, 1e-6),
                  DomainError);
  CHECK_THROWS_AS(check_fork(e, Fork{1, 2, 4, 99}, 2.0, kHilbert, 1e-6),
                  IndexError);

  // A contracted pair (|phi(a0)-phi(a1)| = 0.5 < 1) violates the
  // distance non-decreasing hypothesis.
  BinaryTree tree = build_tree(2);
  std::vector<double> coords(tree.vertex_count() * 2, 0.0);
  coords[(2 - 1) * 2] = 0.5;
  coords[(4 - 1) * 2] = 2.0;
  coords[(5 - 1) * 2] = -2.0;
  const Embedding contracted{tree, SpaceSpec{2.0, 2}, coords};
  CHECK_THROWS_AS(check_fork(contracted, Fork{1, 2, 4, 5}, 2.0, kHilbert,
                             1e-6),
                  HypothesisError);

  // Expansion above the supplied D violates the Lipschitz hypothesis.
  const Embedding tight = generators::tight_fork_embedding(1.48);
  CHECK_THROWS_AS(check_fork(tight, Fork{1, 2, 4, 5}, 1.3, kHilbert, 1e-6),
                  HypothesisError);
}

TEST_CASE("an inconsistent profile is reported as LemmaViolation") {
  // Valid fork with both grandchildren at norm 2 and D = 1.48; a profile
  // claiming c = 1e8 drives the bound below 2, which no valid profile can.
  const Embedding e = generators::tight_fork_embedding(1.48);
  const ForkCertificate ok =
      check_fork(e, Fork{1, 2, 4, 5}, 1.48, kHilbert, 1e-6);
  CHECK(ok.kept_norm == doctest::Approx(2.0).epsilon(1e-12));

  const ConvexityProfile absurd{2.0, 1e8,
                                ConvexityProfile::Source::analytic};
  CHECK_THROWS_AS(check_fork(e, Fork{1, 2, 4, 5}, 1.48, absurd, 1e-6),
                  LemmaViolation);
}

TEST_CASE("fork conclusion holds on seeded random valid forks") {
  Rng rng(0xf0f0f0f0ULL);
  for (double p : {2.0, 2.5, 3.0, 4.0}) {
    const ConvexityProfile profile{p, 1.0 / (p * std::pow(2.0, p)),
                                   ConvexityProfile::Source::analytic};
    for (int dim : {2, 3, 5}) {
      for (int i = 0; i < 40; ++i) {
        const auto sample = generators::sample_normalized_fork(rng, p, dim);
        const ForkCertificate cert = check_fork(
            sample.embedding, sample.fork, sample.distortion, profile, 1e-6);
        CHECK(cert.kept_norm <= cert.bound);
      }
    }
  }
}

TEST_CASE("replay on the collinear witness holds with slack") {
  const double D = 2.0;
  const std::vector<double> x1{D, 0.0};
  const std::vector<double> x2{2.0 * D, 0.0};
  const ProofTrace trace = replay_lemma_proof(x1, x2, D, kHilbert, 1e-6);
  CHECK(trace.hypotheses_ok);
  CHECK(trace.all_checks_hold);
  // v = x1 exactly on the line, so both residuals vanish.
  CHECK(trace.v[0] == doctest::Approx(D));
  CHECK(trace.checks.back().name == "doubled_point_residual");
  CHECK(trace.checks.back().lhs == doctest::Approx(0.0));
  CHECK(trace.eps == doctest::Approx(std::pow(
                         2.0 * trace.eta / (kHilbert.c * D), 0.5)));
}

TEST_CASE("replay rejects witnesses that break a precondition") {
  const double D = 2.0;
  const double eta = fork_constant(D, kHilbert, 1e-6) / D;
  // |x2| below 2(D - eta) but above 2.
  const std::vector<double> x1{1.9, 0.0};
  const std::vector<double> x2{2.0 * (D - eta) - 0.05, 0.0};
  try {
    replay_lemma_proof(x1, x2, D, kHilbert, 1e-6);
    FAIL("expected ReplayHypothesisError");
  } catch (const ReplayHypothesisError& err) {
    CHECK_FALSE(err.trace().hypotheses_ok);
    CHECK(err.trace().checks.empty());
    bool found = false;
    for (const auto& h : err.trace().hypotheses) {
      if (h.name == "x2_norm_at_least_2(D-eta)") {
        found = true;
        CHECK_FALSE(h.holds);
      }
    }
    CHECK(found);
  }
}

TEST_CASE("replay passes on seeded random witnesses") {
  Rng rng(0xabcdef12ULL);
  for (int i = 0; i < 200; ++i) {
    const double D = rng.next_uniform(1.1, 4.0);
    const double eta =
        fork_constant(D, kHilbert, 1e-6) / D;  // p = 2: D^(p-1) = D
    const auto [x1, x2] = generators::sample_replay_witness(rng, D, eta);
    const ProofTrace trace = replay_lemma_proof(x1, x2, D, kHilbert, 1e-6);
    CHECK(trace.hypotheses_ok);
    CHECK(trace.all_checks_hold);
  }
}

TEST_CASE("contrapositive: two far grandchildren would sit within 4eta+2epsD") {
  Rng rng(0x77442211ULL);
  for (int i = 0; i < 100; ++i) {
    const double D = rng.next_uniform(1.2, 3.5);
    const double eta = fork_constant(D, kHilbert, 1e-6) / D;
    const auto [x1, x2] = generators::sample_replay_witness(rng, D, eta);
    const auto [y1, y2] = generators::sample_replay_witness(rng, D, eta);
    // Re-run the second grandchild against the first witness's x1.
    const ProofTrace t2 = replay_lemma_proof(x1, x2, D, kHilbert, 1e-6);
    ProofTrace t2p;
    try {
      t2p = replay_lemma_proof(x1, y2, D, kHilbert, 1e-6);
    } catch (const ReplayHypothesisError&) {
      continue;  // y2 need not pair with x1; only matched pairs count
    }
    CHECK(t2.all_checks_hold);
    CHECK(t2p.all_checks_hold);
    std::vector<double> diff(3);
    for (int k = 0; k < 3; ++k) diff[k] = x2[k] - y2[k];
    const double sep = oracles::brute_lp_dist(diff, {0.0, 0.0, 0.0}, 2.0);
    const double ceiling = 4.0 * eta + 2.0 * D * t2.eps;
    CHECK(sep <= ceiling + 1e-12);
    CHECK(ceiling < 2.0);  // the margin that makes the contradiction strict
  }
}

TEST_CASE("extract_half contract on small random embeddings") {
  Rng seeds(0x5151515151ULL);
  for (int n : {2, 3, 4, 5}) {
    for (double p : {2.0, 3.0}) {
      const ConvexityProfile profile{p, 1.0 / (p * std::pow(2.0, p)),
                                     ConvexityProfile::Source::analytic};
      for (int rep = 0; rep < 4; ++rep) {
        const Embedding e = normalize_embedding(
            random_embedding(n, SpaceSpec{p, 4}, seeds.next_u64()));
        const double d_in = oracles::brute_force_distortion(e).distortion;
        const ExtractHalfResult res = extract_half(e, profile, 1e-6);
        CHECK(res.embedding.tree.depth == n / 2);
        const double d_out =
            oracles::brute_force_distortion(res.embedding).distortion;
        CHECK(d_out <= f_step(d_in, profile, 1e-6) + 1e-9);
        CHECK(res.trace.d_sequence.size() == 2);
        CHECK(res.trace.levels.size() == 1);
        CHECK(res.trace.levels[0].depth == n);
        for (const auto& cert : res.trace.levels[0].certificates) {
          CHECK(cert.kept_norm <= cert.bound);
          CHECK(cert.kept_norm <= cert.other_norm);
        }
      }
    }
  }
}

TEST_CASE("extract_half on the orthogonal-edge embedding") {
  // Each edge along a fresh axis: pairs at tree distance k map to sqrt(k),
  // so the normalized distortion is sqrt(2n).
  const int n = 4;
  const BinaryTree tree = build_tree(n);
  const int edges = static_cast<int>(tree.vertex_count()) - 1;
  std::vector<double> coords(tree.vertex_count() * edges, 0.0);
  for (VertexId v = 2; v <= tree.vertex_count(); ++v) {
    const VertexId parent = v / 2;
    for (int k = 0; k < edges; ++k) {
      coords[(v - 1) * edges + k] = coords[(parent - 1) * edges + k];
    }
    coords[(v - 1) * edges + static_cast<int>(v) - 2] = 1.0;
  }
  const Embedding raw{tree, SpaceSpec{2.0, edges}, coords};
  const Embedding e = normalize_embedding(raw);
  const double D = evaluate_distortion(e).distortion;
  CHECK(D == doctest::Approx(std::sqrt(2.0 * n)).epsilon(1e-12));

  const ExtractHalfResult res = extract_half(e, kHilbert, 1e-6);
  const double d_out = evaluate_distortion(res.embedding).distortion;
  CHECK(res.embedding.tree.depth == 2);
  CHECK(d_out <= f_step(D, kHilbert, 1e-6) + 1e-9);
  CHECK(d_out < D);
}

TEST_CASE("extract_half preconditions") {
  CHECK_THROWS_AS(
      extract_half(random_embedding(1, SpaceSpec{2.0, 2}, 1), kHilbert, 1e-6),
      DepthError);
  // Raw (unnormalized) random embeddings are rejected.
  CHECK_THROWS_AS(
      extract_half(random_embedding(3, SpaceSpec{2.0, 2}, 1), kHilbert, 1e-6),
      HypothesisError);
}

TEST_CASE("certify_chain on T_2 runs a single extraction") {
  const Embedding e = random_embedding(2, SpaceSpec{2.0, 3}, 77);
  const ExtractionTrace trace = certify_chain(e, kHilbert, 1e-6);
  CHECK(trace.levels.size() == 1);
  CHECK(trace.d_sequence.size() == 2);
  CHECK(trace.d0_dominates);
  CHECK(trace.lower_bound ==
        doctest::Approx(lower_bound_iterative(1, kHilbert, 1e-6).value));
}

TEST_CASE("certify_chain halves depths and improves every level") {
  const Embedding e = random_embedding(8, SpaceSpec{2.0, 4}, 4242);
  const ExtractionTrace trace = certify_chain(e, kHilbert, 1e-6);
  REQUIRE(trace.levels.size() == 3);  // 8 -> 4 -> 2 -> 1
  CHECK(trace.levels[0].depth == 8);
  CHECK(trace.levels[1].depth == 4);
  CHECK(trace.levels[2].depth == 2);
  REQUIRE(trace.d_sequence.size() == 4);
  for (std::size_t k = 0; k + 1 < trace.d_sequence.size(); ++k) {
    const double fd = f_step(trace.d_sequence[k], kHilbert, 1e-6);
    CHECK(trace.d_sequence[k + 1] <= fd + 1e-9);
    CHECK(trace.d_sequence[k + 1] < trace.d_sequence[k]);
  }
  CHECK(trace.d0_dominates);
  CHECK(trace.certified_statement.find("distortion") != std::string::npos);
  CHECK_THROWS_AS(
      certify_chain(random_embedding(1, SpaceSpec{2.0, 2}, 1), kHilbert,
                    1e-6),
      DepthError);
}
