#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "treebound/embedding.hpp"
#include "treebound/optimizer.hpp"

using namespace treebound;

namespace {

Embedding t1_line(double a, double b, double c) {
  return make_embedding(build_tree(1), SpaceSpec{2.0, 1}, {a, b, c});
}

}  // namespace

TEST_CASE("distortion of simple line embeddings of T_1") {
  // root -> 0, children -> +1, -1: every ratio is 1.
  const DistortionReport iso = evaluate_distortion(t1_line(0.0, 1.0, -1.0));
  CHECK(iso.distortion == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(iso.expansion == doctest::Approx(1.0));
  CHECK(iso.scale == iso.contraction);

  // root -> 0, children -> +1, -2: ratios 1/1, 2/1, 3/2.
  const DistortionReport skew = evaluate_distortion(t1_line(0.0, 1.0, -2.0));
  CHECK(skew.expansion == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(skew.contraction == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(skew.distortion == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("distortion errors") {
  CHECK_THROWS_AS(evaluate_distortion(t1_line(0.0, 1.0, 1.0)),
                  DegenerateEmbedding);
  CHECK_THROWS_AS(
      evaluate_distortion(make_embedding(build_tree(0), SpaceSpec{2.0, 1},
                                         {0.5})),
      NoPairs);
  CHECK_THROWS_AS(make_embedding(build_tree(1), SpaceSpec{2.0, 2},
                                 {1.0, 2.0, 3.0}),
                  DomainError);
}

TEST_CASE("random T_3 embedding matches the brute-force pair scan") {
  const Embedding e = random_embedding(3, SpaceSpec{2.0, 3}, 20250808);
  const DistortionReport rep = evaluate_distortion(e);
  const oracles::BruteReport brute = oracles::brute_force_distortion(e);
  CHECK(rep.expansion == doctest::Approx(brute.expansion).epsilon(1e-12));
  CHECK(rep.contraction == doctest::Approx(brute.contraction).epsilon(1e-12));
  CHECK(rep.distortion == doctest::Approx(brute.distortion).epsilon(1e-12));
  CHECK(rep.expansion ==
        doctest::Approx(rep.contraction * rep.distortion).epsilon(1e-12));
}

TEST_CASE("distortion is exactly scale invariant") {
  const Embedding e = random_embedding(3, SpaceSpec{2.5, 2}, 7);
  const double base = evaluate_distortion(e).distortion;
  for (double lambda : {1e-6, 0.5, 3.0, 1e6}) {
    Embedding scaled = e;
    for (double& c : scaled.coords) c *= lambda;
    CHECK(evaluate_distortion(scaled).distortion ==
          doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("normalize_embedding contract") {
  const Embedding e = random_embedding(3, SpaceSpec{2.0, 2}, 99);
  const Embedding n1 = normalize_embedding(e);
  const DistortionReport rep = evaluate_distortion(n1);
  CHECK(rep.contraction == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.distortion ==
        doctest::Approx(evaluate_distortion(e).distortion).epsilon(1e-12));

  // Idempotence.
  const Embedding n2 = normalize_embedding(n1);
  for (std::size_t i = 0; i < n1.coords.size(); ++i) {
    CHECK(n2.coords[i] == doctest::Approx(n1.coords[i]).epsilon(1e-15));
  }

  // Doubling all points changes nothing after normalization.
  Embedding doubled = e;
  for (double& c : doubled.coords) c *= 2.0;
  const Embedding n3 = normalize_embedding(doubled);
  for (std::size_t i = 0; i < n1.coords.size(); ++i) {
    CHECK(n3.coords[i] == doctest::Approx(n1.coords[i]).epsilon(1e-12));
  }
}

TEST_CASE("normalize keeps an already-normalized example unchanged") {
  const Embedding e = t1_line(0.0, 1.0, -2.0);  // contraction already 1
  const Embedding n = normalize_embedding(e);
  for (std::size_t i = 0; i < e.coords.size(); ++i) {
    CHECK(n.coords[i] == doctest::Approx(e.coords[i]).epsilon(1e-15));
  }
  CHECK(evaluate_distortion(n).contraction == doctest::Approx(1.0));
}

TEST_CASE("restrict_to_selection on T_2 gives a T_1 embedding") {
  const Embedding e = random_embedding(2, SpaceSpec{2.0, 2}, 5);
  Selection kept;
  kept[1] = KeptGrandchildren{5, 6};  // through child 2 and child 3
  const Embedding half = restrict_to_selection(e, kept);
  CHECK(half.tree.depth == 1);
  CHECK(half.coords.size() == 3 * 2);
  // vertex 1 -> original 1, vertex 2 -> original 5, vertex 3 -> original 6.
  const VertexId sigma[4] = {0, 1, 5, 6};
  for (VertexId w = 1; w <= 3; ++w) {
    for (int k = 0; k < 2; ++k) {
      CHECK(half.point(w)[k] == e.point(sigma[w])[k] / 2.0);
    }
  }
}

TEST_CASE("selected distances halve exactly") {
  const Embedding e = random_embedding(4, SpaceSpec{2.0, 3}, 11);
  Selection kept;
  for (VertexId s : {VertexId{1}, VertexId{4}, VertexId{7}}) {
    kept[s] = KeptGrandchildren{4 * s, 4 * s + 3};
  }
  const Embedding half = restrict_to_selection(e, kept);
  // Reconstruct sigma for the chosen selection.
  std::vector<VertexId> sigma(half.tree.vertex_count() + 1, 0);
  sigma[1] = 1;
  for (VertexId w = 1; w <= half.tree.vertex_count() / 2; ++w) {
    sigma[2 * w] = 4 * sigma[w];
    sigma[2 * w + 1] = 4 * sigma[w] + 3;
  }
  for (VertexId w = 1; w <= half.tree.vertex_count(); ++w) {
    for (VertexId z = w + 1; z <= half.tree.vertex_count(); ++z) {
      CHECK(2 * tree_distance(half.tree, w, z) ==
            tree_distance(e.tree, sigma[w], sigma[z]));
      CHECK(half.pair_distance(w, z) ==
            doctest::Approx(e.pair_distance(sigma[w], sigma[z]) / 2.0)
                .epsilon(1e-14));
    }
  }
}

TEST_CASE("restricted distortion equals the induced sub-map at scale 2") {
  const Embedding e = random_embedding(4, SpaceSpec{2.0, 3}, 31);
  Selection kept;
  for (VertexId s : {VertexId{1}, VertexId{5}, VertexId{6}}) {
    kept[s] = KeptGrandchildren{4 * s + 1, 4 * s + 2};
  }
  const Embedding half = restrict_to_selection(e, kept);
  const DistortionReport rep = evaluate_distortion(half);

  std::vector<VertexId> sigma(half.tree.vertex_count() + 1, 0);
  sigma[1] = 1;
  for (VertexId w = 1; w <= half.tree.vertex_count() / 2; ++w) {
    sigma[2 * w] = 4 * sigma[w] + 1;
    sigma[2 * w + 1] = 4 * sigma[w] + 2;
  }
  double expansion = 0.0;
  double contraction = 1e300;
  for (VertexId w = 1; w <= half.tree.vertex_count(); ++w) {
    for (VertexId z = w + 1; z <= half.tree.vertex_count(); ++z) {
      std::vector<double> a(e.point(sigma[w]).begin(),
                            e.point(sigma[w]).end());
      std::vector<double> b(e.point(sigma[z]).begin(),
                            e.point(sigma[z]).end());
      const double ratio = oracles::brute_lp_dist(a, b, 2.0) /
                           (2.0 * tree_distance(half.tree, w, z));
      expansion = std::max(expansion, ratio);
      contraction = std::min(contraction, ratio);
    }
  }
  CHECK(rep.distortion ==
        doctest::Approx(expansion / contraction).epsilon(1e-12));
}

TEST_CASE("malformed selections are rejected") {
  const Embedding e = random_embedding(2, SpaceSpec{2.0, 2}, 5);
  Selection not_grandchild;
  not_grandchild[1] = KeptGrandchildren{4, 5};  // 5 is through child 2
  CHECK_THROWS_AS(restrict_to_selection(e, not_grandchild), SelectionError);

  Selection missing;
  CHECK_THROWS_AS(restrict_to_selection(e, missing), SelectionError);

  const Embedding deep = random_embedding(4, SpaceSpec{2.0, 2}, 5);
  Selection broken;  // root present, depth-2 selections absent
  broken[1] = KeptGrandchildren{4, 6};
  CHECK_THROWS_AS(restrict_to_selection(deep, broken), SelectionError);

  CHECK_THROWS_AS(
      restrict_to_selection(random_embedding(1, SpaceSpec{2.0, 2}, 5), {}),
      DepthError);
}
