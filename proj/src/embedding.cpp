#include "treebound/embedding.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace treebound {

void Embedding::validate() const {
  space.validate();
  const std::int64_t expected =
      tree.vertex_count() * static_cast<std::int64_t>(space.dim);
  if (static_cast<std::int64_t>(coords.size()) != expected) {
    throw DomainError("embedding has " + std::to_string(coords.size()) +
                      " coordinates, tree of depth " +
                      std::to_string(tree.depth) + " in dimension " +
                      std::to_string(space.dim) + " needs " +
                      std::to_string(expected));
  }
  for (double c : coords) {
    if (!std::isfinite(c)) throw DomainError("non-finite coordinate");
  }
}

Embedding make_embedding(const BinaryTree& tree, const SpaceSpec& space,
                         std::vector<double> coords) {
  Embedding e{tree, space, std::move(coords)};
  e.validate();
  return e;
}

namespace {

// Tree distances for all vertices, reused by the pair scan. Distances in
// T_n are at most 2n, so a narrow type suffices.
std::vector<std::uint8_t> depth_table(const BinaryTree& tree) {
  std::vector<std::uint8_t> depths(tree.vertex_count() + 1);
  for (VertexId v = 1; v <= tree.vertex_count(); ++v) {
    depths[v] = static_cast<std::uint8_t>(vertex_depth(v));
  }
  return depths;
}

int pair_tree_distance(const std::vector<std::uint8_t>& depths, VertexId u,
                       VertexId v) {
  VertexId a = u;
  VertexId b = v;
  while (depths[a] > depths[b]) a /= 2;
  while (depths[b] > depths[a]) b /= 2;
  while (a != b) {
    a /= 2;
    b /= 2;
  }
  return depths[u] + depths[v] - 2 * depths[a];
}

}  // namespace

DistortionReport evaluate_distortion(const Embedding& e) {
  e.validate();
  if (e.tree.depth < 1) {
    throw NoPairs("distortion needs at least one vertex pair; tree depth is " +
                  std::to_string(e.tree.depth));
  }
  const VertexId count = e.tree.vertex_count();
  const auto depths = depth_table(e.tree);

  double expansion = 0.0;
  double contraction = std::numeric_limits<double>::infinity();
  for (VertexId u = 1; u <= count; ++u) {
    for (VertexId v = u + 1; v <= count; ++v) {
      const double img = e.pair_distance(u, v);
      if (img == 0.0) {
        throw DegenerateEmbedding("vertices " + std::to_string(u) + " and " +
                                  std::to_string(v) +
                                  " map to the same point");
      }
      const double ratio = img / pair_tree_distance(depths, u, v);
      if (ratio > expansion) expansion = ratio;
      if (ratio < contraction) contraction = ratio;
    }
  }
  DistortionReport report;
  report.expansion = expansion;
  report.contraction = contraction;
  report.distortion = expansion / contraction;
  report.scale = contraction;
  return report;
}

Embedding normalize_embedding(const Embedding& e) {
  const DistortionReport report = evaluate_distortion(e);
  Embedding out = e;
  const double inv = 1.0 / report.contraction;
  for (double& c : out.coords) c *= inv;
  return out;
}

Embedding restrict_to_selection(const Embedding& e, const Selection& kept) {
  e.validate();
  if (e.tree.depth < 2) {
    throw DepthError("restriction needs tree depth >= 2, got " +
                     std::to_string(e.tree.depth));
  }
  const int half_depth = e.tree.depth / 2;
  const BinaryTree half_tree = build_tree(half_depth);

  // sigma[w] = vertex of the original tree represented by w in T_(n/2);
  // built top-down, so each level only needs its parents resolved.
  std::vector<VertexId> sigma(half_tree.vertex_count() + 1, 0);
  sigma[1] = 1;
  for (VertexId w = 1; w <= half_tree.vertex_count() / 2; ++w) {
    const VertexId s = sigma[w];
    const auto it = kept.find(s);
    if (it == kept.end()) {
      throw SelectionError("selection chain broken: no grandchildren kept at "
                           "vertex " +
                           std::to_string(s));
    }
    const auto [via_left, via_right] = it->second;
    if (!e.tree.contains(via_left) || !e.tree.contains(via_right)) {
      throw SelectionError("kept vertex out of range at vertex " +
                           std::to_string(s));
    }
    if (parent_of(via_left) != left_child(s)) {
      throw SelectionError("vertex " + std::to_string(via_left) +
                           " is not a grandchild of " + std::to_string(s) +
                           " through its left child");
    }
    if (parent_of(via_right) != right_child(s)) {
      throw SelectionError("vertex " + std::to_string(via_right) +
                           " is not a grandchild of " + std::to_string(s) +
                           " through its right child");
    }
    sigma[left_child(w)] = via_left;
    sigma[right_child(w)] = via_right;
  }

  const int dim = e.space.dim;
  std::vector<double> coords(half_tree.vertex_count() *
                             static_cast<std::int64_t>(dim));
  for (VertexId w = 1; w <= half_tree.vertex_count(); ++w) {
    const auto src = e.point(sigma[w]);
    for (int k = 0; k < dim; ++k) {
      coords[(w - 1) * dim + k] = src[k] / 2.0;
    }
  }
  return Embedding{half_tree, e.space, std::move(coords)};
}

}  // namespace treebound
