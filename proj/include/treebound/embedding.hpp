#pragma once

#include <map>
#include <span>
#include <vector>

#include "treebound/space.hpp"
#include "treebound/tree.hpp"

namespace treebound {

/// A map from the vertices of a binary tree into l_p^d. Coordinates are
/// stored flat in heap order (row v-1 holds the point of vertex v).
struct Embedding {
  BinaryTree tree;
  SpaceSpec space;
  std::vector<double> coords;

  std::span<const double> point(VertexId v) const {
    return {coords.data() + (v - 1) * space.dim,
            static_cast<std::size_t>(space.dim)};
  }
  std::span<double> point(VertexId v) {
    return {coords.data() + (v - 1) * space.dim,
            static_cast<std::size_t>(space.dim)};
  }

  double pair_distance(VertexId u, VertexId v) const {
    return lp_dist(point(u), point(v), space.p);
  }

  /// Throws unless coords holds exactly vertex_count * dim finite entries.
  void validate() const;
};

Embedding make_embedding(const BinaryTree& tree, const SpaceSpec& space,
                         std::vector<double> coords);

/// Expansion, contraction and their ratio over all unordered vertex pairs.
/// For a finite tree the optimal scale in the distortion definition is the
/// contraction itself, so it is reported as `scale`.
struct DistortionReport {
  double expansion = 0.0;
  double contraction = 0.0;
  double distortion = 0.0;
  double scale = 0.0;
};

/// Exact pair scan: expansion = max |phi(u)-phi(v)|/d(u,v), contraction =
/// min of the same ratio, distortion = expansion/contraction.
DistortionReport evaluate_distortion(const Embedding& e);

/// Rescales by 1/contraction so every pair satisfies
/// |phi(u)-phi(v)| >= d(u,v) with equality attained; the result is
/// D-Lipschitz with D equal to the distortion of the input.
Embedding normalize_embedding(const Embedding& e);

/// For each selected vertex, the grandchild kept through its left child
/// (2v subtree) and through its right child (2v+1 subtree).
struct KeptGrandchildren {
  VertexId via_left = 0;
  VertexId via_right = 0;
};

using Selection = std::map<VertexId, KeptGrandchildren>;

/// Restricts an embedding of T_n to a selection of every-other-generation
/// vertices, producing an embedding of T_(n/2). Selected vertices sit at
/// even depths; points are halved so tree distances and image distances
/// halve together.
Embedding restrict_to_selection(const Embedding& e, const Selection& kept);

}  // namespace treebound
