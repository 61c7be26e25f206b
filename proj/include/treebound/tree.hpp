#pragma once

#include <bit>
#include <cstdint>

#include "treebound/errors.hpp"

namespace treebound {

using VertexId = std::int64_t;

/// Complete rooted binary tree of a given depth with the shortest-path
/// metric. Vertices are numbered 1..2^(depth+1)-1 in heap order: the root is
/// 1 and the children of v are 2v and 2v+1, so parent/child arithmetic is
/// O(1) and vertex storage is implicit.
struct BinaryTree {
  int depth = 0;

  VertexId vertex_count() const {
    return (VertexId{1} << (depth + 1)) - 1;
  }

  bool contains(VertexId v) const { return v >= 1 && v <= vertex_count(); }
};

BinaryTree build_tree(int depth);

/// Depth of a vertex in heap order: floor(log2(v)).
inline int vertex_depth(VertexId v) {
  return std::bit_width(static_cast<std::uint64_t>(v)) - 1;
}

inline VertexId parent_of(VertexId v) { return v / 2; }
inline VertexId left_child(VertexId v) { return 2 * v; }
inline VertexId right_child(VertexId v) { return 2 * v + 1; }

/// Lowest common ancestor in heap order.
VertexId lowest_common_ancestor(VertexId u, VertexId v);

/// Graph distance d(u,v) = depth(u) + depth(v) - 2 depth(lca(u,v)).
int tree_distance(const BinaryTree& tree, VertexId u, VertexId v);

}  // namespace treebound
