#include "treebound/tree.hpp"

#include <string>

namespace treebound {

BinaryTree build_tree(int depth) {
  if (depth < 0) {
    throw DomainError("tree depth must be nonnegative, got " +
                      std::to_string(depth));
  }
  // vertex_count = 2^(depth+1) - 1 must fit the signed 64-bit index type.
  if (depth >= 62) {
    throw SizeError("tree of depth " + std::to_string(depth) +
                    " overflows the vertex index type");
  }
  return BinaryTree{depth};
}

VertexId lowest_common_ancestor(VertexId u, VertexId v) {
  while (vertex_depth(u) > vertex_depth(v)) u /= 2;
  while (vertex_depth(v) > vertex_depth(u)) v /= 2;
  while (u != v) {
    u /= 2;
    v /= 2;
  }
  return u;
}

int tree_distance(const BinaryTree& tree, VertexId u, VertexId v) {
  if (!tree.contains(u) || !tree.contains(v)) {
    throw IndexError("vertex id out of range: (" + std::to_string(u) + ", " +
                     std::to_string(v) + ") in tree of depth " +
                     std::to_string(tree.depth));
  }
  const VertexId a = lowest_common_ancestor(u, v);
  return vertex_depth(u) + vertex_depth(v) - 2 * vertex_depth(a);
}

}  // namespace treebound
