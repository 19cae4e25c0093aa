#pragma once

#include <map>
#include <vector>

#include "gsf/types.hpp"

namespace gsf {

struct BoundingBox {
  Vector lo;
  Vector hi;

  /// Length of the box diagonal.
  Scalar diameter() const { return (hi - lo).norm(); }
  bool contains(const Eigen::Ref<const Vector> &x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
};

struct ClusterNode {
  /// Range [start, end) into the tree's permutation.
  Index start = 0;
  Index end = 0;
  Index level = 0;
  Index parent = -1;
  std::vector<Index> children;
  BoundingBox bbox;

  Index size() const { return end - start; }
  bool is_leaf() const { return children.empty(); }
};

/// Binary cluster tree from longest-axis midpoint splits. Nodes are stored in
/// breadth-first order with the root at index 0.
class ClusterTree {
 public:
  ClusterTree() = default;

  /// `points` is q x N, one point per column.
  static ClusterTree build(const Matrix &points, Index leaf_capacity);

  const std::vector<ClusterNode> &nodes() const { return nodes_; }
  const ClusterNode &node(Index i) const { return nodes_[i]; }
  const ClusterNode &root() const { return nodes_.front(); }
  /// permutation()[k] is the point stored at position k.
  const std::vector<Index> &permutation() const { return permutation_; }
  Index depth() const { return depth_; }
  Index leaf_capacity() const { return leaf_capacity_; }
  Index num_points() const { return static_cast<Index>(permutation_.size()); }

 private:
  std::vector<ClusterNode> nodes_;
  std::vector<Index> permutation_;
  Index depth_ = 0;
  Index leaf_capacity_ = 1;
};

struct TreeStats {
  Index depth = 0;
  Index num_nodes = 0;
  Index num_leaves = 0;
  /// Leaf size -> number of leaves with that size.
  std::map<Index, Index> leaf_sizes;
};

TreeStats tree_stats(const ClusterTree &tree);

}  // namespace gsf
