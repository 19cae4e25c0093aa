#include "gsf/cluster_tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gsf {

namespace {

BoundingBox bounding_box(const Matrix &points, const std::vector<Index> &perm, Index start, Index end) {
  BoundingBox box;
  box.lo = points.col(perm[start]);
  box.hi = box.lo;
  for (Index k = start + 1; k < end; ++k) {
    box.lo = box.lo.cwiseMin(points.col(perm[k]));
    box.hi = box.hi.cwiseMax(points.col(perm[k]));
  }
  return box;
}

}  // namespace

ClusterTree ClusterTree::build(const Matrix &points, Index leaf_capacity) {
  const Index n = points.cols();
  if (n < 1) throw std::invalid_argument("cluster tree needs at least one point");
  if (leaf_capacity < 1) throw std::invalid_argument("leaf capacity must be positive");
  const Index q = points.rows();

  ClusterTree tree;
  tree.leaf_capacity_ = leaf_capacity;
  tree.permutation_.resize(n);
  std::iota(tree.permutation_.begin(), tree.permutation_.end(), Index{0});
  auto &perm = tree.permutation_;
  auto &nodes = tree.nodes_;

  ClusterNode root;
  root.start = 0;
  root.end = n;
  root.bbox = bounding_box(points, perm, 0, n);
  nodes.push_back(std::move(root));

  std::vector<Index> axes(q);
  // FIFO processing appends children in breadth-first order.
  for (Index cur = 0; cur < static_cast<Index>(nodes.size()); ++cur) {
    const Index start = nodes[cur].start, end = nodes[cur].end;
    tree.depth_ = std::max(tree.depth_, nodes[cur].level);
    if (end - start <= leaf_capacity) continue;
    const Vector extent = nodes[cur].bbox.hi - nodes[cur].bbox.lo;
    std::iota(axes.begin(), axes.end(), Index{0});
    std::stable_sort(axes.begin(), axes.end(),
                     [&](Index a, Index b) { return extent(a) > extent(b); });
    for (Index axis : axes) {
      if (!(extent(axis) > 0)) break;
      const Scalar mid = 0.5 * (nodes[cur].bbox.lo(axis) + nodes[cur].bbox.hi(axis));
      auto first = perm.begin() + start, last = perm.begin() + end;
      auto split = std::stable_partition(first, last, [&](Index i) { return points(axis, i) <= mid; });
      const Index cut = static_cast<Index>(split - perm.begin());
      if (cut == start || cut == end) continue;
      for (auto [s, e] : {std::pair{start, cut}, std::pair{cut, end}}) {
        ClusterNode child;
        child.start = s;
        child.end = e;
        child.level = nodes[cur].level + 1;
        child.parent = cur;
        child.bbox = bounding_box(points, perm, s, e);
        nodes[cur].children.push_back(static_cast<Index>(nodes.size()));
        nodes.push_back(std::move(child));
      }
      break;
    }
  }
  return tree;
}

TreeStats tree_stats(const ClusterTree &tree) {
  TreeStats stats;
  stats.depth = tree.depth();
  stats.num_nodes = static_cast<Index>(tree.nodes().size());
  for (const auto &node : tree.nodes())
    if (node.is_leaf()) {
      ++stats.num_leaves;
      ++stats.leaf_sizes[node.size()];
    }
  return stats;
}

}  // namespace gsf
