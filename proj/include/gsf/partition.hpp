#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gsf/graph.hpp"

namespace gsf {

/// Allowed patch size is (1 + slack) * ceil(n / p).
inline constexpr Scalar kBalanceSlack = 0.25;

struct Patch {
  /// Global vertex ids, ascending; local id i is vertices[i].
  std::vector<Index> vertices;
  WeightedGraph graph;
};

struct Partition {
  std::vector<Index> labels;
  std::vector<Patch> patches;
  /// Non-fatal diagnostics, e.g. balance given up to keep patches connected.
  std::vector<std::string> warnings;

  Index num_patches() const { return static_cast<Index>(patches.size()); }
};

struct PartitionQuality {
  Scalar cut_affinity = 0;
  Scalar imbalance = 0;
  bool connected = false;
};

/// Multilevel heavy-edge-matching k-way partition into connected patches.
/// Edge weights are distances; coupling strength is their reciprocal.
Partition partition_graph(const WeightedGraph &graph, Index num_patches, std::uint64_t seed);

/// Wraps labels in 0..p-1 into a Partition with induced patch subgraphs.
Partition make_partition(const WeightedGraph &graph, std::vector<Index> labels, Index num_patches);

PartitionQuality partition_quality(const Partition &partition, const WeightedGraph &graph);

Scalar patch_capacity(Index n, Index num_patches);

/// Moves every non-largest connected fragment of a patch to the adjacent
/// patch it is most strongly coupled to, preferring moves within capacity.
/// Returns the number of fragments moved.
Index repair_connectivity(const WeightedGraph &graph, std::span<Index> labels, Index num_patches,
                          std::vector<std::string> *warnings = nullptr);

}  // namespace gsf
