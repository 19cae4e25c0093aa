#include "gsf/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace gsf {

namespace {

// Affinity graph with vertex weights used across coarsening levels.
struct CoarseGraph {
  Index n = 0;
  std::vector<Index> vwgt;
  std::vector<Index> offsets{0};
  std::vector<Index> adj;
  std::vector<Scalar> aff;

  Index begin(Index v) const { return offsets[v]; }
  Index end(Index v) const { return offsets[v + 1]; }
};

CoarseGraph affinity_graph(const WeightedGraph &g) {
  CoarseGraph c;
  c.n = g.num_vertices();
  c.vwgt.assign(c.n, 1);
  c.offsets.assign(c.n + 1, 0);
  for (Index v = 0; v < c.n; ++v) {
    for (const auto &e : g.neighbors(v)) {
      if (!(e.weight > 0))
        throw std::invalid_argument("partitioning requires strictly positive edge weights");
      c.adj.push_back(e.to);
      c.aff.push_back(1.0 / e.weight);
    }
    c.offsets[v + 1] = static_cast<Index>(c.adj.size());
  }
  return c;
}

// Heavy edge matching in vertex id order. Returns the fine -> coarse map and
// the coarse graph, or an empty map when nothing could be matched.
std::vector<Index> coarsen(const CoarseGraph &g, Index max_vwgt, CoarseGraph &out) {
  std::vector<Index> match(g.n, -1);
  Index pairs = 0;
  for (Index v = 0; v < g.n; ++v) {
    if (match[v] != -1) continue;
    Index best = -1;
    Scalar best_aff = -1;
    for (Index k = g.begin(v); k < g.end(v); ++k) {
      const Index u = g.adj[k];
      if (match[u] != -1 || g.vwgt[u] + g.vwgt[v] > max_vwgt) continue;
      if (g.aff[k] > best_aff || (g.aff[k] == best_aff && u < best)) {
        best = u;
        best_aff = g.aff[k];
      }
    }
    if (best == -1) {
      match[v] = v;
    } else {
      match[v] = best;
      match[best] = v;
      ++pairs;
    }
  }
  if (pairs == 0) return {};

  std::vector<Index> cmap(g.n, -1);
  Index nc = 0;
  for (Index v = 0; v < g.n; ++v) {
    if (cmap[v] != -1) continue;
    cmap[v] = nc;
    cmap[match[v]] = nc;
    ++nc;
  }
  out = CoarseGraph{};
  out.n = nc;
  out.vwgt.assign(nc, 0);
  for (Index v = 0; v < g.n; ++v) out.vwgt[cmap[v]] += g.vwgt[v];
  std::vector<std::vector<Index>> members(nc);
  for (Index v = 0; v < g.n; ++v) members[cmap[v]].push_back(v);
  out.offsets.assign(nc + 1, 0);
  std::map<Index, Scalar> acc;
  for (Index c = 0; c < nc; ++c) {
    acc.clear();
    for (Index v : members[c])
      for (Index k = g.begin(v); k < g.end(v); ++k) {
        const Index cu = cmap[g.adj[k]];
        if (cu != c) acc[cu] += g.aff[k];
      }
    for (const auto &[cu, a] : acc) {
      out.adj.push_back(cu);
      out.aff.push_back(a);
    }
    out.offsets[c + 1] = static_cast<Index>(out.adj.size());
  }
  return cmap;
}

WeightedGraph distance_view(const CoarseGraph &g) {
  std::vector<EdgeTriple> edges;
  for (Index v = 0; v < g.n; ++v)
    for (Index k = g.begin(v); k < g.end(v); ++k)
      if (v < g.adj[k]) edges.push_back({v, g.adj[k], 1.0 / g.aff[k]});
  return WeightedGraph::from_edges(g.n, edges);
}

Index argmax_smallest(const std::vector<Scalar> &values, const std::vector<char> &excluded) {
  Index best = -1;
  for (Index v = 0; v < static_cast<Index>(values.size()); ++v) {
    if (excluded[v]) continue;
    if (best == -1 || values[v] > values[best]) best = v;
  }
  return best;
}

// Greedy balanced growth from MaxMin-spread seeds on the coarsest graph.
std::vector<Index> initial_assignment(const CoarseGraph &g, Index p, std::uint64_t seed) {
  const WeightedGraph dview = distance_view(g);
  std::vector<char> is_seed(g.n, 0);
  std::vector<Index> seeds;
  {
    const Index start = static_cast<Index>(seed % static_cast<std::uint64_t>(g.n));
    const auto from_start = dijkstra(dview, start);
    const std::vector<char> none(g.n, 0);
    const Index first = argmax_smallest(from_start, none);
    seeds.push_back(first);
    is_seed[first] = 1;
    std::vector<Scalar> mind = dijkstra(dview, first);
    while (static_cast<Index>(seeds.size()) < p) {
      const Index next = argmax_smallest(mind, is_seed);
      seeds.push_back(next);
      is_seed[next] = 1;
      const auto d = dijkstra(dview, next);
      for (Index v = 0; v < g.n; ++v) mind[v] = std::min(mind[v], d[v]);
    }
  }

  // Each step extends the currently lightest patch by its nearest unlabeled
  // frontier vertex, so an isolated seed cannot be starved by its neighbors.
  std::vector<Index> label(g.n, -1);
  std::vector<Index> weight(p, 0);
  using Item = std::pair<Scalar, Index>;  // distance from the seed, vertex
  std::vector<std::priority_queue<Item, std::vector<Item>, std::greater<>>> frontier(p);
  using Slot = std::pair<Index, Index>;  // weight, patch
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> active;
  auto claim = [&](Index v, Index r, Scalar d) {
    label[v] = r;
    weight[r] += g.vwgt[v];
    for (Index k = g.begin(v); k < g.end(v); ++k)
      if (label[g.adj[k]] == -1) frontier[r].push({d + 1.0 / g.aff[k], g.adj[k]});
  };
  for (Index r = 0; r < p; ++r) claim(seeds[r], r, 0);
  for (Index r = 0; r < p; ++r) active.push({weight[r], r});
  while (!active.empty()) {
    const Index r = active.top().second;
    active.pop();
    auto &heap = frontier[r];
    while (!heap.empty() && label[heap.top().second] != -1) heap.pop();
    if (heap.empty()) continue;
    const auto [d, v] = heap.top();
    heap.pop();
    claim(v, r, d);
    active.push({weight[r], r});
  }
  return label;
}

// True when the same-patch neighbors of v stay connected without v, found by a
// search confined to v's patch; a search exceeding `budget` visits counts as a split.
bool keeps_patch_connected(const CoarseGraph &g, const std::vector<Index> &label, Index v,
                           std::vector<Index> &mark, Index stamp) {
  const Index own = label[v];
  Index pending = 0;
  Index start = -1;
  for (Index k = g.begin(v); k < g.end(v); ++k)
    if (label[g.adj[k]] == own && mark[g.adj[k]] != -stamp) {
      mark[g.adj[k]] = -stamp;
      ++pending;
      start = g.adj[k];
    }
  if (pending <= 1) return true;
  const Index budget = 64 * (g.end(v) - g.begin(v)) + 256;
  std::vector<Index> queue{start};
  mark[start] = stamp;
  --pending;
  mark[v] = stamp;
  for (std::size_t head = 0; head < queue.size() && pending > 0; ++head) {
    if (static_cast<Index>(queue.size()) > budget) return false;
    const Index u = queue[head];
    for (Index k = g.begin(u); k < g.end(u); ++k) {
      const Index w = g.adj[k];
      if (label[w] != own || mark[w] == stamp) continue;
      if (mark[w] == -stamp) --pending;
      mark[w] = stamp;
      queue.push_back(w);
    }
  }
  return pending == 0;
}

void refine(const CoarseGraph &g, std::vector<Index> &label, Index p, Scalar capacity) {
  std::vector<Index> mark(g.n, 0);
  Index stamp = 0;
  std::vector<Index> weight(p, 0);
  for (Index v = 0; v < g.n; ++v) weight[label[v]] += g.vwgt[v];
  std::vector<Scalar> conn(p, 0);
  std::vector<Index> touched;
  for (int sweep = 0; sweep < 10; ++sweep) {
    bool moved = false;
    for (Index v = 0; v < g.n; ++v) {
      const Index own = label[v];
      touched.clear();
      bool boundary = false;
      for (Index k = g.begin(v); k < g.end(v); ++k) {
        const Index r = label[g.adj[k]];
        if (r != own) boundary = true;
        if (conn[r] == 0) touched.push_back(r);
        conn[r] += g.aff[k];
      }
      if (boundary && weight[own] > g.vwgt[v]) {
        Index best = -1;
        for (Index r : touched) {
          if (r == own) continue;
          if (best == -1 || conn[r] > conn[best] || (conn[r] == conn[best] && r < best)) best = r;
        }
        const Scalar gain = conn[best] - conn[own];
        if (gain > 0 && weight[best] + g.vwgt[v] <= capacity &&
            keeps_patch_connected(g, label, v, mark, ++stamp)) {
          label[v] = best;
          weight[own] -= g.vwgt[v];
          weight[best] += g.vwgt[v];
          moved = true;
        }
      }
      for (Index r : touched) conn[r] = 0;
    }
    if (!moved) break;
  }
}

}  // namespace

Scalar patch_capacity(Index n, Index num_patches) {
  const Index ideal = (n + num_patches - 1) / num_patches;
  return (1 + kBalanceSlack) * static_cast<Scalar>(ideal);
}

Index repair_connectivity(const WeightedGraph &graph, std::span<Index> labels, Index p,
                          std::vector<std::string> *warnings) {
  const Index n = graph.num_vertices();
  const Scalar capacity = patch_capacity(n, p);
  Index moved_total = 0;
  bool balance_warned = false;
  while (true) {
    // Components of the patch-induced subgraphs, discovered in vertex id order.
    std::vector<Index> comp(n, -1);
    std::vector<Index> comp_size;
    std::vector<Index> comp_patch;
    std::vector<Index> stack;
    for (Index s = 0; s < n; ++s) {
      if (comp[s] != -1) continue;
      const Index c = static_cast<Index>(comp_size.size());
      comp_size.push_back(0);
      comp_patch.push_back(labels[s]);
      comp[s] = c;
      stack.push_back(s);
      while (!stack.empty()) {
        const Index u = stack.back();
        stack.pop_back();
        ++comp_size[c];
        for (const auto &e : graph.neighbors(u))
          if (comp[e.to] == -1 && labels[e.to] == labels[u]) {
            comp[e.to] = c;
            stack.push_back(e.to);
          }
      }
    }
    std::vector<Index> keep(p, -1);
    for (Index c = 0; c < static_cast<Index>(comp_size.size()); ++c) {
      Index &k = keep[comp_patch[c]];
      if (k == -1 || comp_size[c] > comp_size[k]) k = c;
    }
    std::vector<std::vector<Index>> fragments(comp_size.size());
    bool any = false;
    for (Index v = 0; v < n; ++v)
      if (keep[labels[v]] != comp[v]) {
        fragments[comp[v]].push_back(v);
        any = true;
      }
    if (!any) break;

    std::vector<Index> weight(p, 0);
    for (Index v = 0; v < n; ++v) ++weight[labels[v]];
    for (const auto &frag : fragments) {
      if (frag.empty()) continue;
      const Index own = labels[frag.front()];
      std::map<Index, Scalar> coupling;
      for (Index v : frag)
        for (const auto &e : graph.neighbors(v))
          if (labels[e.to] != own) coupling[labels[e.to]] += 1.0 / e.weight;
      Index best_fit = -1, best_any = -1;
      const Index size = static_cast<Index>(frag.size());
      for (const auto &[r, a] : coupling) {
        if (best_any == -1 || a > coupling[best_any]) best_any = r;
        if (weight[r] + size <= capacity && (best_fit == -1 || a > coupling[best_fit]))
          best_fit = r;
      }
      const Index target = best_fit != -1 ? best_fit : best_any;
      if (target == -1) continue;
      if (best_fit == -1 && !balance_warned && warnings) {
        warnings->push_back("connectivity repair exceeded the patch balance bound");
        balance_warned = true;
      }
      for (Index v : frag) labels[v] = target;
      weight[own] -= size;
      weight[target] += size;
      ++moved_total;
    }
  }
  return moved_total;
}

Partition make_partition(const WeightedGraph &graph, std::vector<Index> labels, Index p) {
  if (static_cast<Index>(labels.size()) != graph.num_vertices())
    throw std::invalid_argument("label count does not match vertex count");
  Partition part;
  part.patches.resize(p);
  for (Index v = 0; v < static_cast<Index>(labels.size()); ++v) {
    if (labels[v] < 0 || labels[v] >= p)
      throw std::invalid_argument("patch label out of range at vertex " + std::to_string(v));
    part.patches[labels[v]].vertices.push_back(v);
  }
  for (Index r = 0; r < p; ++r) {
    if (part.patches[r].vertices.empty())
      throw std::invalid_argument("patch " + std::to_string(r) + " is empty");
    part.patches[r].graph = graph.induced_subgraph(part.patches[r].vertices);
  }
  part.labels = std::move(labels);
  return part;
}

Partition partition_graph(const WeightedGraph &graph, Index p, std::uint64_t seed) {
  const Index n = graph.num_vertices();
  if (p < 1) throw std::invalid_argument("number of patches must be positive");
  if (p > n) throw std::invalid_argument("more patches than vertices");
  if (!is_connected(graph))
    throw std::invalid_argument(
        "graph is disconnected; partition its connected components separately");
  if (p == 1) return make_partition(graph, std::vector<Index>(n, 0), 1);

  const Scalar capacity = patch_capacity(n, p);
  const Index coarsen_to = std::max<Index>(30 * p, 2 * p);
  const Index max_vwgt = std::max<Index>(1, static_cast<Index>(std::ceil(1.5 * n / coarsen_to)));

  std::vector<CoarseGraph> levels;
  std::vector<std::vector<Index>> maps;
  levels.push_back(affinity_graph(graph));
  while (levels.back().n > coarsen_to) {
    CoarseGraph next;
    auto cmap = coarsen(levels.back(), max_vwgt, next);
    if (cmap.empty()) break;
    const bool stalled = next.n > 0.95 * static_cast<Scalar>(levels.back().n);
    maps.push_back(std::move(cmap));
    levels.push_back(std::move(next));
    if (stalled) break;
  }

  std::vector<Index> label = initial_assignment(levels.back(), p, seed);
  refine(levels.back(), label, p, capacity);
  for (Index l = static_cast<Index>(maps.size()) - 1; l >= 0; --l) {
    const auto &cmap = maps[l];
    std::vector<Index> fine(cmap.size());
    for (std::size_t v = 0; v < cmap.size(); ++v) fine[v] = label[cmap[v]];
    label = std::move(fine);
    refine(levels[l], label, p, capacity);
  }

  std::vector<std::string> warnings;
  repair_connectivity(graph, label, p, &warnings);
  Partition part = make_partition(graph, std::move(label), p);
  Index largest = 0;
  for (const auto &patch : part.patches)
    largest = std::max<Index>(largest, static_cast<Index>(patch.vertices.size()));
  if (static_cast<Scalar>(largest) > capacity && warnings.empty())
    warnings.push_back("patch balance bound exceeded");
  part.warnings = std::move(warnings);
  return part;
}

PartitionQuality partition_quality(const Partition &partition, const WeightedGraph &graph) {
  PartitionQuality q;
  const Index n = graph.num_vertices();
  const Index p = partition.num_patches();
  for (Index u = 0; u < n; ++u)
    for (const auto &e : graph.neighbors(u))
      if (u < e.to && partition.labels[u] != partition.labels[e.to]) q.cut_affinity += 1.0 / e.weight;
  Index largest = 0;
  for (const auto &patch : partition.patches)
    largest = std::max<Index>(largest, static_cast<Index>(patch.vertices.size()));
  q.imbalance = n > 0 ? static_cast<Scalar>(largest) * static_cast<Scalar>(p) / static_cast<Scalar>(n) : 0;
  q.connected = std::all_of(partition.patches.begin(), partition.patches.end(),
                            [](const Patch &patch) { return is_connected(patch.graph); });
  return q;
}

}  // namespace gsf
