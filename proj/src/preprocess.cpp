#include "mentor/preprocess.hpp"

#include "mentor/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mentor {

IsolatedForest isolate_teams(const Graph& graph, const TeamSet& teams) {
  teams.validate_against(graph);
  IsolatedForest forest;
  forest.team_offsets.push_back(0);
  std::vector<Edge> edges;
  // local[v] = forest id of v inside the team being processed, -1 otherwise
  std::vector<NodeId> local(graph.num_nodes(), -1);
  for (std::size_t t = 0; t < teams.size(); ++t) {
    const auto& members = teams[t].members;
    const auto base = static_cast<NodeId>(forest.original.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      local[static_cast<std::size_t>(members[i])] = base + static_cast<NodeId>(i);
      forest.original.push_back(members[i]);
      forest.team_of.push_back(static_cast<std::int32_t>(t));
    }
    for (NodeId v : members) {
      for (NodeId u : graph.out_neighbors(v)) {
        const NodeId lu = local[static_cast<std::size_t>(u)];
        if (lu < 0) continue;
        // undirected adjacency lists each edge from both ends; keep one copy
        if (!graph.directed() && u < v) continue;
        edges.push_back({local[static_cast<std::size_t>(v)], lu});
      }
    }
    for (NodeId v : members) local[static_cast<std::size_t>(v)] = -1;
    forest.team_offsets.push_back(forest.original.size());
  }
  const auto n = forest.original.size();
  FeatureMatrix x(static_cast<Eigen::Index>(n), graph.features().cols());
  for (std::size_t i = 0; i < n; ++i) x.row(static_cast<Eigen::Index>(i)) = graph.features().row(forest.original[i]);
  forest.graph = Graph::build(n, std::move(edges), std::move(x), graph.directed(), false);
  return forest;
}

double WeightedHypergraph::weight(NodeId src, NodeId dst) const {
  if (!graph.directed() && src > dst) std::swap(src, dst);
  const auto edges = graph.edges();
  auto it = std::lower_bound(edges.begin(), edges.end(), Edge{src, dst});
  if (it == edges.end() || it->src != src || it->dst != dst) return 0.0;
  return weights[static_cast<std::size_t>(it - edges.begin())];
}

WeightedHypergraph collapse_hypergraph(const Graph& graph, const TeamSet& teams) {
  teams.validate_against(graph);
  WeightedHypergraph h;
  h.num_teams = teams.size();
  auto owners = teams.memberships(graph.num_nodes());
  std::vector<std::vector<NodeId>> hyper_of(graph.num_nodes());
  for (std::size_t t = 0; t < teams.size(); ++t) h.team_id.push_back(teams[t].id);
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    for (auto t : owners[v]) hyper_of[v].push_back(static_cast<NodeId>(t));
    if (owners[v].empty()) {
      hyper_of[v].push_back(static_cast<NodeId>(h.num_teams + h.teamless.size()));
      h.teamless.push_back(static_cast<NodeId>(v));
      h.team_id.push_back(kTeamlessMarker);
    }
  }
  const std::size_t n = h.num_teams + h.teamless.size();

  std::map<Edge, double> counts;
  for (const auto& e : graph.edges()) {
    for (NodeId i : hyper_of[static_cast<std::size_t>(e.src)]) {
      for (NodeId j : hyper_of[static_cast<std::size_t>(e.dst)]) {
        if (i == j) continue;
        Edge key{i, j};
        if (!graph.directed() && key.src > key.dst) std::swap(key.src, key.dst);
        counts[key] += 1.0;
      }
    }
  }
  std::vector<Edge> edges;
  edges.reserve(counts.size());
  for (const auto& [e, w] : counts) {
    edges.push_back(e);
    h.weights.push_back(w);
  }
  FeatureMatrix sizes(static_cast<Eigen::Index>(n), 1);
  for (std::size_t t = 0; t < h.num_teams; ++t) sizes(static_cast<Eigen::Index>(t), 0) = static_cast<double>(teams[t].members.size());
  for (std::size_t i = h.num_teams; i < n; ++i) sizes(static_cast<Eigen::Index>(i), 0) = 1.0;
  h.graph = Graph::build(n, std::move(edges), std::move(sizes), graph.directed(), false);
  return h;
}

double AnchorSets::score(NodeId v, std::size_t set) const {
  const int d = dist(v, set);
  return d == kInfiniteDistance ? 0.0 : 1.0 / (static_cast<double>(d) + 1.0);
}

AnchorSets sample_anchor_sets(const Graph& hypergraph, int c, int cutoff, std::mt19937_64& rng) {
  const std::size_t n = hypergraph.num_nodes();
  if (n < 2) throw ValidationError("anchor sets need at least 2 hypernodes");
  if (c < 1) throw ValidationError("anchor multiplier c must be >= 1");
  const auto tiers = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n))));
  AnchorSets a;
  a.num_nodes = n;
  a.cutoff = cutoff;
  std::vector<NodeId> pool(n);
  for (std::size_t tier = 0; tier < tiers; ++tier) {
    const std::size_t size = std::min<std::size_t>(std::size_t{1} << tier, n);
    for (std::size_t k = 0; k < static_cast<std::size_t>(c) * tiers; ++k) {
      std::iota(pool.begin(), pool.end(), 0);
      for (std::size_t i = 0; i < size; ++i) {
        std::swap(pool[i], pool[i + std::uniform_int_distribution<std::size_t>(0, n - 1 - i)(rng)]);
      }
      std::vector<NodeId> set(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
      std::sort(set.begin(), set.end());
      a.sets.push_back(std::move(set));
    }
  }
  const std::size_t s = a.sets.size();
  a.distance.assign(n * s, kInfiniteDistance);
  a.closest.assign(n * s, -1);
  for (std::size_t i = 0; i < s; ++i) {
    auto sd = distances_to_set(hypergraph, a.sets[i], cutoff);
    for (std::size_t v = 0; v < n; ++v) {
      a.distance[v * s + i] = sd.distance[v];
      a.closest[v * s + i] = sd.closest[v];
    }
  }
  return a;
}

}  // namespace mentor
