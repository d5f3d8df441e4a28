#pragma once

#include "mentor/graph.hpp"
#include "mentor/teams.hpp"

#include <random>
#include <vector>

namespace mentor {

/// Teams detached from the ecosystem: each team keeps only its internal edges, nodes shared
/// by k teams become k disconnected copies, and nodes outside every team are dropped.
/// Forest nodes are laid out team by team, so `team_of` is non-decreasing.
struct IsolatedForest {
  Graph graph;
  std::vector<NodeId> original;            // forest node -> ecosystem node
  std::vector<std::int32_t> team_of;       // forest node -> team index
  std::vector<std::size_t> team_offsets;   // team i spans [team_offsets[i], team_offsets[i+1])

  std::size_t num_teams() const { return team_offsets.empty() ? 0 : team_offsets.size() - 1; }
};

IsolatedForest isolate_teams(const Graph& graph, const TeamSet& teams);

inline constexpr TeamId kTeamlessMarker = -1;

/// Team-collapsed graph. Hypernodes [0, num_teams) are the teams in TeamSet order; the rest
/// are teamless ecosystem nodes. Edge weights count cross-team ecosystem edges, with team
/// multiplicity for overlapping members; intra-team edges are dropped.
struct WeightedHypergraph {
  Graph graph;                    // features: one column holding the team size
  std::vector<double> weights;    // aligned with graph.edges()
  std::size_t num_teams{0};
  std::vector<TeamId> team_id;    // hypernode -> team id, kTeamlessMarker for teamless nodes
  std::vector<NodeId> teamless;   // hypernode num_teams + i -> ecosystem node

  std::size_t num_hypernodes() const { return graph.num_nodes(); }
  /// Weight of the edge src -> dst, 0 when absent (orientation ignored for undirected graphs).
  double weight(NodeId src, NodeId dst) const;
};

WeightedHypergraph collapse_hypergraph(const Graph& graph, const TeamSet& teams);

/// Random reference sets over the hypergraph with distance-based scores.
/// Set sizes double per tier (1, 2, 4, ...) over ceil(log2 n) tiers with c * ceil(log2 n)
/// sets per tier, so there are c * ceil(log2 n)^2 sets in total.
struct AnchorSets {
  std::vector<std::vector<NodeId>> sets;
  std::size_t num_nodes{0};
  int cutoff{0};
  std::vector<int> distance;      // num_nodes x num_sets, row-major
  std::vector<NodeId> closest;    // closest member, -1 when beyond the cutoff

  std::size_t num_sets() const { return sets.size(); }
  int dist(NodeId v, std::size_t set) const { return distance[static_cast<std::size_t>(v) * sets.size() + set]; }
  NodeId closest_member(NodeId v, std::size_t set) const { return closest[static_cast<std::size_t>(v) * sets.size() + set]; }
  /// 1 / (d + 1), or 0 when the set is beyond the cutoff.
  double score(NodeId v, std::size_t set) const;
};

AnchorSets sample_anchor_sets(const Graph& hypergraph, int c, int cutoff, std::mt19937_64& rng);

}  // namespace mentor
