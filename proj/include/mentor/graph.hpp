#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace mentor {

using NodeId = std::int32_t;
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Direction { In, Out };

// Message-passing orientation. SourceToTarget: node v pools from u for every edge u->v.
// TargetToSource: node v pools from u for every edge v->u.
enum class Flow { SourceToTarget, TargetToSource };

Flow flipped(Flow flow);
const char* to_string(Flow flow);
Flow flow_from_string(const std::string& name);

struct Edge {
  NodeId src{0};
  NodeId dst{0};
  auto operator<=>(const Edge&) const = default;
};

/// Immutable directed (or undirected) graph with dense node features.
///
/// Edges are kept as a sorted flat list; CSR offsets index both the outgoing and the
/// incoming adjacency. For undirected graphs every edge is stored once and both
/// adjacencies list the full neighbourhood, so in- and out-degree coincide.
class Graph {
 public:
  Graph() = default;

  /// Validates endpoints and feature rows. With `dedup_edges` duplicate edges and
  /// self-loops are dropped; without it they are rejected.
  static Graph build(std::size_t num_nodes, std::vector<Edge> edges, FeatureMatrix features,
                     bool directed = true, bool dedup_edges = true);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  bool directed() const { return directed_; }
  std::span<const Edge> edges() const { return edges_; }

  const FeatureMatrix& features() const { return features_; }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }

  std::span<const NodeId> out_neighbors(NodeId v) const;
  std::span<const NodeId> in_neighbors(NodeId v) const;
  /// Nodes v pools from under `flow`.
  std::span<const NodeId> pooled_neighbors(NodeId v, Flow flow) const;

  std::size_t degree(NodeId v, Direction direction) const;

  /// Neighbours ignoring orientation, deduplicated, sorted.
  std::vector<NodeId> undirected_neighbors(NodeId v) const;

 private:
  void check_node(NodeId v) const;

  std::size_t num_nodes_{0};
  bool directed_{true};
  std::vector<Edge> edges_;
  FeatureMatrix features_;
  std::vector<std::size_t> out_offsets_;
  std::vector<NodeId> out_targets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<NodeId> in_sources_;
};

inline constexpr int kInfiniteDistance = std::numeric_limits<int>::max();

// Hop distances from each source, on the undirected view of the graph.
struct DistanceTable {
  std::vector<NodeId> sources;
  std::vector<std::vector<int>> distances;  // distances[i][v], kInfiniteDistance if > cutoff

  int at(std::size_t source_index, NodeId v) const { return distances[source_index][static_cast<std::size_t>(v)]; }
};

DistanceTable shortest_paths(const Graph& graph, std::span<const NodeId> sources, int cutoff);

/// Distance from every node to the closest member of `set` (multi-source BFS),
/// truncated at `cutoff` hops. Also reports which member is closest.
struct SetDistances {
  std::vector<int> distance;
  std::vector<NodeId> closest;  // -1 when unreachable
};
SetDistances distances_to_set(const Graph& graph, std::span<const NodeId> set, int cutoff);

}  // namespace mentor
