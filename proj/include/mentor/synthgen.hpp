#pragma once

#include "mentor/bundle.hpp"
#include "mentor/graph.hpp"
#include "mentor/teams.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace mentor::synth {

using Rng = std::mt19937_64;

/// Fixed edge pattern over `arity` local slots.
struct Motif {
  int arity{0};
  std::vector<std::pair<int, int>> pattern;
};

// The three built-in patterns share one undirected shape (a 3-leaf star) and differ only
// in orientation, so undirected summary statistics cannot tell them apart.
Motif star_in_motif();     // leaves -> hub
Motif mixed_star_motif();  // two leaves -> hub, hub -> third leaf
Motif star_out_motif();    // hub -> leaves
std::array<Motif, 3> default_motifs();

struct GenParams {
  std::size_t num_nodes = 10000;
  int er_edges_per_node = 1;           // m
  int min_team_size = 5;               // d_min
  double mean_incremental_size = 5.0;  // mu
  double motif_ratio = 0.8;            // r
  int num_classes = 3;                 // C
  double separation = 20.0;            // delta
  bool overlap = false;
  double overlap_fraction = 0.167;     // per-slot chance of drawing an already-assigned node
  double teamless_fraction = 0.0;
  bool power_law_tail = false;         // extra power-law link class merged into the top label
  // contextual & topology
  std::size_t num_teams = 1000;
  double rewire_prob = 0.1;
  int knn = 6;
  int links_per_neighbor = 3;
  double weight_topology = 0.5;
  double weight_contextual = 0.5;
  // contextual (caveman)
  std::size_t num_cliques = 200;
  std::size_t clique_size = 10;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  /// Applies overrides on top of *this; unknown keys throw ValidationError.
  GenParams with_overrides(const nlohmann::json& overrides) const;
  void validate() const;
};

enum class TopologyVariant { T1, T2, T3 };

/// Deduplicating edge accumulator used while a generator mutates its graph.
class EdgeSet {
 public:
  explicit EdgeSet(std::size_t num_nodes) : num_nodes_(num_nodes) {}
  bool insert(NodeId src, NodeId dst);
  bool contains(NodeId src, NodeId dst) const;
  bool erase(NodeId src, NodeId dst);
  std::size_t size() const { return keys_.size(); }
  std::size_t num_nodes() const { return num_nodes_; }
  std::vector<Edge> edges() const;

 private:
  static std::uint64_t key(NodeId s, NodeId d) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s)) << 32) | static_cast<std::uint32_t>(d);
  }
  std::size_t num_nodes_;
  std::unordered_set<std::uint64_t> keys_;
};

/// Each node draws m targets uniformly from the other nodes; edges form a set.
Graph directed_erdos_renyi(std::size_t n, int m, Rng& rng);
void add_erdos_renyi(EdgeSet& edges, int m, Rng& rng);

struct TeamMakerOptions {
  int min_team_size = 5;
  double mean_incremental_size = 5.0;
  bool overlap = false;
  double overlap_fraction = 0.167;
  double teamless_fraction = 0.0;
};

/// Groups of size d_min + Poisson(mu) drawn without replacement. A leftover smaller than
/// d_min is appended to the last group. Labels are all 0 (one class).
TeamSet team_maker(const Graph& graph, const TeamMakerOptions& options, Rng& rng);
std::vector<std::vector<NodeId>> make_groups(std::size_t num_nodes, const TeamMakerOptions& options, Rng& rng);

/// floor(|team| * r) insertions of `motif` on distinct random members. Returns the number of
/// insertions performed.
std::size_t add_motifs(EdgeSet& edges, std::span<const NodeId> members, double ratio, const Motif& motif, Rng& rng);
Graph motif_adder(const Graph& graph, const Team& team, double ratio, const Motif& motif, Rng& rng);

Bundle gen_centrality(const GenParams& params, Direction direction);
Bundle gen_topology(TopologyVariant variant, const GenParams& params);
Bundle gen_contextual(std::size_t num_cliques, std::size_t clique_size);
Bundle gen_contextual_topology(const GenParams& params);
Bundle gen_attribute_toy(const GenParams& params);
/// Small directed instance exercising every code path: overlapping teams, teamless nodes,
/// Gaussian node features, three classes. Used for gradient checks.
Bundle gen_mixed_toy(std::size_t num_nodes, std::uint64_t seed);

// Dataset names: cin, cout, t1, t2, t3, l, lt, attr-toy.
const std::vector<std::string>& dataset_names();
GenParams default_params(const std::string& dataset);
Bundle generate(const std::string& dataset, const GenParams& params);

}  // namespace mentor::synth
