#pragma once

#include "mentor/bundle.hpp"
#include "mentor/diff.hpp"
#include "mentor/graph.hpp"
#include "mentor/preprocess.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mentor {

enum class Channel { Topology = 0, Centrality = 1, Contextual = 2 };
inline constexpr std::array<Channel, 3> kAllChannels{Channel::Topology, Channel::Centrality, Channel::Contextual};
const char* channel_letter(Channel c);

/// Which channels take part in the forward pass. Disabled channels are never computed and
/// are left out of the gate softmax.
struct ChannelMask {
  std::array<bool, 3> on{true, true, true};

  bool operator[](Channel c) const { return on[static_cast<std::size_t>(c)]; }
  std::size_t count() const;
  std::string to_string() const;  // e.g. "T,C,L"
  /// Parses a comma separated subset of T, C, L. Empty or unknown letters throw.
  static ChannelMask parse(const std::string& text);
};

struct ModelConfig {
  int hidden = 64;                 // d
  int gin_layers = 3;              // attention-GIN layers after the GATv2 layer
  int centrality_layers = 3;
  int contextual_layers = 2;
  int contextual_hidden = 16;
  int anchor_c = 1;
  int anchor_cutoff = 256;         // hypergraph hops
  diff::Reduce team_pool = diff::Reduce::Mean;
  diff::Reduce conv_topology = diff::Reduce::Sum;
  diff::Reduce conv_centrality = diff::Reduce::Sum;
  diff::Reduce conv_contextual = diff::Reduce::Mean;  // over anchor sets
  Flow flow_topology = Flow::SourceToTarget;
  Flow flow_centrality = Flow::SourceToTarget;
  double dropout_topology = 0.0;
  double dropout_centrality = 0.0;
  double dropout_classifier = 0.0;
  bool learn_epsilon = true;
  bool scale_hypergraph_weights = true;  // centrality weights divided by the mean weighted degree
  double norm_eps = 1e-12;
  ChannelMask channels;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  void validate() const;
};

/// Index arrays over (target, source) message slots. Every node owns one self slot.
struct MessagePlan {
  std::vector<diff::Index> dst;
  std::vector<diff::Index> src;
  std::vector<double> is_self;
  std::vector<double> weight;  // edge weight (1 when unweighted, 1 for self slots)
  std::size_t num_nodes{0};

  std::size_t size() const { return dst.size(); }
};

/// Message slots of `graph` under `flow`: node v receives from every u it pools from, plus
/// itself. `weights` aligns with graph.edges(); empty means all ones.
MessagePlan build_message_plan(const Graph& graph, Flow flow, std::span<const double> weights = {});

/// Everything the forward pass reads besides the parameters. Built once per dataset/config.
struct ModelInputs {
  std::size_t num_teams{0};
  int num_classes{0};
  std::vector<int> labels;
  std::vector<TeamId> team_ids;

  IsolatedForest forest;
  FeatureMatrix topology_features;     // forest nodes x l, after normalization
  MessagePlan topology_plan;
  std::vector<diff::Index> forest_team;

  WeightedHypergraph hypergraph;
  FeatureMatrix centrality_features;   // hypernodes x 1
  MessagePlan centrality_plan;
  std::vector<diff::Index> team_rows;  // 0 .. num_teams-1

  AnchorSets anchors;
  std::vector<diff::Index> anchor_owner;    // slot -> hypernode (n * s slots, row-major)
  std::vector<diff::Index> anchor_closest;  // slot -> closest member (self when unreachable)
  std::vector<double> anchor_score;

  /// `features` replaces the graph's node features (e.g. after normalization).
  static ModelInputs build(const Bundle& bundle, const ModelConfig& cfg, const FeatureMatrix& features,
                           std::uint64_t anchor_seed);
  void resample_anchors(const ModelConfig& cfg, std::uint64_t seed);
};

template <typename T>
struct ForwardPass {
  diff::Var<T> logits;
  diff::Var<T> fused;
  diff::Var<T> gamma;                     // teams x active channels
  diff::Var<T> alpha;                     // topology slots x 1, invalid when topology is off
  std::array<diff::Var<T>, 3> embedding;  // normalized per channel, invalid when off
};

/// Plain-number snapshot of a forward pass in evaluation mode.
struct ForwardArtifacts {
  FeatureMatrix probabilities;                 // teams x C
  FeatureMatrix gamma;                         // teams x 3, zero columns for disabled channels
  std::vector<double> alpha;                   // per topology slot
  std::array<FeatureMatrix, 3> embeddings;     // normalized channel embeddings
  FeatureMatrix fused;
};

template <typename T>
class Mentor {
 public:
  Mentor(const ModelConfig& cfg, std::size_t feature_dim, int num_classes, std::size_t num_anchor_sets,
         std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  diff::ParameterStore<T>& params() { return params_; }
  const diff::ParameterStore<T>& params() const { return params_; }

  /// Records one forward pass. Dropout is active only when `training` is set.
  ForwardPass<T> forward(diff::Tape<T>& tape, const ModelInputs& in, bool training, std::mt19937_64& rng);
  ForwardArtifacts evaluate(const ModelInputs& in);

  std::size_t feature_dim() const { return feature_dim_; }
  int num_classes() const { return num_classes_; }
  std::size_t num_anchor_sets() const { return num_anchor_sets_; }

 private:
  diff::Var<T> topology(diff::Tape<T>& t, const ModelInputs& in, bool training, std::mt19937_64& rng,
                        diff::Var<T>* alpha);
  diff::Var<T> centrality(diff::Tape<T>& t, const ModelInputs& in, bool training, std::mt19937_64& rng);
  diff::Var<T> contextual(diff::Tape<T>& t, const ModelInputs& in);
  diff::Var<T> gin(diff::Tape<T>& t, diff::Var<T> h, const MessagePlan& plan, diff::Var<T> coeff, diff::Reduce mode,
                   const std::string& prefix);
  diff::Var<T> p(diff::Tape<T>& t, const std::string& name) { return t.param(params_.get(name)); }

  ModelConfig cfg_;
  std::size_t feature_dim_;
  int num_classes_;
  std::size_t num_anchor_sets_;
  diff::ParameterStore<T> params_;
};

/// I_v for every forest node: the attention v receives in the groups of other nodes.
std::vector<double> node_importance(const MessagePlan& plan, std::span<const double> alpha);

/// Softmax rows of a logits matrix.
FeatureMatrix softmax_rows(const FeatureMatrix& logits);

}  // namespace mentor
