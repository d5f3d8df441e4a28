#include "mentor/model.hpp"

#include "mentor/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mentor {

using diff::Index;
using diff::Reduce;
using diff::Var;
using nlohmann::json;

const char* channel_letter(Channel c) {
  switch (c) {
    case Channel::Topology: return "T";
    case Channel::Centrality: return "C";
    case Channel::Contextual: return "L";
  }
  return "?";
}

std::size_t ChannelMask::count() const {
  return static_cast<std::size_t>(std::count(on.begin(), on.end(), true));
}

std::string ChannelMask::to_string() const {
  std::string out;
  for (auto c : kAllChannels) {
    if (!(*this)[c]) continue;
    if (!out.empty()) out += ",";
    out += channel_letter(c);
  }
  return out;
}

ChannelMask ChannelMask::parse(const std::string& text) {
  ChannelMask m;
  m.on = {false, false, false};
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string tok = text.substr(start, end - start);
    tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char ch) { return std::isspace(ch); }), tok.end());
    if (tok == "T") m.on[0] = true;
    else if (tok == "C") m.on[1] = true;
    else if (tok == "L") m.on[2] = true;
    else throw ValidationError("unknown channel '" + tok + "' (expected T, C or L)");
    start = end + 1;
  }
  if (m.count() == 0) throw ValidationError("channel subset is empty");
  return m;
}

json ModelConfig::to_json() const {
  return {
      {"hidden", hidden},
      {"gin_layers", gin_layers},
      {"centrality_layers", centrality_layers},
      {"contextual_layers", contextual_layers},
      {"contextual_hidden", contextual_hidden},
      {"anchor_c", anchor_c},
      {"anchor_cutoff", anchor_cutoff},
      {"team_pool", diff::to_string(team_pool)},
      {"conv_topology", diff::to_string(conv_topology)},
      {"conv_centrality", diff::to_string(conv_centrality)},
      {"conv_contextual", diff::to_string(conv_contextual)},
      {"flow_topology", mentor::to_string(flow_topology)},
      {"flow_centrality", mentor::to_string(flow_centrality)},
      {"dropout_topology", dropout_topology},
      {"dropout_centrality", dropout_centrality},
      {"dropout_classifier", dropout_classifier},
      {"learn_epsilon", learn_epsilon},
      {"scale_hypergraph_weights", scale_hypergraph_weights},
      {"norm_eps", norm_eps},
      {"channels", channels.to_string()},
  };
}

ModelConfig ModelConfig::from_json(const json& j) {
  ModelConfig c;
  if (!j.is_object()) throw ValidationError("model config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "hidden") c.hidden = v.get<int>();
    else if (key == "gin_layers") c.gin_layers = v.get<int>();
    else if (key == "centrality_layers") c.centrality_layers = v.get<int>();
    else if (key == "contextual_layers") c.contextual_layers = v.get<int>();
    else if (key == "contextual_hidden") c.contextual_hidden = v.get<int>();
    else if (key == "anchor_c") c.anchor_c = v.get<int>();
    else if (key == "anchor_cutoff") c.anchor_cutoff = v.get<int>();
    else if (key == "team_pool") c.team_pool = diff::reduce_from_string(v.get<std::string>());
    else if (key == "conv_topology") c.conv_topology = diff::reduce_from_string(v.get<std::string>());
    else if (key == "conv_centrality") c.conv_centrality = diff::reduce_from_string(v.get<std::string>());
    else if (key == "conv_contextual") c.conv_contextual = diff::reduce_from_string(v.get<std::string>());
    else if (key == "flow_topology") c.flow_topology = flow_from_string(v.get<std::string>());
    else if (key == "flow_centrality") c.flow_centrality = flow_from_string(v.get<std::string>());
    else if (key == "dropout_topology") c.dropout_topology = v.get<double>();
    else if (key == "dropout_centrality") c.dropout_centrality = v.get<double>();
    else if (key == "dropout_classifier") c.dropout_classifier = v.get<double>();
    else if (key == "learn_epsilon") c.learn_epsilon = v.get<bool>();
    else if (key == "scale_hypergraph_weights") c.scale_hypergraph_weights = v.get<bool>();
    else if (key == "norm_eps") c.norm_eps = v.get<double>();
    else if (key == "channels") c.channels = ChannelMask::parse(v.get<std::string>());
    else throw ValidationError("unknown model config key '" + key + "'");
  }
  c.validate();
  return c;
}

void ModelConfig::validate() const {
  if (hidden < 1 || contextual_hidden < 1) throw ValidationError("hidden widths must be >= 1");
  if (gin_layers < 1 || centrality_layers < 1 || contextual_layers < 1) throw ValidationError("layer counts must be >= 1");
  if (anchor_c < 1) throw ValidationError("anchor_c must be >= 1");
  if (anchor_cutoff < 1) throw ValidationError("anchor_cutoff must be >= 1");
  for (double p : {dropout_topology, dropout_centrality, dropout_classifier}) {
    if (!(p >= 0.0 && p < 1.0)) throw ValidationError("dropout must be in [0,1)");
  }
  if (!(norm_eps > 0.0)) throw ValidationError("norm_eps must be positive");
  if (channels.count() == 0) throw ValidationError("at least one channel must be enabled");
}

// ---------------------------------------------------------------------------------------

MessagePlan build_message_plan(const Graph& graph, Flow flow, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != graph.num_edges()) throw ValidationError("edge weights do not match edge count");
  const auto edges = graph.edges();
  auto weight_of = [&](NodeId src, NodeId dst) {
    if (weights.empty()) return 1.0;
    if (!graph.directed() && src > dst) std::swap(src, dst);
    auto it = std::lower_bound(edges.begin(), edges.end(), Edge{src, dst});
    return weights[static_cast<std::size_t>(it - edges.begin())];
  };
  MessagePlan plan;
  plan.num_nodes = graph.num_nodes();
  for (NodeId v = 0; v < static_cast<NodeId>(graph.num_nodes()); ++v) {
    plan.dst.push_back(v);
    plan.src.push_back(v);
    plan.is_self.push_back(1.0);
    plan.weight.push_back(1.0);
    for (NodeId u : graph.pooled_neighbors(v, flow)) {
      plan.dst.push_back(v);
      plan.src.push_back(u);
      plan.is_self.push_back(0.0);
      // v pools from u: the edge is u->v under source_to_target, v->u otherwise
      plan.weight.push_back(flow == Flow::SourceToTarget ? weight_of(u, v) : weight_of(v, u));
    }
  }
  return plan;
}

ModelInputs ModelInputs::build(const Bundle& bundle, const ModelConfig& cfg, const FeatureMatrix& features,
                               std::uint64_t anchor_seed) {
  const auto& graph = bundle.graph;
  if (static_cast<std::size_t>(features.rows()) != graph.num_nodes()) throw ValidationError("feature rows do not match node count");
  if (bundle.teams.size() == 0) throw ValidationError("bundle has no teams");
  ModelInputs in;
  in.num_teams = bundle.teams.size();
  in.num_classes = bundle.teams.num_classes();
  in.labels = bundle.teams.labels();
  for (const auto& t : bundle.teams.teams()) in.team_ids.push_back(t.id);

  in.forest = isolate_teams(graph, bundle.teams);
  in.topology_features.resize(static_cast<Eigen::Index>(in.forest.original.size()), features.cols());
  for (std::size_t i = 0; i < in.forest.original.size(); ++i) {
    in.topology_features.row(static_cast<Eigen::Index>(i)) = features.row(in.forest.original[i]);
  }
  in.topology_plan = build_message_plan(in.forest.graph, cfg.flow_topology);
  in.forest_team.assign(in.forest.team_of.begin(), in.forest.team_of.end());

  in.hypergraph = collapse_hypergraph(graph, bundle.teams);
  in.centrality_features = in.hypergraph.graph.features();
  double mean_size = 0.0;
  for (std::size_t t = 0; t < in.num_teams; ++t) mean_size += in.centrality_features(static_cast<Eigen::Index>(t), 0);
  mean_size /= static_cast<double>(in.num_teams);
  if (mean_size > 0.0) in.centrality_features /= mean_size;
  std::vector<double> weights = in.hypergraph.weights;
  if (cfg.scale_hypergraph_weights && !weights.empty()) {
    // divide by the mean weighted degree so stacked sum layers stay O(1)
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    const double mean_degree = total / static_cast<double>(in.hypergraph.graph.num_nodes());
    if (mean_degree > 0.0) {
      for (auto& w : weights) w /= mean_degree;
    }
  }
  in.centrality_plan = build_message_plan(in.hypergraph.graph, cfg.flow_centrality, weights);
  in.team_rows.resize(in.num_teams);
  std::iota(in.team_rows.begin(), in.team_rows.end(), 0);

  in.resample_anchors(cfg, anchor_seed);
  return in;
}

void ModelInputs::resample_anchors(const ModelConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  anchors = sample_anchor_sets(hypergraph.graph, cfg.anchor_c, cfg.anchor_cutoff, rng);
  const std::size_t n = anchors.num_nodes;
  const std::size_t s = anchors.num_sets();
  anchor_owner.resize(n * s);
  anchor_closest.resize(n * s);
  anchor_score.resize(n * s);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < s; ++i) {
      const auto slot = v * s + i;
      const NodeId a = anchors.closest_member(static_cast<NodeId>(v), i);
      anchor_owner[slot] = static_cast<Index>(v);
      anchor_closest[slot] = a < 0 ? static_cast<Index>(v) : a;
      anchor_score[slot] = anchors.score(static_cast<NodeId>(v), i);
    }
  }
}

// ---------------------------------------------------------------------------------------

namespace {

template <typename T>
diff::Mat<T> glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-bound, bound);
  diff::Mat<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(u(rng));
  return m;
}

// default for dense layers: weights and biases uniform in +-1/sqrt(fan_in)
template <typename T>
diff::Mat<T> fan_in_uniform(Eigen::Index fan_in, Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  diff::Mat<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(u(rng));
  return m;
}

template <typename T>
void add_linear(diff::ParameterStore<T>& ps, const std::string& w, const std::string& b, Eigen::Index in,
                Eigen::Index out, std::mt19937_64& rng) {
  ps.add(w, fan_in_uniform<T>(in, in, out, rng));
  ps.add(b, fan_in_uniform<T>(in, 1, out, rng));
}

template <typename T>
diff::Mat<T> zeros(Eigen::Index rows, Eigen::Index cols) {
  return diff::Mat<T>::Zero(rows, cols);
}

template <typename T>
diff::Mat<T> column_of(std::span<const double> values) {
  diff::Mat<T> m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = static_cast<T>(values[i]);
  return m;
}

template <typename T>
void add_mlp(diff::ParameterStore<T>& ps, const std::string& prefix, Eigen::Index in, Eigen::Index hidden,
             Eigen::Index out, std::mt19937_64& rng) {
  add_linear(ps, prefix + ".W1", prefix + ".b1", in, hidden, rng);
  add_linear(ps, prefix + ".W2", prefix + ".b2", hidden, out, rng);
}

}  // namespace

template <typename T>
Mentor<T>::Mentor(const ModelConfig& cfg, std::size_t feature_dim, int num_classes, std::size_t num_anchor_sets,
                  std::uint64_t seed)
    : cfg_(cfg), feature_dim_(feature_dim), num_classes_(num_classes), num_anchor_sets_(num_anchor_sets) {
  cfg_.validate();
  if (feature_dim == 0) throw ValidationError("feature dimension must be >= 1");
  if (num_classes < 2) throw ValidationError("need at least 2 classes");
  if (num_anchor_sets == 0) throw ValidationError("need at least one anchor set");
  std::mt19937_64 rng(seed);
  const Eigen::Index d = cfg_.hidden;
  const auto l = static_cast<Eigen::Index>(feature_dim);

  params_.add("topo.W", glorot<T>(l, d, rng));
  params_.add("topo.Wt", glorot<T>(l, d, rng));
  params_.add("topo.a", glorot<T>(d, 1, rng));
  params_.add("topo.b", zeros<T>(1, d));
  for (int k = 0; k < cfg_.gin_layers; ++k) {
    const auto prefix = "topo.gin" + std::to_string(k);
    params_.add(prefix + ".eps", zeros<T>(1, 1));
    add_mlp(params_, prefix, d, d, d, rng);
  }
  for (int k = 0; k < cfg_.centrality_layers; ++k) {
    const auto prefix = "cent.gin" + std::to_string(k);
    params_.add(prefix + ".eps", zeros<T>(1, 1));
    add_mlp(params_, prefix, k == 0 ? 1 : d, d, d, rng);
  }
  const Eigen::Index hc = cfg_.contextual_hidden;
  for (int k = 0; k < cfg_.contextual_layers; ++k) {
    const auto prefix = "ctx.layer" + std::to_string(k);
    const Eigen::Index in = k == 0 ? 1 : hc;
    params_.add(prefix + ".P", fan_in_uniform<T>(in, in, hc, rng));
    params_.add(prefix + ".Q", fan_in_uniform<T>(in, in, hc, rng));
    params_.add(prefix + ".b", fan_in_uniform<T>(in, 1, hc, rng));
    add_linear(params_, prefix + ".w", prefix + ".c", hc, 1, rng);
  }
  const auto s = static_cast<Eigen::Index>(num_anchor_sets);
  add_linear(params_, "ctx.proj.W", "ctx.proj.b", s, d, rng);
  add_mlp(params_, "gate", d, d, 1, rng);
  add_linear(params_, "head.W", "head.b", d, static_cast<Eigen::Index>(num_classes), rng);
}

template <typename T>
Var<T> Mentor<T>::gin(diff::Tape<T>& t, Var<T> h, const MessagePlan& plan, Var<T> coeff, Reduce mode,
                      const std::string& prefix) {
  auto& eps_param = params_.get(prefix + ".eps");
  Var<T> eps = cfg_.learn_epsilon ? t.param(eps_param) : t.constant(eps_param.value);
  Var<T> self = t.constant(column_of<T>(plan.is_self));
  Var<T> scale = t.add_constant(t.scale_by(self, eps), T(1));
  Var<T> c = t.mul_rows(coeff, scale);
  Var<T> msg = t.mul_rows(t.gather_rows(h, plan.src), c);
  Var<T> agg = t.segment_reduce(msg, plan.dst, static_cast<Index>(plan.num_nodes), mode);
  Var<T> hidden = t.relu(t.linear(agg, p(t, prefix + ".W1"), p(t, prefix + ".b1")));
  return t.linear(hidden, p(t, prefix + ".W2"), p(t, prefix + ".b2"));
}

template <typename T>
Var<T> Mentor<T>::topology(diff::Tape<T>& t, const ModelInputs& in, bool training, std::mt19937_64& rng,
                           Var<T>* alpha_out) {
  const auto& plan = in.topology_plan;
  const auto n = static_cast<Index>(plan.num_nodes);
  Var<T> x = t.constant(in.topology_features.template cast<T>());
  Var<T> xw = t.matmul(x, p(t, "topo.W"));
  Var<T> xwt = t.matmul(x, p(t, "topo.Wt"));
  Var<T> pre = t.add(t.gather_rows(xw, plan.dst), t.gather_rows(xwt, plan.src));
  Var<T> score = t.matmul(t.leaky_relu(pre, T(0.2)), p(t, "topo.a"));
  Var<T> alpha = t.softmax_over_groups(score, plan.dst, n);
  *alpha_out = alpha;
  Var<T> h = t.segment_reduce(t.mul_rows(t.gather_rows(xw, plan.src), alpha), plan.dst, n, Reduce::Sum);
  h = t.add_row(h, p(t, "topo.b"));
  for (int k = 0; k < cfg_.gin_layers; ++k) {
    h = t.relu(h);
    if (training) h = t.dropout(h, cfg_.dropout_topology, rng);
    h = gin(t, h, plan, alpha, cfg_.conv_topology, "topo.gin" + std::to_string(k));
  }
  return t.segment_reduce(h, in.forest_team, static_cast<Index>(in.num_teams), cfg_.team_pool);
}

template <typename T>
Var<T> Mentor<T>::centrality(diff::Tape<T>& t, const ModelInputs& in, bool training, std::mt19937_64& rng) {
  const auto& plan = in.centrality_plan;
  Var<T> w = t.constant(column_of<T>(plan.weight));
  Var<T> h = t.constant(in.centrality_features.template cast<T>());
  for (int k = 0; k < cfg_.centrality_layers; ++k) {
    if (k > 0) {
      h = t.relu(h);
      if (training) h = t.dropout(h, cfg_.dropout_centrality, rng);
    }
    h = gin(t, h, plan, w, cfg_.conv_centrality, "cent.gin" + std::to_string(k));
  }
  return t.gather_rows(h, in.team_rows);
}

template <typename T>
Var<T> Mentor<T>::contextual(diff::Tape<T>& t, const ModelInputs& in) {
  const auto n = static_cast<Eigen::Index>(in.anchors.num_nodes);
  const auto s = static_cast<Eigen::Index>(in.anchors.num_sets());
  if (static_cast<std::size_t>(s) != num_anchor_sets_) throw ValidationError("anchor set count does not match the model");
  Var<T> score = t.constant(column_of<T>(in.anchor_score));
  Var<T> h = t.constant(diff::Mat<T>::Ones(n, 1));
  Var<T> pos;
  for (int k = 0; k < cfg_.contextual_layers; ++k) {
    const auto prefix = "ctx.layer" + std::to_string(k);
    Var<T> pa = t.gather_rows(t.matmul(h, p(t, prefix + ".P")), in.anchor_closest);
    Var<T> qv = t.gather_rows(t.matmul(h, p(t, prefix + ".Q")), in.anchor_owner);
    Var<T> m = t.relu(t.add_row(t.mul_rows(t.add(pa, qv), score), p(t, prefix + ".b")));
    pos = t.reshape(t.linear(m, p(t, prefix + ".w"), p(t, prefix + ".c")), n, s);
    h = t.segment_reduce(m, in.anchor_owner, static_cast<Index>(n), cfg_.conv_contextual);
  }
  Var<T> z = t.linear(pos, p(t, "ctx.proj.W"), p(t, "ctx.proj.b"));
  return t.gather_rows(z, in.team_rows);
}

template <typename T>
ForwardPass<T> Mentor<T>::forward(diff::Tape<T>& t, const ModelInputs& in, bool training, std::mt19937_64& rng) {
  ForwardPass<T> out;
  // separate dropout streams so a channel's randomness does not depend on the others
  std::array<std::mt19937_64, 3> streams{std::mt19937_64(rng()), std::mt19937_64(rng()), std::mt19937_64(rng())};
  std::mt19937_64 head_rng(rng());

  std::vector<Var<T>> normalized;
  for (auto c : kAllChannels) {
    if (!cfg_.channels[c]) continue;
    auto& r = streams[static_cast<std::size_t>(c)];
    Var<T> z;
    switch (c) {
      case Channel::Topology: z = topology(t, in, training, r, &out.alpha); break;
      case Channel::Centrality: z = centrality(t, in, training, r); break;
      case Channel::Contextual: z = contextual(t, in); break;
    }
    z = t.l2_norm_clamp(z, static_cast<T>(cfg_.norm_eps));
    out.embedding[static_cast<std::size_t>(c)] = z;
    normalized.push_back(z);
  }

  Var<T> scores;
  for (std::size_t j = 0; j < normalized.size(); ++j) {
    Var<T> hidden = t.relu(t.linear(normalized[j], p(t, "gate.W1"), p(t, "gate.b1")));
    Var<T> sj = t.linear(hidden, p(t, "gate.W2"), p(t, "gate.b2"));
    scores = j == 0 ? sj : t.concat_cols(scores, sj);
  }
  out.gamma = t.softmax_rows(scores);
  Var<T> fused;
  Var<T> skip;
  for (std::size_t j = 0; j < normalized.size(); ++j) {
    Var<T> weighted = t.mul_rows(normalized[j], t.column(out.gamma, static_cast<Eigen::Index>(j)));
    fused = j == 0 ? weighted : t.add(fused, weighted);
    skip = j == 0 ? normalized[j] : t.add(skip, normalized[j]);
  }
  out.fused = t.add(fused, t.scale(skip, T(1) / static_cast<T>(normalized.size())));
  Var<T> head_in = training ? t.dropout(out.fused, cfg_.dropout_classifier, head_rng) : out.fused;
  out.logits = t.linear(head_in, p(t, "head.W"), p(t, "head.b"));
  return out;
}

template <typename T>
ForwardArtifacts Mentor<T>::evaluate(const ModelInputs& in) {
  diff::Tape<T> tape(false);
  std::mt19937_64 rng(0);
  auto fp = forward(tape, in, false, rng);
  ForwardArtifacts art;
  art.probabilities = softmax_rows(fp.logits.value().template cast<double>());
  art.fused = fp.fused.value().template cast<double>();
  art.gamma = FeatureMatrix::Zero(static_cast<Eigen::Index>(in.num_teams), 3);
  Eigen::Index j = 0;
  for (auto c : kAllChannels) {
    const auto ci = static_cast<std::size_t>(c);
    if (!cfg_.channels[c]) continue;
    art.gamma.col(static_cast<Eigen::Index>(ci)) = fp.gamma.value().col(j++).template cast<double>();
    art.embeddings[ci] = fp.embedding[ci].value().template cast<double>();
  }
  if (cfg_.channels[Channel::Topology]) {
    const auto& a = fp.alpha.value();
    art.alpha.assign(static_cast<std::size_t>(a.rows()), 0.0);
    for (Eigen::Index i = 0; i < a.rows(); ++i) art.alpha[static_cast<std::size_t>(i)] = static_cast<double>(a(i, 0));
  }
  return art;
}

template class Mentor<float>;
template class Mentor<double>;

std::vector<double> node_importance(const MessagePlan& plan, std::span<const double> alpha) {
  if (alpha.size() != plan.size()) throw ValidationError("attention vector does not match the message plan");
  std::vector<double> importance(plan.num_nodes, 0.0);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan.is_self[i] != 0.0) continue;
    importance[static_cast<std::size_t>(plan.src[i])] += alpha[i];
  }
  return importance;
}

FeatureMatrix softmax_rows(const FeatureMatrix& logits) {
  FeatureMatrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    out.row(r) = (logits.row(r).array() - logits.row(r).maxCoeff()).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

}  // namespace mentor
