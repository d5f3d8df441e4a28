#include "mentor/synthgen.hpp"

#include "mentor/error.hpp"
#include "mentor/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace mentor::synth {

using nlohmann::json;

Motif star_in_motif() { return {4, {{1, 0}, {2, 0}, {3, 0}}}; }
Motif mixed_star_motif() { return {4, {{1, 0}, {2, 0}, {0, 3}}}; }
Motif star_out_motif() { return {4, {{0, 1}, {0, 2}, {0, 3}}}; }
std::array<Motif, 3> default_motifs() { return {star_in_motif(), mixed_star_motif(), star_out_motif()}; }

// ---------------------------------------------------------------------------------------
// GenParams

#define MENTOR_GEN_FIELDS(X)  \
  X(num_nodes)                \
  X(er_edges_per_node)        \
  X(min_team_size)            \
  X(mean_incremental_size)    \
  X(motif_ratio)              \
  X(num_classes)              \
  X(separation)               \
  X(overlap)                  \
  X(overlap_fraction)         \
  X(teamless_fraction)        \
  X(power_law_tail)           \
  X(num_teams)                \
  X(rewire_prob)              \
  X(knn)                      \
  X(links_per_neighbor)       \
  X(weight_topology)          \
  X(weight_contextual)        \
  X(num_cliques)              \
  X(clique_size)              \
  X(seed)

json GenParams::to_json() const {
  json j = json::object();
#define X(name) j[#name] = name;
  MENTOR_GEN_FIELDS(X)
#undef X
  return j;
}

GenParams GenParams::with_overrides(const json& overrides) const {
  GenParams out = *this;
  for (const auto& [key, value] : overrides.items()) {
    bool known = false;
    try {
#define X(name)                                   \
  if (key == #name) {                             \
    out.name = value.get<decltype(out.name)>();   \
    known = true;                                 \
  }
      MENTOR_GEN_FIELDS(X)
#undef X
    } catch (const json::exception& e) {
      throw ValidationError("bad value for generator param '" + key + "': " + e.what());
    }
    if (!known) throw ValidationError("unknown generator param '" + key + "'");
  }
  return out;
}

#undef MENTOR_GEN_FIELDS

void GenParams::validate() const {
  if (min_team_size < 1) throw ValidationError("min_team_size must be >= 1");
  if (!(motif_ratio > 0 && motif_ratio <= 1)) throw ValidationError("motif_ratio must be in (0,1]");
  if (!(separation > 0)) throw ValidationError("separation must be > 0");
  if (num_classes < 2) throw ValidationError("num_classes must be >= 2");
  if (mean_incremental_size < 0) throw ValidationError("mean_incremental_size must be >= 0");
  if (!(teamless_fraction >= 0 && teamless_fraction < 1)) throw ValidationError("teamless_fraction must be in [0,1)");
  if (!(overlap_fraction >= 0 && overlap_fraction < 1)) throw ValidationError("overlap_fraction must be in [0,1)");
  if (er_edges_per_node < 0) throw ValidationError("er_edges_per_node must be >= 0");
}

// ---------------------------------------------------------------------------------------
// EdgeSet

bool EdgeSet::insert(NodeId src, NodeId dst) { return keys_.insert(key(src, dst)).second; }
bool EdgeSet::contains(NodeId src, NodeId dst) const { return keys_.count(key(src, dst)) > 0; }
bool EdgeSet::erase(NodeId src, NodeId dst) { return keys_.erase(key(src, dst)) > 0; }

std::vector<Edge> EdgeSet::edges() const {
  std::vector<Edge> out;
  out.reserve(keys_.size());
  for (auto k : keys_) out.push_back({static_cast<NodeId>(k >> 32), static_cast<NodeId>(k & 0xffffffffu)});
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

int poisson(Rng& rng, double mean) {
  if (mean <= 0) return 0;
  return std::poisson_distribution<int>(mean)(rng);
}

std::vector<NodeId> sample_distinct(std::span<const NodeId> pool, std::size_t k, Rng& rng) {
  std::vector<NodeId> copy(pool.begin(), pool.end());
  for (std::size_t i = 0; i < k; ++i) std::swap(copy[i], copy[i + uniform_index(rng, copy.size() - i)]);
  copy.resize(k);
  return copy;
}

// Draws k distinct nodes of [0, n) outside `excluded` by rejection; k is capped at the
// number of eligible nodes.
std::vector<NodeId> sample_outside(std::size_t n, std::span<const NodeId> excluded, std::size_t k, Rng& rng) {
  std::unordered_set<NodeId> banned(excluded.begin(), excluded.end());
  k = std::min(k, n - banned.size());
  std::vector<NodeId> out;
  out.reserve(k);
  if (k * 2 > n - banned.size()) {
    std::vector<NodeId> pool;
    for (std::size_t v = 0; v < n; ++v) {
      if (!banned.count(static_cast<NodeId>(v))) pool.push_back(static_cast<NodeId>(v));
    }
    return sample_distinct(pool, k, rng);
  }
  while (out.size() < k) {
    auto v = static_cast<NodeId>(uniform_index(rng, n));
    if (banned.insert(v).second) out.push_back(v);
  }
  return out;
}

FeatureMatrix constant_features(std::size_t n) { return FeatureMatrix::Ones(static_cast<Eigen::Index>(n), 1); }

Graph to_graph(const EdgeSet& edges, FeatureMatrix features, bool directed = true) {
  return Graph::build(edges.num_nodes(), edges.edges(), std::move(features), directed, true);
}

EdgeSet to_edge_set(const Graph& graph) {
  EdgeSet set(graph.num_nodes());
  for (const auto& e : graph.edges()) set.insert(e.src, e.dst);
  return set;
}

TeamMakerOptions team_options(const GenParams& p) {
  return {p.min_team_size, p.mean_incremental_size, p.overlap, p.overlap_fraction, p.teamless_fraction};
}

json make_meta(const std::string& generator, const GenParams& params) {
  return {{"generator", generator}, {"seed", params.seed}, {"params", params.to_json()}};
}

// Discrete power law P(x) ~ x^-alpha for x >= x_min (continuous inverse CDF, rounded).
std::size_t discrete_power_law(Rng& rng, double x_min, double alpha) {
  const double u = uniform01(rng);
  const double x = (x_min - 0.5) * std::pow(1.0 - u, -1.0 / (alpha - 1.0)) + 0.5;
  return static_cast<std::size_t>(std::floor(std::min(x, 1e9)));
}

// Wires `count` external links to one random member of the team.
void inject_links(EdgeSet& edges, std::span<const NodeId> members, std::size_t count, Direction direction, Rng& rng) {
  const NodeId v = members[uniform_index(rng, members.size())];
  auto others = sample_outside(edges.num_nodes(), members, count, rng);
  for (NodeId u : others) {
    if (direction == Direction::In) {
      edges.insert(u, v);
    } else {
      edges.insert(v, u);
    }
  }
}

std::size_t normal_count(Rng& rng, double center) {
  const double x = std::normal_distribution<double>(center, 1.0)(rng);
  return static_cast<std::size_t>(std::max<long>(0, std::lround(x)));
}

std::vector<Team> to_teams(const std::vector<std::vector<NodeId>>& groups, const std::vector<int>& labels) {
  std::vector<Team> teams;
  teams.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    teams.push_back({static_cast<TeamId>(i), groups[i], labels.empty() ? 0 : labels[i]});
  }
  return teams;
}

}  // namespace

// ---------------------------------------------------------------------------------------
// Shared building blocks

void add_erdos_renyi(EdgeSet& edges, int m, Rng& rng) {
  const std::size_t n = edges.num_nodes();
  if (n < 2) throw ValidationError("Erdos-Renyi needs at least 2 nodes");
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      std::size_t t = uniform_index(rng, n - 1);
      if (t >= i) ++t;
      edges.insert(static_cast<NodeId>(i), static_cast<NodeId>(t));
    }
  }
}

Graph directed_erdos_renyi(std::size_t n, int m, Rng& rng) {
  if (n < 2) throw ValidationError("Erdos-Renyi needs at least 2 nodes");
  if (m < 1) throw ValidationError("Erdos-Renyi needs m >= 1");
  EdgeSet edges(n);
  add_erdos_renyi(edges, m, rng);
  return to_graph(edges, constant_features(n));
}

std::vector<std::vector<NodeId>> make_groups(std::size_t num_nodes, const TeamMakerOptions& o, Rng& rng) {
  if (o.min_team_size < 1) throw ValidationError("min_team_size must be >= 1");
  if (!(o.teamless_fraction >= 0 && o.teamless_fraction < 1)) throw ValidationError("teamless_fraction must be in [0,1)");
  std::vector<NodeId> order(num_nodes);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto teamless = static_cast<std::size_t>(std::llround(o.teamless_fraction * static_cast<double>(num_nodes)));
  std::vector<NodeId> available(order.begin() + static_cast<std::ptrdiff_t>(teamless), order.end());
  if (available.size() < static_cast<std::size_t>(o.min_team_size)) {
    throw ValidationError("graph has fewer available nodes than min_team_size");
  }

  std::vector<std::vector<NodeId>> groups;
  std::vector<NodeId> assigned;
  std::vector<char> is_assigned(num_nodes, 0);
  std::size_t next = 0;
  const auto d_min = static_cast<std::size_t>(o.min_team_size);
  while (next < available.size()) {
    const std::size_t target = d_min + static_cast<std::size_t>(poisson(rng, o.mean_incremental_size));
    std::vector<NodeId> group;
    for (std::size_t j = 0; j < target; ++j) {
      if (o.overlap && !assigned.empty() && uniform01(rng) < o.overlap_fraction) {
        // Reuse a member of an earlier team; give up after a few collisions.
        bool placed = false;
        for (int attempt = 0; attempt < 8 && !placed; ++attempt) {
          NodeId v = assigned[uniform_index(rng, assigned.size())];
          if (std::find(group.begin(), group.end(), v) == group.end()) {
            group.push_back(v);
            placed = true;
          }
        }
        if (placed) continue;
      }
      if (next >= available.size()) break;
      group.push_back(available[next++]);
    }
    if (available.size() - next < d_min) {
      while (next < available.size()) group.push_back(available[next++]);
    }
    // Fresh nodes only; overlap draws are already in `assigned`.
    for (NodeId v : group) {
      if (!is_assigned[static_cast<std::size_t>(v)]) {
        is_assigned[static_cast<std::size_t>(v)] = 1;
        assigned.push_back(v);
      }
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

TeamSet team_maker(const Graph& graph, const TeamMakerOptions& options, Rng& rng) {
  return TeamSet(to_teams(make_groups(graph.num_nodes(), options, rng), {}), 1);
}

std::size_t add_motifs(EdgeSet& edges, std::span<const NodeId> members, double ratio, const Motif& motif, Rng& rng) {
  if (members.size() < static_cast<std::size_t>(motif.arity)) {
    throw ValidationError("team of size " + std::to_string(members.size()) + " is smaller than motif arity " +
                          std::to_string(motif.arity));
  }
  const auto reps = static_cast<std::size_t>(std::floor(static_cast<double>(members.size()) * ratio));
  for (std::size_t rep = 0; rep < reps; ++rep) {
    auto slots = sample_distinct(members, static_cast<std::size_t>(motif.arity), rng);
    for (auto [a, b] : motif.pattern) edges.insert(slots[static_cast<std::size_t>(a)], slots[static_cast<std::size_t>(b)]);
  }
  return reps;
}

Graph motif_adder(const Graph& graph, const Team& team, double ratio, const Motif& motif, Rng& rng) {
  auto edges = to_edge_set(graph);
  add_motifs(edges, team.members, ratio, motif, rng);
  return Graph::build(graph.num_nodes(), edges.edges(), graph.features(), graph.directed(), true);
}

// ---------------------------------------------------------------------------------------
// Generators

Bundle gen_centrality(const GenParams& params, Direction direction) {
  params.validate();
  Rng rng(params.seed);
  EdgeSet edges(params.num_nodes);
  add_erdos_renyi(edges, params.er_edges_per_node, rng);
  auto groups = make_groups(params.num_nodes, team_options(params), rng);

  const auto motif = default_motifs()[1];
  for (const auto& g : groups) add_motifs(edges, g, params.motif_ratio, motif, rng);

  const int C = params.num_classes;
  std::vector<double> centers;
  for (int j = 0; j < C; ++j) centers.push_back(params.separation * (j + 1));
  const int top = params.power_law_tail ? C : C - 1;
  std::vector<int> labels;
  for (const auto& g : groups) {
    const int j = std::uniform_int_distribution<int>(0, top)(rng);
    std::size_t n_links = 0;
    if (j < C) {
      n_links = normal_count(rng, centers[static_cast<std::size_t>(j)]);
    } else {
      // Mean of the alpha = 3 law is about 2 x_min; anchor it one separation above the top center.
      n_links = discrete_power_law(rng, (centers.back() + params.separation) / 2.0, 3.0);
    }
    inject_links(edges, g, n_links, direction, rng);
    labels.push_back(std::min(j, C - 1));
  }

  Bundle b;
  b.graph = to_graph(edges, constant_features(params.num_nodes));
  b.teams = TeamSet(to_teams(groups, labels), C);
  b.meta = make_meta(direction == Direction::In ? "cin" : "cout", params);
  b.meta["params"]["direction"] = direction == Direction::In ? "in" : "out";
  return b;
}

Bundle gen_topology(TopologyVariant variant, const GenParams& params_in) {
  GenParams params = params_in;
  if (variant == TopologyVariant::T3) params.overlap = true;
  params.validate();
  Rng rng(params.seed);
  EdgeSet edges(params.num_nodes);
  add_erdos_renyi(edges, params.er_edges_per_node, rng);
  auto groups = make_groups(params.num_nodes, team_options(params), rng);

  const auto motifs = default_motifs();
  std::vector<int> labels;
  for (const auto& g : groups) {
    const int j = std::uniform_int_distribution<int>(0, 2)(rng);
    add_motifs(edges, g, params.motif_ratio, motifs[static_cast<std::size_t>(j)], rng);
    labels.push_back(j);
  }
  if (variant == TopologyVariant::T2) {
    // Class-independent link injection: the centrality wiring without its label signal.
    for (const auto& g : groups) inject_links(edges, g, normal_count(rng, params.separation), Direction::In, rng);
  }

  const char* names[] = {"t1", "t2", "t3"};
  Bundle b;
  b.graph = to_graph(edges, constant_features(params.num_nodes));
  b.teams = TeamSet(to_teams(groups, labels), 3);
  b.meta = make_meta(names[static_cast<int>(variant)], params);
  return b;
}

Bundle gen_contextual(std::size_t num_cliques, std::size_t clique_size) {
  if (num_cliques < 3) throw ValidationError("contextual dataset needs at least 3 cliques");
  if (clique_size < 2) throw ValidationError("clique_size must be >= 2");
  const std::size_t n = num_cliques * clique_size;
  std::vector<Edge> edges;
  std::vector<Team> teams;
  for (std::size_t c = 0; c < num_cliques; ++c) {
    const auto start = static_cast<NodeId>(c * clique_size);
    Team team{static_cast<TeamId>(c), {}, static_cast<int>(3 * c / num_cliques)};
    for (std::size_t a = 0; a < clique_size; ++a) {
      team.members.push_back(start + static_cast<NodeId>(a));
      for (std::size_t b2 = a + 1; b2 < clique_size; ++b2) {
        if (a == 0 && b2 == 1) continue;  // rewired below
        edges.push_back({start + static_cast<NodeId>(a), start + static_cast<NodeId>(b2)});
      }
    }
    // Bridge to the last node of the previous clique, closing the ring.
    const auto prev_last = static_cast<NodeId>((static_cast<std::size_t>(start) + n - 1) % n);
    edges.push_back({start, prev_last});
    teams.push_back(std::move(team));
  }
  GenParams params;
  params.num_cliques = num_cliques;
  params.clique_size = clique_size;
  params.num_nodes = n;
  Bundle b;
  b.graph = Graph::build(n, std::move(edges), constant_features(n), false, true);
  b.teams = TeamSet(std::move(teams), 3);
  b.meta = make_meta("l", params);
  return b;
}

Bundle gen_contextual_topology(const GenParams& params) {
  params.validate();
  if (params.num_teams < 3) throw ValidationError("need at least 3 teams");
  Rng rng(params.seed);
  const std::size_t T = params.num_teams;
  std::vector<std::vector<NodeId>> groups(T);
  std::size_t n = 0;
  for (auto& g : groups) {
    const auto size = static_cast<std::size_t>(params.min_team_size) +
                      static_cast<std::size_t>(poisson(rng, params.mean_incremental_size));
    for (std::size_t i = 0; i < size; ++i) g.push_back(static_cast<NodeId>(n++));
  }
  EdgeSet edges(n);
  std::vector<double> topo_score(T), ctx_score(T), xs(T), ys(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& g = groups[t];
    const bool star = uniform01(rng) < 0.5;
    std::vector<Edge> internal;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (star) {
        if (i > 0) internal.push_back({g[i], g[0]});
      } else if (g.size() > 1) {
        internal.push_back({g[i], g[(i + 1) % g.size()]});
      }
    }
    EdgeSet team_edges(n);
    for (const auto& e : internal) team_edges.insert(e.src, e.dst);
    for (const auto& e : internal) {
      if (g.size() < 3 || uniform01(rng) >= params.rewire_prob) continue;
      NodeId w = g[uniform_index(rng, g.size())];
      if (w == e.src || team_edges.contains(e.src, w)) continue;
      team_edges.erase(e.src, e.dst);
      team_edges.insert(e.src, w);
    }
    std::vector<double> indeg(g.size(), 0.0);
    for (const auto& e : team_edges.edges()) {
      edges.insert(e.src, e.dst);
      indeg[static_cast<std::size_t>(e.dst - g.front())] += 1.0;
    }
    topo_score[t] = gini(indeg);

    const double rho = std::sqrt(uniform01(rng));
    const double theta = 2.0 * std::numbers::pi * uniform01(rng);
    xs[t] = rho * std::cos(theta);
    ys[t] = rho * std::sin(theta);
    const double c = std::cos(theta);
    ctx_score[t] = rho * (c >= 0 ? 1.0 : -1.0);
  }

  auto standardize = [](std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(v.size()));
    for (double& x : v) x = sd > 0 ? (x - mean) / sd : 0.0;
  };
  standardize(topo_score);
  standardize(ctx_score);
  const double wsum = params.weight_topology + params.weight_contextual;
  if (!(wsum > 0)) throw ValidationError("score weights must sum to a positive value");
  std::vector<double> combined(T);
  for (std::size_t t = 0; t < T; ++t) {
    combined[t] = (params.weight_topology * topo_score[t] + params.weight_contextual * ctx_score[t]) / wsum;
  }
  const auto labels = quantile_labels(combined, 3);

  // Inter-team wiring between nearest neighbours in the latent plane.
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(params.knn, 0)), T - 1);
  std::vector<std::size_t> order(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::iota(order.begin(), order.end(), 0);
    auto dist2 = [&](std::size_t o) { return (xs[o] - xs[t]) * (xs[o] - xs[t]) + (ys[o] - ys[t]) * (ys[o] - ys[t]); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k + 1), order.end(),
                      [&](std::size_t a, std::size_t b2) {
                        const double da = a == t ? -1.0 : dist2(a);
                        const double db = b2 == t ? -1.0 : dist2(b2);
                        return da != db ? da < db : a < b2;
                      });
    for (std::size_t r = 1; r <= k; ++r) {
      const auto& gi = groups[t];
      const auto& gj = groups[order[r]];
      for (int l = 0; l < params.links_per_neighbor; ++l) {
        edges.insert(gi[uniform_index(rng, gi.size())], gj[uniform_index(rng, gj.size())]);
      }
    }
  }

  GenParams recorded = params;
  recorded.num_nodes = n;
  Bundle b;
  b.graph = to_graph(edges, constant_features(n));
  b.teams = TeamSet(to_teams(groups, labels), 3);
  b.meta = make_meta("lt", recorded);
  return b;
}

Bundle gen_attribute_toy(const GenParams& params) {
  params.validate();
  Rng rng(params.seed);
  EdgeSet edges(params.num_nodes);
  add_erdos_renyi(edges, params.er_edges_per_node, rng);
  auto groups = make_groups(params.num_nodes, team_options(params), rng);
  // Skill types: 0 noob, 1 mediocre, 2 good, 3 pro; one-hot encoded.
  FeatureMatrix x = FeatureMatrix::Zero(static_cast<Eigen::Index>(params.num_nodes), 4);
  x.col(0).setOnes();
  std::vector<int> labels;
  json special = json::array();
  for (const auto& g : groups) {
    for (NodeId a : g) {
      for (NodeId b2 : g) {
        if (a != b2) edges.insert(a, b2);
      }
    }
    const int j = std::uniform_int_distribution<int>(0, 2)(rng);
    const NodeId v = g[uniform_index(rng, g.size())];
    x(v, 0) = 0.0;
    x(v, j + 1) = 1.0;
    labels.push_back(j);
    special.push_back(v);
  }
  Bundle b;
  b.graph = to_graph(edges, std::move(x));
  b.teams = TeamSet(to_teams(groups, labels), 3);
  b.meta = make_meta("attr-toy", params);
  b.meta["special_members"] = special;
  return b;
}

Bundle gen_mixed_toy(std::size_t num_nodes, std::uint64_t seed) {
  if (num_nodes < 10) throw ValidationError("mixed toy needs at least 10 nodes");
  Rng rng(seed);
  EdgeSet edges(num_nodes);
  add_erdos_renyi(edges, 2, rng);
  TeamMakerOptions opt;
  opt.min_team_size = 3;
  opt.mean_incremental_size = 2.0;
  opt.overlap = true;
  opt.overlap_fraction = 0.2;
  opt.teamless_fraction = 0.1;
  auto groups = make_groups(num_nodes, opt, rng);
  FeatureMatrix x(static_cast<Eigen::Index>(num_nodes), 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  std::vector<int> labels;
  for (std::size_t g = 0; g < groups.size(); ++g) labels.push_back(static_cast<int>(g % 3));
  Bundle b;
  b.graph = to_graph(edges, std::move(x));
  b.teams = TeamSet(to_teams(groups, labels), 3);
  GenParams p;
  p.num_nodes = num_nodes;
  p.seed = seed;
  b.meta = make_meta("mixed-toy", p);
  return b;
}

// ---------------------------------------------------------------------------------------
// Registry

const std::vector<std::string>& dataset_names() {
  static const std::vector<std::string> names = {"cin", "cout", "t1", "t2", "t3", "l", "lt", "attr-toy"};
  return names;
}

GenParams default_params(const std::string& dataset) {
  GenParams p;
  if (dataset == "cin" || dataset == "cout") {
    p.er_edges_per_node = 1;
  } else if (dataset == "t1") {
    p.er_edges_per_node = 5;
  } else if (dataset == "t2") {
    p.er_edges_per_node = 1;
  } else if (dataset == "t3") {
    p.er_edges_per_node = 5;
    p.overlap = true;
    p.teamless_fraction = 0.167;
  } else if (dataset == "l") {
    p.num_cliques = 200;
    p.clique_size = 10;
    p.num_nodes = 2000;
  } else if (dataset == "lt") {
    p.num_teams = 1000;
  } else if (dataset == "attr-toy") {
    p.er_edges_per_node = 1;
  } else {
    throw ValidationError("unknown dataset '" + dataset + "'");
  }
  return p;
}

Bundle generate(const std::string& dataset, const GenParams& params) {
  Bundle b;
  if (dataset == "cin") {
    b = gen_centrality(params, Direction::In);
  } else if (dataset == "cout") {
    b = gen_centrality(params, Direction::Out);
  } else if (dataset == "t1") {
    b = gen_topology(TopologyVariant::T1, params);
  } else if (dataset == "t2") {
    b = gen_topology(TopologyVariant::T2, params);
  } else if (dataset == "t3") {
    b = gen_topology(TopologyVariant::T3, params);
  } else if (dataset == "l") {
    b = gen_contextual(params.num_cliques, params.clique_size);
    b.meta["seed"] = params.seed;
    b.meta["params"]["seed"] = params.seed;
  } else if (dataset == "lt") {
    b = gen_contextual_topology(params);
  } else if (dataset == "attr-toy") {
    b = gen_attribute_toy(params);
  } else {
    throw ValidationError("unknown dataset '" + dataset + "'");
  }
  return b;
}

}  // namespace mentor::synth
