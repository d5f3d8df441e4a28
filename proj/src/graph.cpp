#include "mentor/graph.hpp"

#include "mentor/error.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace mentor {

Flow flipped(Flow flow) {
  return flow == Flow::SourceToTarget ? Flow::TargetToSource : Flow::SourceToTarget;
}

const char* to_string(Flow flow) {
  return flow == Flow::SourceToTarget ? "source_to_target" : "target_to_source";
}

Flow flow_from_string(const std::string& name) {
  if (name == "source_to_target") return Flow::SourceToTarget;
  if (name == "target_to_source") return Flow::TargetToSource;
  throw ValidationError("unknown flow '" + name + "'");
}

namespace {

void build_csr(std::size_t n, const std::vector<Edge>& edges, bool by_src,
               std::vector<std::size_t>& offsets, std::vector<NodeId>& targets) {
  offsets.assign(n + 1, 0);
  for (const auto& e : edges) ++offsets[static_cast<std::size_t>(by_src ? e.src : e.dst) + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  targets.resize(offsets[n]);
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& e : edges) {
    auto key = static_cast<std::size_t>(by_src ? e.src : e.dst);
    targets[cursor[key]++] = by_src ? e.dst : e.src;
  }
}

}  // namespace

Graph Graph::build(std::size_t num_nodes, std::vector<Edge> edges, FeatureMatrix features,
                   bool directed, bool dedup_edges) {
  if (static_cast<std::size_t>(features.rows()) != num_nodes) {
    throw ValidationError("feature rows (" + std::to_string(features.rows()) +
                          ") != num_nodes (" + std::to_string(num_nodes) + ")");
  }
  const auto n = static_cast<NodeId>(num_nodes);
  for (const auto& e : edges) {
    if (e.src < 0 || e.dst < 0 || e.src >= n || e.dst >= n) {
      throw ValidationError("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                            ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
  }
  if (!directed) {
    for (auto& e : edges) {
      if (e.src > e.dst) std::swap(e.src, e.dst);
    }
  }
  std::sort(edges.begin(), edges.end());
  const bool has_dup = std::adjacent_find(edges.begin(), edges.end()) != edges.end();
  const bool has_loop = std::any_of(edges.begin(), edges.end(), [](const Edge& e) { return e.src == e.dst; });
  if (dedup_edges) {
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::erase_if(edges, [](const Edge& e) { return e.src == e.dst; });
  } else if (has_dup) {
    throw ValidationError("duplicate edges present and dedup_edges is off");
  } else if (has_loop) {
    throw ValidationError("self-loops present and dedup_edges is off");
  }

  Graph g;
  g.num_nodes_ = num_nodes;
  g.directed_ = directed;
  g.features_ = std::move(features);
  if (directed) {
    g.edges_ = std::move(edges);
    build_csr(num_nodes, g.edges_, true, g.out_offsets_, g.out_targets_);
    build_csr(num_nodes, g.edges_, false, g.in_offsets_, g.in_sources_);
  } else {
    std::vector<Edge> both;
    both.reserve(edges.size() * 2);
    for (const auto& e : edges) {
      both.push_back(e);
      both.push_back({e.dst, e.src});
    }
    std::sort(both.begin(), both.end());
    build_csr(num_nodes, both, true, g.out_offsets_, g.out_targets_);
    build_csr(num_nodes, both, false, g.in_offsets_, g.in_sources_);
    g.edges_ = std::move(edges);
  }
  return g;
}

void Graph::check_node(NodeId v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= num_nodes_) {
    throw ValidationError("node id " + std::to_string(v) + " out of range");
  }
}

std::span<const NodeId> Graph::out_neighbors(NodeId v) const {
  check_node(v);
  auto i = static_cast<std::size_t>(v);
  return {out_targets_.data() + out_offsets_[i], out_offsets_[i + 1] - out_offsets_[i]};
}

std::span<const NodeId> Graph::in_neighbors(NodeId v) const {
  check_node(v);
  auto i = static_cast<std::size_t>(v);
  return {in_sources_.data() + in_offsets_[i], in_offsets_[i + 1] - in_offsets_[i]};
}

std::span<const NodeId> Graph::pooled_neighbors(NodeId v, Flow flow) const {
  return flow == Flow::SourceToTarget ? in_neighbors(v) : out_neighbors(v);
}

std::size_t Graph::degree(NodeId v, Direction direction) const {
  return direction == Direction::In ? in_neighbors(v).size() : out_neighbors(v).size();
}

std::vector<NodeId> Graph::undirected_neighbors(NodeId v) const {
  auto out = out_neighbors(v);
  auto in = in_neighbors(v);
  std::vector<NodeId> all(out.begin(), out.end());
  all.insert(all.end(), in.begin(), in.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

namespace {

// BFS on the undirected view seeded from `seeds`; stops expanding at `cutoff`.
void bfs(const Graph& graph, std::span<const NodeId> seeds, int cutoff, std::vector<int>& dist,
         std::vector<NodeId>* closest) {
  const auto n = graph.num_nodes();
  dist.assign(n, kInfiniteDistance);
  if (closest) closest->assign(n, -1);
  std::deque<NodeId> queue;
  for (NodeId s : seeds) {
    auto si = static_cast<std::size_t>(s);
    if (dist[si] == 0) continue;
    dist[si] = 0;
    if (closest) (*closest)[si] = s;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    const int dv = dist[static_cast<std::size_t>(v)];
    if (dv >= cutoff) continue;
    auto visit = [&](NodeId u) {
      auto ui = static_cast<std::size_t>(u);
      if (dist[ui] != kInfiniteDistance) return;
      dist[ui] = dv + 1;
      if (closest) (*closest)[ui] = (*closest)[static_cast<std::size_t>(v)];
      queue.push_back(u);
    };
    for (NodeId u : graph.out_neighbors(v)) visit(u);
    for (NodeId u : graph.in_neighbors(v)) visit(u);
  }
}

}  // namespace

DistanceTable shortest_paths(const Graph& graph, std::span<const NodeId> sources, int cutoff) {
  if (cutoff < 1) throw ValidationError("shortest_paths cutoff must be >= 1");
  DistanceTable table;
  table.sources.assign(sources.begin(), sources.end());
  table.distances.resize(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i] < 0 || static_cast<std::size_t>(sources[i]) >= graph.num_nodes()) {
      throw ValidationError("source node out of range");
    }
    NodeId s = sources[i];
    bfs(graph, std::span<const NodeId>(&s, 1), cutoff, table.distances[i], nullptr);
  }
  return table;
}

SetDistances distances_to_set(const Graph& graph, std::span<const NodeId> set, int cutoff) {
  if (cutoff < 1) throw ValidationError("distance cutoff must be >= 1");
  for (NodeId s : set) {
    if (s < 0 || static_cast<std::size_t>(s) >= graph.num_nodes()) throw ValidationError("set member out of range");
  }
  SetDistances out;
  bfs(graph, set, cutoff, out.distance, &out.closest);
  return out;
}

}  // namespace mentor
