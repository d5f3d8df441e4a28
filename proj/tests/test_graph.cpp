#include "mentor/error.hpp"
#include "mentor/graph.hpp"
#include "mentor/preprocess.hpp"
#include "mentor/synthgen.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <set>

using namespace mentor;

namespace {

FeatureMatrix zeros(std::size_t n, Eigen::Index cols = 1) {
  return FeatureMatrix::Zero(static_cast<Eigen::Index>(n), cols);
}

}  // namespace

TEST_CASE("graph construction") {
  auto g = Graph::build(3, {{0, 1}, {1, 2}}, zeros(3));
  CHECK(g.num_nodes() == 3);
  CHECK(g.degree(2, Direction::In) == 1);

  auto single = Graph::build(1, {}, zeros(1, 4));
  CHECK(single.num_nodes() == 1);
  CHECK(single.num_edges() == 0);
  CHECK(single.feature_dim() == 4);

  auto dedup = Graph::build(4, {{0, 1}, {0, 1}}, zeros(4));
  CHECK(dedup.num_edges() == 1);
  CHECK_THROWS_AS(Graph::build(4, {{0, 1}, {0, 1}}, zeros(4), true, false), ValidationError);
  CHECK_THROWS_AS(Graph::build(2, {{0, 2}}, zeros(2)), ValidationError);
  CHECK_THROWS_AS(Graph::build(3, {}, zeros(2)), ValidationError);
}

TEST_CASE("degrees") {
  auto star = Graph::build(4, {{1, 0}, {2, 0}, {3, 0}}, zeros(4));
  CHECK(star.degree(0, Direction::In) == 3);
  CHECK(star.degree(0, Direction::Out) == 0);

  auto ring = Graph::build(3, {{0, 1}, {1, 2}, {2, 0}}, zeros(3));
  for (NodeId v = 0; v < 3; ++v) CHECK(ring.degree(v, Direction::In) == 1);

  CHECK(star.pooled_neighbors(0, Flow::SourceToTarget).size() == 3);
  CHECK(star.pooled_neighbors(0, Flow::TargetToSource).empty());
  CHECK(star.pooled_neighbors(1, Flow::TargetToSource).size() == 1);
}

TEST_CASE("hop distances") {
  auto path = Graph::build(3, {{0, 1}, {1, 2}}, zeros(3));
  const std::vector<NodeId> src{0};
  auto d2 = shortest_paths(path, src, 2);
  CHECK(d2.at(0, 1) == 1);
  CHECK(d2.at(0, 2) == 2);
  auto d1 = shortest_paths(path, src, 1);
  CHECK(d1.at(0, 2) == kInfiniteDistance);
}

TEST_CASE("caveman ring distances match the relaxation oracle") {
  auto b = synth::gen_contextual(4, 3);
  const auto& g = b.graph;
  // opposite cliques are two bridges apart, three hops between the sets
  for (NodeId u = 0; u < 3; ++u) {
    const std::vector<NodeId> src{u};
    auto table = shortest_paths(g, src, 100);
    auto expect = oracle::hop_distances(g, src, 100);
    for (NodeId v = 0; v < static_cast<NodeId>(g.num_nodes()); ++v) CHECK(table.at(0, v) == expect[static_cast<std::size_t>(v)]);
  }
  const std::vector<NodeId> clique0{0, 1, 2};
  const auto to0 = oracle::hop_distances(g, clique0, 100);
  const auto sd = distances_to_set(g, clique0, 100);
  int min_opposite = oracle::kInf;
  for (NodeId v = 6; v < 9; ++v) min_opposite = std::min(min_opposite, sd.distance[static_cast<std::size_t>(v)]);
  CHECK(min_opposite == 3);
  for (std::size_t v = 0; v < g.num_nodes(); ++v) CHECK(sd.distance[v] == to0[v]);
}

TEST_CASE("BFS equals the relaxation oracle on random graphs") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    auto g = oracle::random_graph(30, 1.0, rng);
    std::uniform_int_distribution<NodeId> pick(0, 29);
    const std::vector<NodeId> src{pick(rng), pick(rng)};
    const int cutoff = rep % 5 + 1;
    auto table = shortest_paths(g, src, cutoff);
    for (std::size_t i = 0; i < src.size(); ++i) {
      const std::vector<NodeId> one{src[i]};
      auto expect = oracle::hop_distances(g, one, cutoff);
      for (std::size_t v = 0; v < 30; ++v) CHECK(table.distances[i][v] == expect[v]);
    }
    auto sd = distances_to_set(g, src, cutoff);
    auto expect = oracle::hop_distances(g, src, cutoff);
    for (std::size_t v = 0; v < 30; ++v) {
      CHECK(sd.distance[v] == expect[v]);
      if (expect[v] == oracle::kInf) {
        CHECK(sd.closest[v] == -1);
      } else {
        // the reported member really is at that distance
        const std::vector<NodeId> member{sd.closest[v]};
        CHECK(oracle::hop_distances(g, member, cutoff)[v] == expect[v]);
      }
    }
  }
}

TEST_CASE("isolated forest") {
  // two teams sharing node 2, plus a team with a disconnected member
  auto g = Graph::build(6, {{0, 2}, {2, 1}, {3, 2}, {4, 3}, {0, 5}}, zeros(6));
  TeamSet teams({{10, {0, 1, 2}, 0}, {11, {2, 3, 4}, 1}}, 2);
  auto f = isolate_teams(g, teams);
  CHECK(f.graph.num_nodes() == 6);  // node 2 duplicated
  CHECK(f.num_teams() == 2);
  CHECK(f.team_offsets == std::vector<std::size_t>{0, 3, 6});
  // 0->2, 2->1 inside team 10; 3->2, 4->3 inside team 11; 0->5 dropped
  CHECK(f.graph.num_edges() == 4);
  for (const auto& e : f.graph.edges()) CHECK(f.team_of[static_cast<std::size_t>(e.src)] == f.team_of[static_cast<std::size_t>(e.dst)]);

  TeamSet whole({{0, {0, 1, 2, 3, 4, 5}, 0}}, 2);
  auto same = isolate_teams(g, whole);
  CHECK(same.graph.num_edges() == g.num_edges());

  TeamSet gap({{0, {0, 1, 4}, 0}}, 2);
  auto with_gap = isolate_teams(g, gap);
  CHECK(with_gap.graph.num_nodes() == 3);
  CHECK(with_gap.graph.num_edges() == 0);
}

TEST_CASE("hypergraph weights") {
  // three edges from S_0 into S_1
  auto g = Graph::build(6, {{0, 3}, {1, 3}, {2, 4}, {3, 4}}, zeros(6));
  TeamSet teams({{0, {0, 1, 2}, 0}, {1, {3, 4}, 1}}, 2);
  auto h = collapse_hypergraph(g, teams);
  CHECK(h.num_teams == 2);
  CHECK(h.num_hypernodes() == 3);  // node 5 is teamless
  CHECK(h.weight(0, 1) == 3.0);
  CHECK(h.weight(1, 0) == 0.0);
  CHECK(h.graph.features()(0, 0) == 3.0);
  CHECK(h.graph.features()(1, 0) == 2.0);
  CHECK(h.team_id[2] == kTeamlessMarker);

  auto lonely = Graph::build(4, {{0, 1}, {2, 3}}, zeros(4));
  auto h2 = collapse_hypergraph(lonely, TeamSet({{0, {0, 1}, 0}, {1, {2, 3}, 1}}, 2));
  CHECK(h2.graph.num_edges() == 0);
}

TEST_CASE("hypergraph weights equal the brute-force pair scan") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 15; ++rep) {
    const bool directed = rep % 3 != 0;
    auto g = oracle::random_graph(20, 2.0, rng, directed);
    auto teams = oracle::random_teams(20, 6, rng);
    auto h = collapse_hypergraph(g, teams);
    auto expect = oracle::team_weights(g, teams);
    for (std::size_t i = 0; i < teams.size(); ++i) {
      for (std::size_t j = 0; j < teams.size(); ++j) {
        if (i == j) continue;
        const auto it = expect.find({i, j});
        const double w = it == expect.end() ? 0.0 : it->second;
        CHECK(h.weight(static_cast<NodeId>(i), static_cast<NodeId>(j)) == w);
      }
    }
  }
}

TEST_CASE("anchor sets") {
  std::mt19937_64 rng(1);
  std::vector<Edge> chain;
  for (NodeId v = 0; v + 1 < 8; ++v) chain.push_back({v, v + 1});
  auto g = Graph::build(8, chain, zeros(8));
  auto a = sample_anchor_sets(g, 1, 100, rng);
  CHECK(a.num_sets() == 9);  // 3 tiers of 3 sets
  std::multiset<std::size_t> sizes;
  for (const auto& s : a.sets) sizes.insert(s.size());
  CHECK(sizes == std::multiset<std::size_t>{1, 1, 1, 2, 2, 2, 4, 4, 4});
  for (std::size_t s = 0; s < a.num_sets(); ++s) {
    for (auto v : a.sets[s]) CHECK(a.dist(v, s) == 0);
  }

  auto a2 = sample_anchor_sets(g, 2, 100, rng);
  CHECK(a2.num_sets() == 18);

  std::mt19937_64 r2(9);
  for (int rep = 0; rep < 10; ++rep) {
    auto rg = oracle::random_graph(30, 0.8, r2, rep % 2 == 0);
    const int cutoff = 2 + rep % 3;
    auto sets = sample_anchor_sets(rg, 1, cutoff, r2);
    CHECK(sets.num_sets() == 25);  // ceil(log2 30) = 5
    for (std::size_t s = 0; s < sets.num_sets(); ++s) {
      auto expect = oracle::hop_distances(rg, sets.sets[s], cutoff);
      for (NodeId v = 0; v < 30; ++v) {
        CHECK(sets.dist(v, s) == expect[static_cast<std::size_t>(v)]);
        const double score = expect[static_cast<std::size_t>(v)] == oracle::kInf
                                 ? 0.0
                                 : 1.0 / (expect[static_cast<std::size_t>(v)] + 1.0);
        CHECK(sets.score(v, s) == doctest::Approx(score));
      }
    }
  }
}
