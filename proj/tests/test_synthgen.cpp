#include "mentor/bundle.hpp"
#include "mentor/error.hpp"
#include "mentor/stats.hpp"
#include "mentor/synthgen.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

using namespace mentor;
using namespace mentor::synth;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<int> class_counts(const TeamSet& teams) {
  std::vector<int> c(static_cast<std::size_t>(teams.num_classes()), 0);
  for (int l : teams.labels()) ++c[static_cast<std::size_t>(l)];
  return c;
}

bool balanced(const TeamSet& teams, double tolerance) {
  const double share = 1.0 / teams.num_classes();
  for (int c : class_counts(teams)) {
    if (std::abs(c / static_cast<double>(teams.size()) - share) > tolerance) return false;
  }
  return true;
}

// External in-edges (or out-edges) of a team: edges with exactly one endpoint inside.
std::size_t external_edges(const Graph& g, const Team& t, Direction direction) {
  std::set<NodeId> members(t.members.begin(), t.members.end());
  std::size_t count = 0;
  for (const auto& e : g.edges()) {
    const bool s = members.count(e.src) > 0, d = members.count(e.dst) > 0;
    if (direction == Direction::In ? (d && !s) : (s && !d)) ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("erdos-renyi edge counts") {
  double total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    auto g = directed_erdos_renyi(10000, 1, rng);
    CHECK(g.num_edges() >= 9990);
    CHECK(g.num_edges() <= 10000);
    total += static_cast<double>(g.num_edges());
  }
  CHECK(total / 10 >= 9990);

  Rng rng(5);
  auto pair = directed_erdos_renyi(2, 1, rng);
  REQUIRE(pair.num_edges() == 2);
  CHECK(pair.edges()[0] == Edge{0, 1});
  CHECK(pair.edges()[1] == Edge{1, 0});

  auto capped = directed_erdos_renyi(5, 10, rng);
  CHECK(capped.num_edges() <= 20);
}

TEST_CASE("team maker") {
  Rng rng(1);
  TeamMakerOptions opt;
  auto groups = make_groups(10000, opt, rng);
  CHECK(groups.size() >= 990);
  CHECK(groups.size() <= 1010);
  std::vector<int> seen(10000, 0);
  for (const auto& g : groups) {
    CHECK(g.size() >= 5);
    for (auto v : g) ++seen[static_cast<std::size_t>(v)];
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

  TeamMakerOptions exact;
  exact.min_team_size = 10;
  exact.mean_incremental_size = 0.0;
  auto one = make_groups(10, exact, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 10);

  TeamMakerOptions overlap;
  overlap.overlap = true;
  overlap.teamless_fraction = 0.167;
  auto og = make_groups(10000, overlap, rng);
  std::vector<int> member(10000, 0);
  for (const auto& g : og) {
    for (auto v : g) member[static_cast<std::size_t>(v)] = 1;
  }
  const auto teamless = std::count(member.begin(), member.end(), 0);
  CHECK(teamless >= 1500);
  CHECK(teamless <= 1850);
}

TEST_CASE("motif adder") {
  Rng rng(2);
  std::vector<NodeId> team(10);
  std::iota(team.begin(), team.end(), 0);
  EdgeSet edges(10);
  const auto inserted = add_motifs(edges, team, 0.8, star_in_motif(), rng);
  CHECK(inserted == 8);
  CHECK(edges.size() <= 24);

  EdgeSet none(10);
  CHECK(add_motifs(none, team, 0.05, star_in_motif(), rng) == 0);
  CHECK(none.size() == 0);

  // star insertions concentrate in-degree more than rings do
  Motif ring{3, {{0, 1}, {1, 2}, {2, 0}}};
  double star_gini = 0, ring_gini = 0;
  for (int rep = 0; rep < 100; ++rep) {
    EdgeSet s(10), r(10);
    add_motifs(s, team, 0.8, star_in_motif(), rng);
    add_motifs(r, team, 0.8, ring, rng);
    auto in_deg = [](const EdgeSet& es) {
      std::vector<double> d(10, 0.0);
      for (const auto& e : es.edges()) d[static_cast<std::size_t>(e.dst)] += 1;
      return d;
    };
    star_gini += gini(in_deg(s));
    ring_gini += gini(in_deg(r));
  }
  CHECK(star_gini > ring_gini);
}

TEST_CASE("centrality datasets") {
  auto params = default_params("cin");
  auto b = generate("cin", params);
  CHECK(b.graph.num_nodes() == 10000);
  CHECK(b.graph.num_edges() > 60000);
  CHECK(b.graph.num_edges() < 75000);
  CHECK(balanced(b.teams, 0.05));

  std::vector<double> ext(3, 0.0), count(3, 0.0);
  for (const auto& t : b.teams.teams()) {
    ext[static_cast<std::size_t>(t.label)] += static_cast<double>(external_edges(b.graph, t, Direction::In));
    count[static_cast<std::size_t>(t.label)] += 1;
  }
  // injected links sit at 20, 40, 60 on top of a shared ER/motif background
  const double mean0 = ext[0] / count[0], mean1 = ext[1] / count[1], mean2 = ext[2] / count[2];
  CHECK(mean1 - mean0 == doctest::Approx(20).epsilon(0.1));
  CHECK(mean2 - mean0 == doctest::Approx(40).epsilon(0.1));

  // COut: injected edges leave the team
  auto bo = generate("cout", default_params("cout"));
  std::vector<double> out(3, 0.0), in(3, 0.0), n(3, 0.0);
  for (const auto& t : bo.teams.teams()) {
    out[static_cast<std::size_t>(t.label)] += static_cast<double>(external_edges(bo.graph, t, Direction::Out));
    in[static_cast<std::size_t>(t.label)] += static_cast<double>(external_edges(bo.graph, t, Direction::In));
    n[static_cast<std::size_t>(t.label)] += 1;
  }
  CHECK(out[2] / n[2] - out[0] / n[0] > 35);
  CHECK(std::abs(in[2] / n[2] - in[0] / n[0]) < 5);
}

TEST_CASE("topology datasets") {
  auto t1 = generate("t1", default_params("t1"));
  CHECK(t1.teams.size() >= 990);
  CHECK(t1.teams.size() <= 1010);
  CHECK(t1.graph.num_edges() > 65000);
  CHECK(t1.graph.num_edges() < 76000);
  CHECK(balanced(t1.teams, 0.05));

  auto t2 = generate("t2", default_params("t2"));
  CHECK(t2.graph.num_edges() > 45000);
  CHECK(t2.graph.num_edges() < 70000);

  auto p3 = default_params("t3");
  p3.seed = 2;
  auto t3 = generate("t3", p3);
  CHECK(t3.meta["params"]["overlap"] == true);

  // motif copies in a noise-free team
  const auto motifs = default_motifs();
  for (int j = 0; j < 3; ++j) {
    Rng rng(static_cast<std::uint64_t>(40 + j));
    std::vector<NodeId> team(12);
    std::iota(team.begin(), team.end(), 0);
    EdgeSet es(12);
    add_motifs(es, team, 0.8, motifs[static_cast<std::size_t>(j)], rng);
    // each copy of the pattern contributes pattern.size() distinct edges unless it reuses one
    std::size_t hubs = 0;
    for (NodeId v = 0; v < 12; ++v) {
      std::size_t in = 0, out = 0;
      for (const auto& e : es.edges()) {
        in += e.dst == v;
        out += e.src == v;
      }
      if (j == 0 && in >= 3) ++hubs;
      if (j == 2 && out >= 3) ++hubs;
      if (j == 1 && in >= 2 && out >= 1) ++hubs;
    }
    CHECK(hubs >= 1);
  }
}

TEST_CASE("contextual caveman") {
  auto b = gen_contextual(200, 10);
  CHECK(b.graph.num_nodes() == 2000);
  CHECK(b.graph.num_edges() == 9000);
  CHECK_FALSE(b.graph.directed());
  CHECK(class_counts(b.teams) == std::vector<int>{67, 67, 66});
  // labels form three contiguous arcs around the ring
  int changes = 0;
  for (std::size_t t = 1; t < b.teams.size(); ++t) changes += b.teams[t].label != b.teams[t - 1].label;
  CHECK(changes == 2);

  auto small = gen_contextual(3, 3);
  CHECK(small.teams.size() == 3);
  CHECK(class_counts(small.teams) == std::vector<int>{1, 1, 1});
  for (std::size_t k = 3; k < 8; ++k) CHECK(gen_contextual(5, k).graph.num_edges() == 5 * k * (k - 1) / 2);
}

TEST_CASE("contextual and topology dataset") {
  auto b = generate("lt", default_params("lt"));
  CHECK(b.teams.size() == 1000);
  CHECK(b.graph.num_nodes() > 9500);
  CHECK(b.graph.num_nodes() < 10500);
  CHECK(b.graph.num_edges() > 24000);
  CHECK(b.graph.num_edges() < 33000);
  const auto c = class_counts(b.teams);
  for (int k : c) CHECK(std::abs(k - 333) <= 1);
}

TEST_CASE("attribute toy") {
  auto b = generate("attr-toy", default_params("attr-toy"));
  CHECK(b.graph.num_nodes() == 10000);
  CHECK(balanced(b.teams, 0.05));
  const auto& special = b.meta["special_members"];
  REQUIRE(special.size() == b.teams.size());
  const auto& x = b.graph.features();
  for (std::size_t t = 0; t < b.teams.size(); ++t) {
    const auto v = special[t].get<NodeId>();
    // skill one-hot: column label+1 marks the special member
    CHECK(x(v, b.teams[t].label + 1) == 1.0);
    // everyone else is a plain member
    for (auto u : b.teams[t].members) {
      if (u != v) CHECK(x(u, 0) == 1.0);
    }
  }
}

TEST_CASE("attribute toy without the special signal carries no class information") {
  auto b = generate("attr-toy", default_params("attr-toy"));
  const auto& special = b.meta["special_members"];
  const auto& x = b.graph.features();
  // per-team feature mean over the non-special members, one column at a time
  std::vector<double> stat;
  std::vector<int> labels;
  for (std::size_t t = 0; t < b.teams.size(); ++t) {
    const auto v = special[t].get<NodeId>();
    double s = 0;
    int k = 0;
    for (auto u : b.teams[t].members) {
      if (u == v) continue;
      s += x(u, 3);
      ++k;
    }
    stat.push_back(k ? s / k : 0.0);
    labels.push_back(b.teams[t].label);
  }
  // permutation test on the class-2 vs class-0 difference of means
  auto diff = [&](const std::vector<int>& lab) {
    double a = 0, na = 0, c = 0, nc = 0;
    for (std::size_t i = 0; i < stat.size(); ++i) {
      if (lab[i] == 2) a += stat[i], na += 1;
      if (lab[i] == 0) c += stat[i], nc += 1;
    }
    return std::abs(a / na - c / nc);
  };
  const double observed = diff(labels);
  Rng rng(11);
  int as_extreme = 0;
  for (int rep = 0; rep < 200; ++rep) {
    auto perm = labels;
    std::shuffle(perm.begin(), perm.end(), rng);
    as_extreme += diff(perm) >= observed;
  }
  CHECK(as_extreme >= 10);  // p >= 0.05
}

TEST_CASE("generator determinism") {
  const auto root = fs::temp_directory_path() / "mentor_det";
  fs::remove_all(root);
  for (const auto& name : dataset_names()) {
    auto p = default_params(name);
    p.seed = 4;
    if (name != "l") p.num_nodes = std::min<std::size_t>(p.num_nodes, 2000);
    if (name == "lt") p.num_teams = 200;
    write_bundle(root / (name + "_a"), generate(name, p));
    write_bundle(root / (name + "_b"), generate(name, p));
    for (const char* file : {"edges.tsv", "nodes.csv", "teams.json", "meta.json"}) {
      CHECK_MESSAGE(slurp(root / (name + "_a") / file) == slurp(root / (name + "_b") / file), name << "/" << file);
    }
  }
  fs::remove_all(root);
}

TEST_CASE("bundle round trip") {
  auto b = gen_mixed_toy(40, 3);
  const auto dir = fs::temp_directory_path() / "mentor_rt";
  fs::remove_all(dir);
  write_bundle(dir, b);
  auto r = read_bundle(dir);
  CHECK(r.graph.num_nodes() == b.graph.num_nodes());
  CHECK(r.graph.num_edges() == b.graph.num_edges());
  CHECK(r.graph.features() == b.graph.features());
  REQUIRE(r.teams.size() == b.teams.size());
  for (std::size_t t = 0; t < b.teams.size(); ++t) {
    CHECK(r.teams[t].members == b.teams[t].members);
    CHECK(r.teams[t].label == b.teams[t].label);
  }
  fs::remove_all(dir);
}

TEST_CASE("quantile labelling of an ingested bundle") {
  // real-world stand-in: raw performance scores become three balanced labels
  std::vector<double> scores;
  Rng rng(8);
  std::lognormal_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < 300; ++i) scores.push_back(d(rng));
  const auto labels = quantile_labels(scores, 3);
  std::vector<int> c(3, 0);
  for (int l : labels) ++c[static_cast<std::size_t>(l)];
  for (int k : c) CHECK(std::abs(k - 100) <= 1);
  CHECK(quantile_labels(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9}, 3) == std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2});
  bool degenerate = false;
  CHECK(quantile_labels(std::vector<double>(6, 2.0), 3, &degenerate) == std::vector<int>(6, 0));
  CHECK(degenerate);
}

TEST_CASE("gini") {
  CHECK(gini(std::vector<double>{1, 1, 1, 1}) == 0.0);
  CHECK(gini(std::vector<double>{0, 0, 0, 1}) == 0.75);
  CHECK(gini(std::vector<double>{5}) == 0.0);
  CHECK(gini(std::vector<double>{0, 0}) == 0.0);
  CHECK_THROWS_AS(gini(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(gini(std::vector<double>{1, -1}), ValidationError);
  Rng rng(1);
  std::exponential_distribution<double> e(1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(1 + rep % 17);
    for (auto& v : x) v = e(rng);
    const double g = gini(x);
    CHECK(g >= 0.0);
    CHECK(g < 1.0);
    CHECK(g == doctest::Approx(oracle::gini(x)).epsilon(1e-12));
  }
}
