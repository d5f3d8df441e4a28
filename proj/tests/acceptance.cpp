// End-to-end acceptance run: trains the desk configurations on every synthetic dataset and
// prints one PASS/FAIL line per criterion. Exit status is the number of failed criteria.

#include "mentor/baselines.hpp"
#include "mentor/error.hpp"
#include "mentor/metrics.hpp"
#include "mentor/stats.hpp"
#include "mentor/synthgen.hpp"
#include "mentor/train.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

using namespace mentor;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  int id;
  bool pass;
  std::string detail;
};

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * x);
  return buf;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string accs(const std::vector<double>& v) {
  std::ostringstream s;
  s << pct(mean(v)) << " [";
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? " " : "") << pct(v[i]);
  s << "]";
  return s.str();
}

class Harness {
 public:
  Harness(fs::path configs, int seeds) : configs_(std::move(configs)), seeds_(seeds) {}

  const Bundle& data(const std::string& name) {
    auto it = data_.find(name);
    if (it != data_.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    auto b = synth::generate(name, synth::default_params(name));
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    gen_seconds_[name] = sec;
    spdlog::info("generated {} in {:.2f}s", name, sec);
    return data_.emplace(name, std::move(b)).first->second;
  }

  TrainConfig config(const std::string& name) const {
    std::ifstream in(configs_ / (name + ".json"));
    if (!in) throw ValidationError("missing desk config " + (configs_ / (name + ".json")).string());
    return TrainConfig::from_json(json::parse(in));
  }

  // Runs one configuration over every seed; results are cached by key.
  const std::vector<RunReport>& runs(const std::string& name, const std::string& channels,
                                     const std::function<void(TrainConfig&)>& tweak = {}, const std::string& tag = "") {
    const std::string key = name + "/" + channels + tag;
    auto it = runs_.find(key);
    if (it != runs_.end()) return it->second;
    std::vector<RunReport> out;
    for (int s = 0; s < seeds_; ++s) {
      auto cfg = config(name);
      cfg.model.channels = ChannelMask::parse(channels);
      cfg.seed = static_cast<std::uint64_t>(s);
      if (tweak) tweak(cfg);
      const auto t0 = std::chrono::steady_clock::now();
      auto r = train(data(name), cfg);
      const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("  run %-22s seed %d  test accuracy %s  (%.0fs)\n", key.c_str(), s, pct(r.test.accuracy).c_str(), sec);
      std::fflush(stdout);
      log_[key].push_back({{"seed", s}, {"accuracy", r.test.accuracy}, {"auroc", r.test.auroc}, {"seconds", sec}});
      out.push_back(std::move(r));
    }
    return runs_.emplace(key, std::move(out)).first->second;
  }

  std::vector<double> accuracy(const std::string& name, const std::string& channels,
                               const std::function<void(TrainConfig&)>& tweak = {}, const std::string& tag = "") {
    std::vector<double> a;
    for (const auto& r : runs(name, channels, tweak, tag)) a.push_back(r.test.accuracy);
    return a;
  }

  std::vector<double> baseline(const std::string& name, const std::string& model) {
    std::vector<double> a;
    for (int s = 0; s < seeds_; ++s) {
      BaselineConfig cfg;
      cfg.model = model;
      cfg.seed = static_cast<std::uint64_t>(s);
      cfg.mlp.seed = static_cast<std::uint64_t>(s);
      a.push_back(run_baseline(data(name), cfg).test.accuracy);
      log_[name + "/" + model].push_back({{"seed", s}, {"accuracy", a.back()}});
    }
    return a;
  }

  const std::map<std::string, double>& generation_seconds() const { return gen_seconds_; }
  json log() const { return log_; }

 private:
  fs::path configs_;
  int seeds_;
  std::map<std::string, Bundle> data_;
  std::map<std::string, std::vector<RunReport>> runs_;
  std::map<std::string, double> gen_seconds_;
  json log_ = json::object();
};

// --- criteria --------------------------------------------------------------------------

Verdict gradient_fidelity() {
  auto b = synth::gen_mixed_toy(30, 0);
  ModelConfig cfg;
  cfg.hidden = 8;
  cfg.contextual_hidden = 8;
  const double err = model_grad_check(b, cfg, 0, 1e-5);
  return {1, err < 1e-4, "max relative error " + sci(err) + " (< 1e-4)"};
}

Verdict centrality(Harness& h) {
  std::ostringstream d;
  bool ok = true;
  for (const char* name : {"cin", "cout"}) {
    const auto full = h.accuracy(name, "T,C,L"), c = h.accuracy(name, "C"), t = h.accuracy(name, "T");
    ok = ok && mean(full) >= 0.95 && mean(c) >= 0.95 && mean(t) <= 0.45;
    d << name << ": full " << accs(full) << ", C " << accs(c) << ", T " << accs(t) << "; ";
  }
  return {2, ok, d.str() + "need full>=95, C>=95, T<=45"};
}

Verdict direction(Harness& h) {
  auto flipped = h.accuracy(
      "cin", "C", [](TrainConfig& c) { c.model.flow_centrality = Flow::TargetToSource; }, "+flipped");
  return {3, mean(flipped) <= 0.60, "CIn centrality-only, flipped flow " + accs(flipped) + " (<= 60)"};
}

Verdict topology(Harness& h) {
  std::ostringstream d;
  bool ok = true;
  for (const char* name : {"t1", "t2", "t3"}) {
    const auto full = h.accuracy(name, "T,C,L");
    const auto lr = h.baseline(name, "lr"), mlp = h.baseline(name, "mlp");
    ok = ok && mean(full) >= 0.90 && mean(lr) <= 0.60 && mean(mlp) <= 0.60;
    d << name << ": full " << accs(full) << ", LR " << pct(mean(lr)) << ", MLP " << pct(mean(mlp)) << "; ";
  }
  return {4, ok, d.str() + "need full>=90, LR/MLP<=60"};
}

Verdict contextual(Harness& h) {
  const auto full = h.accuracy("l", "T,C,L"), l = h.accuracy("l", "L"), t = h.accuracy("l", "T");
  const bool ok = mean(full) >= 0.95 && mean(l) >= 0.95 && mean(t) <= 0.45;
  return {5, ok, "L: full " + accs(full) + ", L " + accs(l) + ", T " + accs(t) + "; need full>=95, L>=95, T<=45"};
}

Verdict mixed(Harness& h) {
  const double full = mean(h.accuracy("lt", "T,C,L"));
  double best = 0.0;
  std::ostringstream d;
  d << "LT: full " << pct(full);
  for (const char* ch : {"T", "C", "L"}) {
    const double a = mean(h.accuracy("lt", ch));
    best = std::max(best, a);
    d << ", " << ch << " " << pct(a);
  }
  const bool ok = full >= 0.80 && full - best >= 0.10;
  d << "; margin " << pct(full - best) << " (need full>=80, margin>=10)";
  return {6, ok, d.str()};
}

std::vector<double> test_gamma(const std::vector<RunReport>& runs, const std::vector<int>& cols) {
  std::vector<double> v;
  for (const auto& r : runs) {
    for (auto t : r.test_indices) {
      double g = 0.0;
      for (int c : cols) g += r.artifacts.gamma(static_cast<Eigen::Index>(t), c);
      v.push_back(g);
    }
  }
  return v;
}

Verdict attention(Harness& h) {
  const double l = median(test_gamma(h.runs("l", "T,C,L"), {2}));
  const double lt = median(test_gamma(h.runs("lt", "T,C,L"), {0, 2}));
  return {7, l > 0.8 && lt > 0.8, "median gamma_L on L " + pct(l) + ", median gamma_T+gamma_L on LT " + pct(lt) + " (> 80)"};
}

Verdict attribute(Harness& h) {
  const auto& b = h.data("attr-toy");
  const auto& special = b.meta.at("special_members");
  std::size_t hit = 0, total = 0;
  for (const auto& r : h.runs("attr-toy", "T,C,L")) {
    std::map<std::int32_t, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < r.forest_team.size(); ++i) members[r.forest_team[i]].push_back(i);
    for (auto t : r.test_indices) {
      const auto& slots = members[static_cast<std::int32_t>(t)];
      if (slots.empty()) continue;
      double top = -1.0, mine = -1.0;
      const auto target = special.at(t).get<NodeId>();
      for (auto i : slots) {
        top = std::max(top, r.importance[i]);
        if (r.forest_original[i] == target) mine = r.importance[i];
      }
      ++total;
      hit += mine >= top - 1e-12;
    }
  }
  const double frac = total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
  return {8, frac >= 0.8, "special node has the largest I_v in " + pct(frac) + " of " + std::to_string(total) + " test teams (>= 80)"};
}

Verdict invariants() {
  std::vector<std::string> broken;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) broken.push_back(what);
  };
  std::mt19937_64 rng(11);

  // attention and gate normalisation on an untrained model
  {
    auto b = synth::gen_mixed_toy(60, 5);
    ModelConfig cfg;
    cfg.hidden = 16;
    const auto in = ModelInputs::build(b, cfg, b.graph.features(), 5);
    Mentor<double> m(cfg, in.topology_features.cols(), b.teams.num_classes(), in.anchors.num_sets(), 5);
    const auto art = m.evaluate(in);
    std::vector<double> sums(in.topology_plan.num_nodes, 0.0);
    for (std::size_t i = 0; i < in.topology_plan.size(); ++i) sums[static_cast<std::size_t>(in.topology_plan.dst[i])] += art.alpha[i];
    double worst = 0.0;
    for (double s : sums) worst = std::max(worst, std::abs(s - 1.0));
    expect(worst <= 1e-6, "alpha group sums");
    double gworst = 0.0;
    for (Eigen::Index r = 0; r < art.gamma.rows(); ++r) gworst = std::max(gworst, std::abs(art.gamma.row(r).sum() - 1.0));
    expect(gworst <= 1e-6, "gamma sums");
    for (const auto& z : art.embeddings) {
      for (Eigen::Index r = 0; r < z.rows(); ++r) expect(z.row(r).norm() <= 1.0 + 1e-9, "clamped embedding norm");
    }
  }
  // norm clamp against the formula
  {
    diff::Tape<double> t(false);
    diff::Mat<double> z(4, 3);
    z << 3, 4, 0, 0, 0, 0, 1e-13, 0, 0, -1, 2, 2;
    z *= 1.0;
    auto y = t.l2_norm_clamp(t.constant(z), 1e-12);
    double err = 0.0;
    for (Eigen::Index r = 0; r < 4; ++r) {
      const auto want = z.row(r) / std::max(z.row(r).norm(), 1e-12);
      err = std::max(err, (y.value().row(r) - want).cwiseAbs().maxCoeff());
    }
    expect(err <= 1e-15, "norm clamp formula");
  }
  // gini
  {
    const std::vector<double> one{0, 0, 0, 1};
    expect(gini(one) == 0.75, "gini([0,0,0,1]) == 0.75");
    std::uniform_real_distribution<double> u(0, 5);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> v(static_cast<std::size_t>(2 + rep));
      for (auto& x : v) x = u(rng);
      const double g = gini(v);
      expect(g >= 0.0 && g < 1.0, "gini range");
      expect(std::abs(g - oracle::gini(v)) < 1e-12, "gini pairwise oracle");
    }
  }
  // hypergraph weights, shortest paths, segment reduce
  for (int rep = 0; rep < 20; ++rep) {
    const bool directed = rep % 2 == 0;
    auto g = oracle::random_graph(40, 2.0, rng, directed);
    auto teams = oracle::random_teams(40, 8, rng);
    const auto h = collapse_hypergraph(g, teams);
    const auto w = oracle::team_weights(g, teams);
    for (std::size_t i = 0; i < teams.size(); ++i) {
      for (std::size_t j = 0; j < teams.size(); ++j) {
        if (i == j) continue;
        const auto it = w.find({i, j});
        expect(h.weight(static_cast<NodeId>(i), static_cast<NodeId>(j)) == (it == w.end() ? 0.0 : it->second), "w_ij brute force");
      }
    }
    std::uniform_int_distribution<NodeId> pick(0, 39);
    const std::vector<NodeId> src{pick(rng), pick(rng), pick(rng)};
    const auto sd = distances_to_set(g, src, 1000);
    const auto od = oracle::hop_distances(g, src, 1000);
    for (std::size_t v = 0; v < 40; ++v) expect(sd.distance[v] == od[v], "BFS oracle");

    std::normal_distribution<double> z;
    diff::Mat<double> a(30, 3);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
    std::vector<diff::Index> seg(30);
    std::vector<int> seg_int(30);
    std::uniform_int_distribution<int> sp(0, 9);
    for (std::size_t i = 0; i < 30; ++i) seg_int[i] = static_cast<int>(seg[i] = sp(rng));
    const std::pair<diff::Reduce, oracle::Mode> modes[] = {{diff::Reduce::Sum, oracle::Mode::Sum},
                                                           {diff::Reduce::Mean, oracle::Mode::Mean},
                                                           {diff::Reduce::Max, oracle::Mode::Max},
                                                           {diff::Reduce::Min, oracle::Mode::Min}};
    for (auto [mode, omode] : modes) {
      diff::Tape<double> t(false);
      const auto out = t.segment_reduce(t.constant(a), seg, 12, mode);
      expect((out.value() - oracle::segment_reduce(a, seg_int, 12, omode)).cwiseAbs().maxCoeff() < 1e-12,
             "segment reduce oracle");
    }
  }
  // generator determinism
  {
    const auto root = fs::temp_directory_path() / "mentor_acceptance_det";
    fs::remove_all(root);
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), {});
    };
    for (const auto& name : synth::dataset_names()) {
      const auto p = synth::default_params(name);
      write_bundle(root / "a", synth::generate(name, p));
      write_bundle(root / "b", synth::generate(name, p));
      for (const char* f : {"edges.tsv", "nodes.csv", "teams.json", "meta.json"}) {
        expect(slurp(root / "a" / f) == slurp(root / "b" / f), "byte-identical " + name + "/" + f);
      }
    }
    fs::remove_all(root);
  }
  // quantile labels
  for (std::size_t n : {99u, 300u, 1000u, 2024u}) {
    std::vector<double> s(n);
    std::normal_distribution<double> z;
    for (auto& x : s) x = z(rng);
    const auto labels = quantile_labels(s, 3);
    std::array<long, 3> c{};
    for (int l : labels) ++c[static_cast<std::size_t>(l)];
    for (long k : c) expect(std::abs(static_cast<double>(k) - static_cast<double>(n) / 3.0) <= 1.0, "quantile balance");
  }
  std::set<std::string> unique(broken.begin(), broken.end());
  std::string detail = unique.empty() ? "all invariants hold" : "broken:";
  for (const auto& u : unique) detail += " " + u + ";";
  return {9, unique.empty(), detail};
}

Verdict baseline_sanity(Harness& h) {
  const auto lr = h.baseline("cin", "lr");
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> coarse(0, 20);
  bool exact = true;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep) % 199;
    std::vector<double> s(n);
    std::vector<char> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse(rng) / 20.0;
      pos[i] = coarse(rng) < 8;
    }
    std::span<const bool> p(reinterpret_cast<const bool*>(pos.data()), n);
    const double a = binary_auroc(s, p), b = oracle::auroc(s, p);
    exact = exact && ((std::isnan(a) && std::isnan(b)) || a == b);
  }
  return {10, mean(lr) >= 0.95 && exact,
          "LR on CIn " + accs(lr) + " (>= 95); AUROC equals the pairwise oracle on 200 instances: " + (exact ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MENTOR acceptance run"};
  std::string configs = MENTOR_DESK_CONFIGS;
  int seeds = 3;
  std::vector<int> only;
  std::string out = "acceptance.json";
  app.add_option("--configs", configs, "directory of per-dataset training configs");
  app.add_option("--seeds", seeds, "training seeds per configuration")->check(CLI::Range(1, 20));
  app.add_option("--only", only, "criteria to run (default: all)");
  app.add_option("--out", out, "JSON summary");
  CLI11_PARSE(app, argc, argv);

  configure_allocator();
  spdlog::set_level(spdlog::level::err);
  const auto t0 = std::chrono::steady_clock::now();
  Harness h(configs, seeds);
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, [] { return gradient_fidelity(); }},     {2, [&] { return centrality(h); }},
      {3, [&] { return direction(h); }},           {4, [&] { return topology(h); }},
      {5, [&] { return contextual(h); }},          {6, [&] { return mixed(h); }},
      {7, [&] { return attention(h); }},           {8, [&] { return attribute(h); }},
      {9, [] { return invariants(); }},            {10, [&] { return baseline_sanity(h); }},
  };
  std::vector<Verdict> verdicts;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    try {
      verdicts.push_back(run());
    } catch (const std::exception& e) {
      verdicts.push_back({id, false, std::string("error: ") + e.what()});
    }
    const auto& v = verdicts.back();
    std::printf("criterion %d: %s  %s\n", v.id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  int failed = 0;
  json summary{{"seeds", seeds}, {"seconds", total}, {"runs", h.log()}, {"generation_seconds", h.generation_seconds()}};
  std::printf("\nsummary\n");
  for (const auto& v : verdicts) {
    std::printf("criterion %d: %s\n", v.id, v.pass ? "PASS" : "FAIL");
    summary["criteria"][std::to_string(v.id)] = {{"pass", v.pass}, {"detail", v.detail}};
    failed += !v.pass;
  }
  double slowest_gen = 0.0;
  for (const auto& [name, sec] : h.generation_seconds()) slowest_gen = std::max(slowest_gen, sec);
  std::printf("slowest dataset generation %.3fs, total %.0fs\n", slowest_gen, total);
  std::ofstream(out) << summary.dump(2) << '\n';
  return failed;
}
