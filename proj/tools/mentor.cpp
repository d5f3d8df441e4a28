// mentor: generate benchmarks, train and ablate the three-channel model, run baselines,
// and aggregate run directories.

#include "mentor/baselines.hpp"
#include "mentor/bundle.hpp"
#include "mentor/error.hpp"
#include "mentor/run_io.hpp"
#include "mentor/search.hpp"
#include "mentor/synthgen.hpp"
#include "mentor/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mentor;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

json parse_overrides(const std::vector<std::string>& pairs) {
  json out = json::object();
  for (const auto& kv : pairs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--param expects key=value, got '" + kv + "'");
    const auto key = kv.substr(0, eq);
    const auto value = kv.substr(eq + 1);
    try {
      out[key] = json::parse(value);
    } catch (const json::exception&) {
      out[key] = value;
    }
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

std::string dataset_name(const Bundle& b) { return b.meta.value("generator", std::string("external")); }

std::string model_label(const ChannelMask& m) {
  return m.count() == 3 ? "MENTOR" : "MENTOR-" + m.to_string();
}

void run_parallel(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, jobs));
  if (n == 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(n, count); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

struct TrainArgs {
  std::string data;
  std::string config;
  std::string out;
  std::string channels;
  std::uint64_t seed = 0;
  int num_seeds = 1;
  int jobs = 1;
  int search_budget = 0;
  bool no_swa = false;
  std::string dump_hypergraph;
};

int cmd_train(const TrainArgs& a, bool ablate) {
  if (ablate && a.channels.empty()) throw ValidationError("ablate requires --channels");
  const Bundle bundle = read_bundle(a.data);
  TrainConfig base = a.config.empty() ? TrainConfig{} : TrainConfig::from_json(read_json_file(a.config));
  if (!a.channels.empty()) base.model.channels = ChannelMask::parse(a.channels);
  if (a.no_swa) base.swa.enabled = false;
  base.precision = precision_from_env(base.precision);
  base.validate();

  if (!a.dump_hypergraph.empty()) {
    auto h = collapse_hypergraph(bundle.graph, bundle.teams);
    Bundle hb;
    hb.graph = h.graph;
    std::vector<Team> teams;
    for (std::size_t t = 0; t < h.num_teams; ++t) {
      teams.push_back({bundle.teams[t].id, {static_cast<NodeId>(t)}, bundle.teams[t].label});
    }
    hb.teams = TeamSet(std::move(teams), bundle.teams.num_classes());
    hb.meta = {{"generator", "hypergraph"}, {"weights", h.weights}, {"source", a.data}};
    write_bundle(a.dump_hypergraph, hb);
    spdlog::info("hypergraph written to {}", a.dump_hypergraph);
  }

  if (a.search_budget > 0) {
    base.seed = a.seed;
    auto result = hp_search(SearchSpace{}, base, a.search_budget, a.seed,
                            [&](const TrainConfig& c) { return cross_validate(bundle, c); }, a.jobs);
    base = result.trials[result.best].config;
    fs::create_directories(a.out);
    json trials = json::array();
    for (const auto& t : result.trials) trials.push_back({{"config", t.config.to_json()}, {"score", t.score}});
    std::ofstream(fs::path(a.out) / "search.json") << json{{"best", result.best}, {"trials", trials}}.dump(2) << '\n';
    spdlog::info("search best trial {} with validation loss {:.4f}", result.best + 1, result.trials[result.best].score);
  }

  const auto n = static_cast<std::size_t>(std::max(1, a.num_seeds));
  std::mutex log_mu;
  run_parallel(n, a.jobs, [&](std::size_t i) {
    TrainConfig cfg = base;
    cfg.seed = a.seed + i;
    const fs::path dir = n == 1 ? fs::path(a.out) : fs::path(a.out) / ("seed_" + std::to_string(cfg.seed));
    fs::create_directories(dir);
    const auto start = std::chrono::steady_clock::now();
    auto report = train(bundle, cfg, dir / "checkpoint.bin");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_run_dir(dir, report,
                  {{"dataset", dataset_name(bundle)}, {"model", model_label(cfg.model.channels)}, {"data", a.data},
                   {"seconds", secs}});
    std::lock_guard lock(log_mu);
    spdlog::info("{} seed {}: test accuracy {:.4f}, AUROC {:.4f} ({:.1f}s)", dir.string(), cfg.seed,
                 report.test.accuracy, report.test.auroc, secs);
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  CLI::App app{"MENTOR subgraph classification experiments"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic benchmark bundle");
  std::string gen_dataset, gen_out;
  std::uint64_t gen_seed = 0;
  std::vector<std::string> gen_params;
  gen->add_option("--dataset", gen_dataset, "cin, cout, t1, t2, t3, l, lt, attr-toy")->required();
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--param", gen_params, "generator override key=value (repeatable)");

  // train / ablate
  TrainArgs ta;
  auto add_train_opts = [&](CLI::App* c) {
    c->add_option("--data", ta.data, "dataset bundle directory")->required();
    c->add_option("--config", ta.config, "JSON training config");
    c->add_option("--seed", ta.seed);
    c->add_option("--seeds", ta.num_seeds, "number of consecutive seeds to run");
    c->add_option("--jobs", ta.jobs, "parallel seeds or search trials");
    c->add_option("--out", ta.out, "run directory")->required();
    c->add_option("--channels", ta.channels, "subset of T,C,L");
    c->add_flag("--no-swa", ta.no_swa, "evaluate best-validation weights instead of SWA");
    c->add_option("--search", ta.search_budget, "random-search trials before the final runs");
    c->add_option("--dump-hypergraph", ta.dump_hypergraph, "write the collapsed hypergraph as a bundle");
  };
  auto* train_cmd = app.add_subcommand("train", "train MENTOR");
  add_train_opts(train_cmd);
  auto* ablate_cmd = app.add_subcommand("ablate", "train MENTOR on a channel subset");
  add_train_opts(ablate_cmd);

  // baseline
  auto* base = app.add_subcommand("baseline", "hand-featured LR / MLP baseline");
  std::string b_data, b_out, b_model = "lr", b_config;
  std::uint64_t b_seed = 0;
  base->add_option("--data", b_data)->required();
  base->add_option("--model", b_model, "lr or mlp");
  base->add_option("--config", b_config, "JSON baseline config");
  base->add_option("--seed", b_seed);
  base->add_option("--out", b_out)->required();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a run's checkpoint");
  std::string e_data, e_run, e_out;
  eval->add_option("--data", e_data)->required();
  eval->add_option("--run", e_run, "run directory holding checkpoint.bin")->required();
  eval->add_option("--out", e_out)->required();

  // report
  auto* rep = app.add_subcommand("report", "aggregate run directories");
  std::vector<std::string> r_runs;
  std::string r_out;
  int r_bins = 10;
  rep->add_option("--runs", r_runs)->required();
  rep->add_option("--out", r_out)->required();
  rep->add_option("--bins", r_bins, "gini histogram bins");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the full model");
  std::size_t gc_nodes = 30;
  std::uint64_t gc_seed = 0;
  double gc_tol = 1e-4;
  double gc_step = 1e-5;
  gc->add_option("--nodes", gc_nodes);
  gc->add_option("--seed", gc_seed);
  gc->add_option("--tol", gc_tol);
  gc->add_option("--step", gc_step);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*gen) {
      const auto overrides = parse_overrides(gen_params);
      auto params = synth::default_params(gen_dataset).with_overrides(overrides);
      params.seed = gen_seed;
      const auto start = std::chrono::steady_clock::now();
      const Bundle b = synth::generate(gen_dataset, params);
      write_bundle(gen_out, b);
      spdlog::info("{}: {} nodes, {} edges, {} teams ({:.2f}s)", gen_dataset, b.graph.num_nodes(), b.graph.num_edges(),
                   b.teams.size(), std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      return 0;
    }
    if (*train_cmd) return cmd_train(ta, false);
    if (*ablate_cmd) return cmd_train(ta, true);
    if (*base) {
      const Bundle b = read_bundle(b_data);
      BaselineConfig cfg = b_config.empty() ? BaselineConfig{} : BaselineConfig::from_json(read_json_file(b_config));
      if (base->count("--model") > 0 || b_config.empty()) cfg.model = b_model;
      if (cfg.model != "lr" && cfg.model != "mlp") throw ValidationError("--model must be lr or mlp");
      cfg.seed = b_seed;
      auto report = run_baseline(b, cfg);
      write_baseline_dir(b_out, b, cfg, report,
                         {{"dataset", dataset_name(b)}, {"model", cfg.model == "lr" ? "LR" : "MLP"}, {"data", b_data}});
      spdlog::info("{} baseline: test accuracy {:.4f}, AUROC {:.4f}", cfg.model, report.test.accuracy, report.test.auroc);
      return 0;
    }
    if (*eval) {
      const Bundle b = read_bundle(e_data);
      auto report = evaluate_checkpoint(b, fs::path(e_run) / "checkpoint.bin");
      write_run_dir(e_out, report,
                    {{"dataset", dataset_name(b)}, {"model", model_label(report.channels)}, {"data", e_data},
                     {"checkpoint", (fs::path(e_run) / "checkpoint.bin").string()}});
      spdlog::info("eval: test accuracy {:.4f}", report.test.accuracy);
      return 0;
    }
    if (*rep) {
      std::vector<fs::path> runs(r_runs.begin(), r_runs.end());
      write_report(runs, r_out, r_bins);
      std::ifstream summary(fs::path(r_out) / "summary.txt");
      std::cout << summary.rdbuf();
      return 0;
    }
    if (*gc) {
      const Bundle b = synth::gen_mixed_toy(gc_nodes, gc_seed);
      ModelConfig cfg;
      cfg.hidden = 8;
      cfg.contextual_hidden = 8;
      const double err = model_grad_check(b, cfg, gc_seed, gc_step);
      std::cout << "max relative error " << err << (err < gc_tol ? " (ok)" : " (FAILED)") << '\n';
      return err < gc_tol ? 0 : 1;
    }
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const DivergenceError& e) {
    spdlog::error("training diverged: {}", e.what());
    return kExitDivergence;
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  }
  return 0;
}
