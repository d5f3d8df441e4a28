#include "mentor/search.hpp"

#include "mentor/error.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace mentor {

SearchSpace::SearchSpace() {
  for (int e = 20; e <= 100; e += 2) epochs.push_back(e);
}

SearchSpace SearchSpace::singleton(const TrainConfig& cfg) {
  SearchSpace s;
  const auto& m = cfg.model;
  s.conv_topology = {m.conv_topology};
  s.conv_centrality = {m.conv_centrality};
  s.conv_contextual = {m.conv_contextual};
  s.team_pool = {m.team_pool};
  s.flow_topology = {m.flow_topology};
  s.flow_centrality = {m.flow_centrality};
  s.dropout = {m.dropout_topology};
  s.epochs = {cfg.epochs};
  s.lr_min = s.lr_max = cfg.lr;
  s.swa_lr_min = s.swa_lr_max = cfg.swa.lr;
  s.swa_start = {cfg.swa.start_fraction};
  s.swa_freq_min = s.swa_freq_max = cfg.swa.frequency;
  s.hidden = {m.hidden};
  s.normalization = {cfg.normalization};
  return s;
}

namespace {

template <typename V>
const V& choose(const std::vector<V>& options, std::mt19937_64& rng) {
  if (options.empty()) throw ValidationError("empty search dimension");
  return options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
}

double log_uniform(double lo, double hi, std::mt19937_64& rng) {
  if (!(lo > 0.0 && hi >= lo)) throw ValidationError("bad log-uniform range");
  if (lo == hi) {
    rng();
    return lo;
  }
  return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

}  // namespace

TrainConfig sample_config(const SearchSpace& space, const TrainConfig& base, std::mt19937_64& rng) {
  TrainConfig c = base;
  auto& m = c.model;
  m.conv_topology = choose(space.conv_topology, rng);
  m.conv_centrality = choose(space.conv_centrality, rng);
  m.conv_contextual = choose(space.conv_contextual, rng);
  m.team_pool = choose(space.team_pool, rng);
  m.flow_topology = choose(space.flow_topology, rng);
  m.flow_centrality = choose(space.flow_centrality, rng);
  m.dropout_topology = choose(space.dropout, rng);
  m.dropout_centrality = choose(space.dropout, rng);
  m.dropout_classifier = choose(space.dropout, rng);
  c.epochs = choose(space.epochs, rng);
  c.lr = log_uniform(space.lr_min, space.lr_max, rng);
  c.swa.lr = log_uniform(space.swa_lr_min, space.swa_lr_max, rng);
  c.swa.start_fraction = choose(space.swa_start, rng);
  c.swa.frequency = std::uniform_int_distribution<int>(space.swa_freq_min, space.swa_freq_max)(rng);
  m.hidden = choose(space.hidden, rng);
  c.normalization = choose(space.normalization, rng);
  return c;
}

std::vector<double> SearchResult::best_so_far() const {
  std::vector<double> out;
  double best_score = INFINITY;
  for (const auto& t : trials) {
    best_score = std::min(best_score, t.score);
    out.push_back(best_score);
  }
  return out;
}

SearchResult hp_search(const SearchSpace& space, const TrainConfig& base, int budget, std::uint64_t seed,
                       const Objective& objective, int jobs) {
  if (budget < 1) throw ValidationError("search budget must be >= 1");
  SearchResult r;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < budget; ++i) r.trials.push_back({sample_config(space, base, rng), 0.0});

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < r.trials.size(); i = next++) {
      try {
        const double s = objective(r.trials[i].config);
        r.trials[i].score = std::isnan(s) ? INFINITY : s;
      } catch (const DivergenceError& e) {
        spdlog::warn("trial {} diverged: {}", i + 1, e.what());
        r.trials[i].score = INFINITY;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = r.trials.size();
        return;
      }
      spdlog::info("trial {}/{}: score {:.4f}", i + 1, r.trials.size(), r.trials[i].score);
    }
  };
  const int threads = std::max(1, std::min(jobs, budget));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  for (std::size_t i = 1; i < r.trials.size(); ++i) {
    if (r.trials[i].score < r.trials[r.best].score) r.best = i;
  }
  return r;
}

}  // namespace mentor
