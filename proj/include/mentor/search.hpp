#pragma once

#include "mentor/train.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace mentor {

/// Discrete and log-uniform ranges the random search draws from.
struct SearchSpace {
  std::vector<diff::Reduce> conv_topology{diff::Reduce::Sum, diff::Reduce::Mean, diff::Reduce::Max, diff::Reduce::Min};
  std::vector<diff::Reduce> conv_centrality{diff::Reduce::Sum, diff::Reduce::Mean, diff::Reduce::Max, diff::Reduce::Min};
  std::vector<diff::Reduce> conv_contextual{diff::Reduce::Sum, diff::Reduce::Mean, diff::Reduce::Max, diff::Reduce::Min};
  std::vector<diff::Reduce> team_pool{diff::Reduce::Sum, diff::Reduce::Mean, diff::Reduce::Max, diff::Reduce::Min};
  std::vector<Flow> flow_topology{Flow::SourceToTarget, Flow::TargetToSource};
  std::vector<Flow> flow_centrality{Flow::SourceToTarget, Flow::TargetToSource};
  std::vector<double> dropout{0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8};
  std::vector<int> epochs;  // filled with 20, 22, ..., 100
  double lr_min = 1e-5, lr_max = 1e-1;
  double swa_lr_min = 1e-5, swa_lr_max = 1e-1;
  std::vector<double> swa_start{0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  int swa_freq_min = 1, swa_freq_max = 20;
  std::vector<int> hidden{16, 32, 64, 128};
  std::vector<Scaling> normalization{Scaling::MinMax, Scaling::Standard, Scaling::Robust, Scaling::Quantile};

  SearchSpace();
  /// Every list reduced to the value already in `cfg`.
  static SearchSpace singleton(const TrainConfig& cfg);
};

/// Draws every searched field from `space`; the rest comes from `base`.
TrainConfig sample_config(const SearchSpace& space, const TrainConfig& base, std::mt19937_64& rng);

struct Trial {
  TrainConfig config;
  double score{0.0};  // lower is better
};

struct SearchResult {
  std::vector<Trial> trials;
  std::size_t best{0};

  /// best score among the first k trials, for k = 1..budget
  std::vector<double> best_so_far() const;
};

using Objective = std::function<double(const TrainConfig&)>;

/// Seeded random search. The sampled sequence depends only on (space, base, seed), so a
/// larger budget extends a smaller one. Trials run on up to `jobs` threads.
SearchResult hp_search(const SearchSpace& space, const TrainConfig& base, int budget, std::uint64_t seed,
                       const Objective& objective, int jobs = 1);

}  // namespace mentor
