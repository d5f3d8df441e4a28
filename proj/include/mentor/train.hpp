#pragma once

#include "mentor/bundle.hpp"
#include "mentor/metrics.hpp"
#include "mentor/model.hpp"
#include "mentor/scaler.hpp"
#include "mentor/split.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mentor {

enum class Precision { F32, F64 };
Precision precision_from_string(const std::string& name);
const char* to_string(Precision p);
/// Reads MENTOR_PRECISION; `fallback` when unset.
Precision precision_from_env(Precision fallback = Precision::F32);

struct SwaConfig {
  bool enabled = true;
  double lr = 1e-3;
  double start_fraction = 0.75;
  int frequency = 5;
};

struct TrainConfig {
  ModelConfig model;
  double lr = 1e-3;
  int epochs = 100;
  int patience = 20;  // epochs without validation-loss improvement; 0 disables
  SwaConfig swa;
  Scaling normalization = Scaling::Standard;
  bool resample_anchors = false;
  int validation_fold = 0;
  std::uint64_t seed = 0;
  Precision precision = Precision::F32;

  nlohmann::json to_json() const;
  /// Keys absent from `j` keep their defaults; unknown keys throw ValidationError.
  static TrainConfig from_json(const nlohmann::json& j);
  void validate() const;
  /// Human-readable notes for values outside the published search ranges.
  std::vector<std::string> range_warnings() const;
};

struct EpochRecord {
  int epoch{0};
  double train_loss{0.0};
  double val_loss{0.0};
  double val_acc{0.0};
};

struct RunReport {
  TrainConfig config;
  std::vector<EpochRecord> history;
  int best_epoch{-1};
  double best_val_loss{0.0};
  long swa_snapshots{0};
  double swa_val_loss{0.0};   // validation loss of the averaged weights, when any
  /// "swa" or "best_val": the averaged weights are kept unless the best-validation
  /// snapshot has a lower validation loss.
  std::string final_weights;

  std::vector<std::size_t> test_indices;
  std::vector<int> labels;          // every team
  std::vector<TeamId> team_ids;
  Metrics test;
  ForwardArtifacts artifacts;       // every team
  ChannelMask channels;

  // topology channel only
  std::vector<NodeId> forest_original;
  std::vector<std::int32_t> forest_team;
  std::vector<double> importance;   // per forest node
  std::vector<double> team_gini;    // per team

  nlohmann::json metrics_json() const;
};

/// Full-batch training on every non-test team, validation on one fold, evaluation on test.
/// With `checkpoint` set, the final weights are written there (or the last finite weights
/// before a DivergenceError propagates).
RunReport train(const Bundle& bundle, const TrainConfig& cfg, const std::optional<std::filesystem::path>& checkpoint = {});

/// Mean best validation loss over every fold of the split (the test split is never read).
double cross_validate(const Bundle& bundle, const TrainConfig& cfg);

/// Finite-difference check of the full model (64-bit, dropout off) with the loss taken
/// over every team, at the initial weights plus small Gaussian noise. Returns the max relative error.
double model_grad_check(const Bundle& bundle, ModelConfig cfg, std::uint64_t seed, double step = 1e-5);

/// Keeps freed tensor buffers in the heap instead of returning them to the OS after
/// every step (glibc only; a no-op elsewhere).
void configure_allocator();

/// Rebuilds the run described by a checkpoint header and evaluates its weights.
RunReport evaluate_checkpoint(const Bundle& bundle, const std::filesystem::path& checkpoint);

}  // namespace mentor
