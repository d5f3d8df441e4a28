#pragma once

#include "mentor/bundle.hpp"
#include "mentor/diff.hpp"
#include "mentor/graph.hpp"
#include "mentor/metrics.hpp"
#include "mentor/scaler.hpp"
#include "mentor/teams.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mentor {

/// Structural columns, in order, followed by one aggregated column per node attribute.
inline const std::vector<std::string> kStructuralFeatures{
    "internal_edges",  "followers_unique", "followers_total", "followings_unique", "followings_total",
    "assortativity",   "assortativity_imputed", "density", "avg_clustering", "team_size"};

std::vector<std::string> team_feature_names(std::size_t attribute_dim, diff::Reduce aggr);

/// Feature vector of one team. Clustering, density and assortativity use the undirected
/// view of the internal edges. Assortativity is imputed to 0 (and flagged) when it is
/// undefined: fewer than two internal edges or constant endpoint degrees.
std::vector<double> subgraph_features(const Graph& graph, const Team& team, diff::Reduce aggr);

/// One row per team.
FeatureMatrix team_feature_matrix(const Graph& graph, const TeamSet& teams, diff::Reduce aggr);

void write_features_csv(const std::filesystem::path& file, const TeamSet& teams, const FeatureMatrix& x,
                        const std::vector<std::string>& names);

// --- multinomial logistic regression -------------------------------------------------

struct LogRegModel {
  FeatureMatrix weights;           // features x classes
  Eigen::RowVectorXd bias;
  int iterations{0};
  bool converged{false};
};

/// Full-batch gradient descent on mean cross-entropy + ||W||^2 / (2 * C_reg * n).
LogRegModel logreg_fit(const FeatureMatrix& x, std::span<const int> labels, int num_classes, double c_reg,
                       int max_iter = 5000, double tol = 1e-6);
FeatureMatrix logreg_predict(const LogRegModel& model, const FeatureMatrix& x);

// --- multi-layer perceptron ----------------------------------------------------------

struct MlpConfig {
  int hidden = 64;
  int layers = 1;       // hidden layers
  double dropout = 0.0;
  double lr = 1e-2;
  int epochs = 200;
  std::uint64_t seed = 0;
};

class Mlp {
 public:
  Mlp(std::size_t input_dim, int num_classes, const MlpConfig& cfg);
  /// Full-batch Adam on cross-entropy. Throws DivergenceError on a non-finite loss.
  void fit(const FeatureMatrix& x, std::span<const int> labels);
  FeatureMatrix predict(const FeatureMatrix& x);

 private:
  diff::Var<double> logits(diff::Tape<double>& t, const FeatureMatrix& x, bool training, std::mt19937_64& rng);

  MlpConfig cfg_;
  diff::ParameterStore<double> params_;
};

// --- end-to-end baseline runs ----------------------------------------------------------

struct BaselineConfig {
  std::string model = "lr";  // lr | mlp
  diff::Reduce aggr = diff::Reduce::Mean;
  Scaling normalization = Scaling::Standard;
  double c_reg = 1.0;
  MlpConfig mlp;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static BaselineConfig from_json(const nlohmann::json& j);
};

struct BaselineReport {
  Metrics test;
  std::vector<std::size_t> test_indices;
  FeatureMatrix features;  // raw, every team
  std::vector<std::string> feature_names;
};

/// Fits on every non-test team of the standard split and scores the test teams.
/// Features are aggregated first and normalized afterwards, fitted on the training rows.
BaselineReport run_baseline(const Bundle& bundle, const BaselineConfig& cfg);

}  // namespace mentor
