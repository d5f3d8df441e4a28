#pragma once

#include "mentor/graph.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mentor {

using ConfusionMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Metrics {
  double accuracy{0.0};
  double auroc{0.0};                 // macro over classes with both positives and negatives
  std::vector<double> class_auroc;   // NaN where undefined
  ConfusionMatrix confusion;         // rows true label, columns prediction
};

/// Mann-Whitney estimate of P(score_pos > score_neg) with ties counted 1/2 (average ranks).
/// NaN when either side is empty.
double binary_auroc(std::span<const double> scores, std::span<const bool> positive);

/// Argmax predictions (first maximum on ties).
std::vector<int> predict(const FeatureMatrix& probabilities);

Metrics compute_metrics(std::span<const int> labels, const FeatureMatrix& probabilities);

}  // namespace mentor
