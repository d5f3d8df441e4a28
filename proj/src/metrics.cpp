#include "mentor/metrics.hpp"

#include "mentor/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace mentor {

double binary_auroc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw ValidationError("auroc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) rank[order[k]] = avg;
    i = j;
  }
  double pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (positive[i]) {
      pos += 1.0;
      rank_sum += rank[i];
    }
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

std::vector<int> predict(const FeatureMatrix& probabilities) {
  std::vector<int> out(static_cast<std::size_t>(probabilities.rows()));
  for (Eigen::Index r = 0; r < probabilities.rows(); ++r) {
    Eigen::Index best = 0;
    probabilities.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

Metrics compute_metrics(std::span<const int> labels, const FeatureMatrix& probabilities) {
  if (static_cast<Eigen::Index>(labels.size()) != probabilities.rows()) throw ValidationError("metrics: label count mismatch");
  if (labels.empty()) throw ValidationError("metrics: no items");
  const auto classes = probabilities.cols();
  Metrics m;
  m.confusion = ConfusionMatrix::Zero(classes, classes);
  const auto pred = predict(probabilities);
  long correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) throw ValidationError("metrics: label out of range");
    ++m.confusion(labels[i], pred[i]);
    correct += labels[i] == pred[i];
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());

  std::vector<double> scores(labels.size());
  double total = 0.0;
  int defined = 0;
  for (Eigen::Index c = 0; c < classes; ++c) {
    std::unique_ptr<bool[]> positive(new bool[labels.size()]);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      scores[i] = probabilities(static_cast<Eigen::Index>(i), c);
      positive[i] = labels[i] == c;
    }
    const double a = binary_auroc(scores, std::span<const bool>(positive.get(), labels.size()));
    m.class_auroc.push_back(a);
    if (std::isnan(a)) {
      spdlog::warn("AUROC undefined for class {} (single-class labels); excluded from macro average", c);
    } else {
      total += a;
      ++defined;
    }
  }
  m.auroc = defined > 0 ? total / defined : std::numeric_limits<double>::quiet_NaN();
  return m;
}

}  // namespace mentor
