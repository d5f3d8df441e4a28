#include "mentor/stats.hpp"

#include "mentor/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace mentor {

double gini(std::span<const double> values) {
  if (values.empty()) throw ValidationError("gini of an empty set");
  for (double v : values) {
    if (v < 0 || std::isnan(v)) throw ValidationError("gini requires non-negative values");
  }
  const auto n = static_cast<double>(values.size());
  double total = 0;
  for (double v : values) total += v;
  if (total == 0) return 0.0;
  // Sorted form of sum_ij |x_i - x_j| = 2 sum_i (2i - n + 1) x_(i).
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double acc = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) acc += (2.0 * static_cast<double>(i) - n + 1.0) * sorted[i];
  const double mean = total / n;
  return (2.0 * acc) / (2.0 * n * n * mean);
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of an empty set");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<int> quantile_labels(std::span<const double> scores, int num_classes, bool* degenerate) {
  if (num_classes < 1) throw ValidationError("num_classes must be >= 1");
  if (scores.size() < static_cast<std::size_t>(num_classes)) throw ValidationError("fewer scores than classes");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (int k = 1; k < num_classes; ++k) cuts.push_back(sorted_quantile(sorted, static_cast<double>(k) / num_classes));
  bool degen = false;
  for (std::size_t k = 1; k < cuts.size(); ++k) degen |= cuts[k] == cuts[k - 1];
  if (!cuts.empty()) degen |= sorted.front() == sorted.back();
  if (degen) spdlog::warn("quantile_labels: degenerate cut points");
  if (degenerate) *degenerate = degen;
  std::vector<int> labels;
  labels.reserve(scores.size());
  for (double s : scores) {
    int label = 0;
    for (double c : cuts) label += s > c ? 1 : 0;
    labels.push_back(label);
  }
  return labels;
}

}  // namespace mentor
