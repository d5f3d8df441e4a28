#pragma once

#include "mentor/graph.hpp"

#include <span>
#include <string>
#include <vector>

namespace mentor {

enum class Scaling { MinMax, Standard, Robust, Quantile };
Scaling scaling_from_string(const std::string& name);
const char* to_string(Scaling s);

/// Column-wise feature normalization fitted on a subset of rows. Columns that are constant
/// on the fitted rows map to 1 everywhere.
class FeatureScaler {
 public:
  explicit FeatureScaler(Scaling scheme = Scaling::Standard) : scheme_(scheme) {}

  /// Empty `rows` fits on every row.
  void fit(const FeatureMatrix& x, std::span<const NodeId> rows = {});
  FeatureMatrix transform(const FeatureMatrix& x) const;
  Scaling scheme() const { return scheme_; }

 private:
  Scaling scheme_;
  std::vector<double> center_;
  std::vector<double> scale_;
  std::vector<bool> constant_;
  std::vector<std::vector<double>> sorted_;  // quantile scheme only
};

}  // namespace mentor
