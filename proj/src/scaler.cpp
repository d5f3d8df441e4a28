#include "mentor/scaler.hpp"

#include "mentor/error.hpp"
#include "mentor/stats.hpp"

#include <algorithm>
#include <cmath>

namespace mentor {

Scaling scaling_from_string(const std::string& name) {
  if (name == "minmax") return Scaling::MinMax;
  if (name == "standard") return Scaling::Standard;
  if (name == "robust") return Scaling::Robust;
  if (name == "quantile") return Scaling::Quantile;
  throw ValidationError("unknown normalization '" + name + "'");
}

const char* to_string(Scaling s) {
  switch (s) {
    case Scaling::MinMax: return "minmax";
    case Scaling::Standard: return "standard";
    case Scaling::Robust: return "robust";
    case Scaling::Quantile: return "quantile";
  }
  return "?";
}

void FeatureScaler::fit(const FeatureMatrix& x, std::span<const NodeId> rows) {
  std::vector<NodeId> all;
  if (rows.empty()) {
    all.resize(static_cast<std::size_t>(x.rows()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
    rows = all;
  }
  if (rows.empty()) throw ValidationError("cannot fit a scaler on zero rows");
  const auto cols = static_cast<std::size_t>(x.cols());
  center_.assign(cols, 0.0);
  scale_.assign(cols, 1.0);
  constant_.assign(cols, false);
  sorted_.assign(scheme_ == Scaling::Quantile ? cols : 0, {});
  std::vector<double> v(rows.size());
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] < 0 || rows[i] >= x.rows()) throw ValidationError("scaler row out of range");
      v[i] = x(rows[i], static_cast<Eigen::Index>(c));
    }
    std::sort(v.begin(), v.end());
    constant_[c] = v.front() == v.back();
    if (constant_[c]) continue;
    switch (scheme_) {
      case Scaling::MinMax:
        center_[c] = v.front();
        scale_[c] = v.back() - v.front();
        break;
      case Scaling::Standard: {
        double mean = 0.0;
        for (double a : v) mean += a;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double a : v) var += (a - mean) * (a - mean);
        center_[c] = mean;
        scale_[c] = std::sqrt(var / static_cast<double>(v.size()));
        break;
      }
      case Scaling::Robust: {
        center_[c] = sorted_quantile(v, 0.5);
        const double iqr = sorted_quantile(v, 0.75) - sorted_quantile(v, 0.25);
        scale_[c] = iqr > 0.0 ? iqr : v.back() - v.front();
        break;
      }
      case Scaling::Quantile:
        sorted_[c] = v;
        break;
    }
  }
}

FeatureMatrix FeatureScaler::transform(const FeatureMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != constant_.size()) throw ValidationError("scaler fitted on a different width");
  FeatureMatrix out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const auto ci = static_cast<std::size_t>(c);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double a = x(r, c);
      if (constant_[ci]) {
        out(r, c) = 1.0;
      } else if (scheme_ == Scaling::Quantile) {
        // empirical CDF with linear interpolation between order statistics
        const auto& s = sorted_[ci];
        auto hi = std::upper_bound(s.begin(), s.end(), a);
        if (hi == s.begin()) { out(r, c) = 0.0; continue; }
        if (hi == s.end()) { out(r, c) = 1.0; continue; }
        auto lo = std::prev(hi);
        const auto k = static_cast<double>(lo - s.begin());
        const double frac = (a - *lo) / (*hi - *lo);
        out(r, c) = (k + frac) / static_cast<double>(s.size() - 1);
      } else {
        out(r, c) = (a - center_[ci]) / scale_[ci];
      }
    }
  }
  return out;
}

}  // namespace mentor
