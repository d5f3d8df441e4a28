#pragma once

#include <span>
#include <vector>

namespace mentor {

/// Gini index in mean-absolute-difference form, sum_ij |x_i - x_j| / (2 n^2 mean).
/// All-zero input gives 0. Throws ValidationError on empty or negative input.
double gini(std::span<const double> values);

/// Bucket scores into `num_classes` equal-frequency classes. Cut points are linearly
/// interpolated quantiles at k/C; a score equal to a cut point goes to the lower bucket.
/// Sets `degenerate` when two cut points coincide (e.g. constant scores).
std::vector<int> quantile_labels(std::span<const double> scores, int num_classes = 3, bool* degenerate = nullptr);

/// Linear-interpolated quantile of already sorted values, q in [0,1].
double sorted_quantile(std::span<const double> sorted, double q);

}  // namespace mentor
