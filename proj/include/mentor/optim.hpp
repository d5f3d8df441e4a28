#pragma once

#include "mentor/diff.hpp"

#include <vector>

namespace mentor {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<diff::Mat<T>> m;
  std::vector<diff::Mat<T>> v;
  long step{0};
};

/// One bias-corrected Adam update of every parameter from its .grad.
/// Throws DivergenceError naming the parameter when a gradient is not finite.
template <typename T>
void adam_step(diff::ParameterStore<T>& params, AdamState<T>& state, const AdamOptions& opt);

/// Equal-weight running mean of parameter snapshots.
template <typename T>
struct SwaState {
  std::vector<diff::Mat<T>> sum;
  long count{0};

  std::vector<diff::Mat<T>> average() const;
};

template <typename T>
void swa_update(SwaState<T>& state, const diff::ParameterStore<T>& params);

/// Writes the averaged weights into `params`. No-op without snapshots.
template <typename T>
void swa_apply(const SwaState<T>& state, diff::ParameterStore<T>& params);

/// True when `epoch` (0-based) is a snapshot epoch: at or after start_fraction * epochs and
/// on the given frequency counted from the first SWA epoch.
bool swa_due(int epoch, int epochs, double start_fraction, int frequency);

}  // namespace mentor
