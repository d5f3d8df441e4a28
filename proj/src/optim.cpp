#include "mentor/optim.hpp"

#include "mentor/error.hpp"

#include <cmath>

namespace mentor {

template <typename T>
void adam_step(diff::ParameterStore<T>& params, AdamState<T>& state, const AdamOptions& opt) {
  auto all = params.all();
  if (state.m.empty()) {
    for (auto* p : all) {
      state.m.push_back(diff::Mat<T>::Zero(p->value.rows(), p->value.cols()));
      state.v.push_back(diff::Mat<T>::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (state.m.size() != all.size()) throw ValidationError("optimizer state does not match parameters");
  for (auto* p : all) {
    if (p->grad.size() != p->value.size()) p->grad.setZero(p->value.rows(), p->value.cols());
    if (!p->grad.allFinite()) throw DivergenceError("non-finite gradient in parameter '" + p->name + "'");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(opt.beta1);
  const T b2 = static_cast<T>(opt.beta2);
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto& g = all[i]->grad;
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g.cwiseProduct(g);
    const T step = static_cast<T>(opt.lr / c1);
    const T root_c2 = static_cast<T>(std::sqrt(c2));
    all[i]->value.array() -= step * m.array() / (v.array().sqrt() / root_c2 + static_cast<T>(opt.eps));
  }
}

template <typename T>
void swa_update(SwaState<T>& state, const diff::ParameterStore<T>& params) {
  auto all = params.all();
  if (state.count == 0) {
    state.sum.clear();
    for (const auto* p : all) state.sum.push_back(p->value);
  } else {
    for (std::size_t i = 0; i < all.size(); ++i) state.sum[i] += all[i]->value;
  }
  ++state.count;
}

template <typename T>
std::vector<diff::Mat<T>> SwaState<T>::average() const {
  std::vector<diff::Mat<T>> out;
  for (const auto& s : sum) out.push_back(s / static_cast<T>(count));
  return out;
}

template <typename T>
void swa_apply(const SwaState<T>& state, diff::ParameterStore<T>& params) {
  if (state.count == 0) return;
  auto all = params.all();
  auto avg = state.average();
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = avg[i];
}

bool swa_due(int epoch, int epochs, double start_fraction, int frequency) {
  const int start = static_cast<int>(std::ceil(start_fraction * epochs));
  if (epoch < start || frequency < 1) return false;
  return (epoch - start) % frequency == 0;
}

template struct SwaState<float>;
template struct SwaState<double>;
template void adam_step<float>(diff::ParameterStore<float>&, AdamState<float>&, const AdamOptions&);
template void adam_step<double>(diff::ParameterStore<double>&, AdamState<double>&, const AdamOptions&);
template void swa_update<float>(SwaState<float>&, const diff::ParameterStore<float>&);
template void swa_update<double>(SwaState<double>&, const diff::ParameterStore<double>&);
template void swa_apply<float>(const SwaState<float>&, diff::ParameterStore<float>&);
template void swa_apply<double>(const SwaState<double>&, diff::ParameterStore<double>&);

}  // namespace mentor
