#include "mentor/split.hpp"

#include "mentor/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace mentor {

SplitPlan::SplitPlan(std::vector<std::size_t> test, std::vector<std::vector<std::size_t>> folds, std::uint64_t seed)
    : test_(std::move(test)), folds_(std::move(folds)), seed_(seed) {}

SplitPlan::SplitPlan(const SplitPlan& other)
    : test_(other.test_), folds_(other.folds_), seed_(other.seed_), accessed_(other.accessed_.load()) {}

SplitPlan& SplitPlan::operator=(const SplitPlan& other) {
  test_ = other.test_;
  folds_ = other.folds_;
  seed_ = other.seed_;
  accessed_ = other.accessed_.load();
  return *this;
}

std::vector<std::size_t> SplitPlan::train_pool() const {
  std::vector<std::size_t> out;
  for (const auto& f : folds_) out.insert(out.end(), f.begin(), f.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> SplitPlan::train_without_fold(std::size_t k) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < folds_.size(); ++i) {
    if (i != k) out.insert(out.end(), folds_[i].begin(), folds_[i].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<std::size_t>& SplitPlan::test() const {
  if (!accessed_.exchange(true)) spdlog::info("test split opened ({} teams)", test_.size());
  return test_;
}

SplitPlan make_split(std::span<const int> labels, int num_classes, std::uint64_t seed, int num_folds,
                     double test_fraction) {
  if (num_folds < 2) throw ValidationError("need at least 2 folds");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test fraction must be in (0,1)");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw ValidationError("label out of range in split");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> sequence;
  for (int c = 0; c < num_classes; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    if (members.size() < static_cast<std::size_t>(num_folds)) {
      throw ValidationError("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                            " teams, too few to stratify");
    }
    std::shuffle(members.begin(), members.end(), rng);
    sequence.insert(sequence.end(), members.begin(), members.end());
  }
  // systematic sampling along the class-ordered sequence keeps every class at the global rate
  std::vector<std::size_t> test;
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(num_folds));
  std::size_t pool_pos = 0;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const auto lo = std::floor(static_cast<double>(i) * test_fraction);
    const auto hi = std::floor(static_cast<double>(i + 1) * test_fraction);
    if (hi > lo) {
      test.push_back(sequence[i]);
    } else {
      folds[pool_pos++ % static_cast<std::size_t>(num_folds)].push_back(sequence[i]);
    }
  }
  std::sort(test.begin(), test.end());
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return SplitPlan(std::move(test), std::move(folds), seed);
}

}  // namespace mentor
