#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

namespace mentor {

/// Stratified test split plus cross-validation folds over the remaining teams.
/// The test indices sit behind an accessor that logs the first time they are read.
class SplitPlan {
 public:
  SplitPlan() = default;
  SplitPlan(std::vector<std::size_t> test, std::vector<std::vector<std::size_t>> folds, std::uint64_t seed);
  SplitPlan(const SplitPlan& other);
  SplitPlan& operator=(const SplitPlan& other);

  const std::vector<std::vector<std::size_t>>& folds() const { return folds_; }
  std::size_t num_folds() const { return folds_.size(); }
  /// Every non-test index, sorted.
  std::vector<std::size_t> train_pool() const;
  /// Pool minus fold k, sorted.
  std::vector<std::size_t> train_without_fold(std::size_t k) const;
  std::size_t test_size() const { return test_.size(); }
  std::uint64_t seed() const { return seed_; }

  const std::vector<std::size_t>& test() const;
  bool test_accessed() const { return accessed_.load(); }

 private:
  std::vector<std::size_t> test_;
  std::vector<std::vector<std::size_t>> folds_;
  std::uint64_t seed_{0};
  mutable std::atomic<bool> accessed_{false};
};

/// Throws ValidationError when a class has fewer members than folds.
SplitPlan make_split(std::span<const int> labels, int num_classes, std::uint64_t seed, int num_folds = 5,
                     double test_fraction = 0.2);

}  // namespace mentor
