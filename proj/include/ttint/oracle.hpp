#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ttint/common.hpp"

namespace ttint {

/// Deterministic map from a full multi-index of a d-mode grid to a scalar.
///
/// Copies share the evaluation counter, so a driver can hand copies to
/// several workers and still read one global N_eval. The callback must be
/// safe to call concurrently.
class FunctionOracle {
 public:
  using Callback = std::function<Scalar(std::span<const int>)>;

  FunctionOracle(std::vector<int> mode_sizes, Callback callback);

  int dimension() const noexcept { return static_cast<int>(modes_.size()); }
  const std::vector<int>& mode_sizes() const noexcept { return modes_; }
  int mode_size(int k) const { return modes_.at(k); }

  /// Validated evaluation; throws InputError on a wrong length or an
  /// out-of-range entry. Counts one callback invocation.
  Scalar operator()(std::span<const int> index) const;

  /// Evaluation without range checks, used on hot paths that construct
  /// indices themselves.
  Scalar evaluate_unchecked(std::span<const int> index) const {
    count_->fetch_add(1, std::memory_order_relaxed);
    return callback_(index);
  }

  std::uint64_t eval_count() const noexcept { return count_->load(std::memory_order_relaxed); }
  void reset_count() noexcept { count_->store(0); }

  bool in_range(std::span<const int> index) const noexcept;

 private:
  std::vector<int> modes_;
  Callback callback_;
  std::shared_ptr<std::atomic<std::uint64_t>> count_;
};

struct EvaluatorOptions {
  bool memoize = true;
  /// Cache entries kept before the cache is flushed.
  std::size_t cache_capacity = std::size_t{1} << 21;
  /// Concurrent evaluators used for large batches.
  int threads = 1;
};

/// Batched, optionally memoizing front end to a FunctionOracle.
///
/// The oracle counter only moves on real callback invocations, so cache hits
/// are free in N_eval. Thread-safe; batches are evaluated with up to
/// `threads` concurrent callers.
class Evaluator {
 public:
  explicit Evaluator(const FunctionOracle& oracle, EvaluatorOptions options = {});

  const FunctionOracle& oracle() const noexcept { return oracle_; }
  int dimension() const noexcept { return oracle_.dimension(); }

  Scalar operator()(std::span<const int> index);

  /// Evaluate `out.size()` indices stored back to back in `flat`
  /// (each of length dimension()).
  void evaluate(std::span<const int> flat, std::span<Scalar> out);

  std::uint64_t cache_hits() const noexcept { return hits_.load(); }
  std::size_t cache_size() const;
  void clear_cache();

 private:
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept { return static_cast<std::size_t>(k.first ^ (k.second * 0x9E3779B97F4A7C15ull)); }
  };
  static Key make_key(std::span<const int> index) noexcept;

  FunctionOracle oracle_;
  EvaluatorOptions options_;
  mutable std::mutex mutex_;
  std::unordered_map<Key, Scalar, KeyHash> cache_;
  std::atomic<std::uint64_t> hits_{0};
};

/// Split a multi-index into the row part (first k entries) and the column
/// part (the rest) of the k-th unfolding. Requires 1 <= k < size.
std::pair<MultiIndex, MultiIndex> split_index(const MultiIndex& index, int k);

/// Concatenate left and right parts.
MultiIndex join_index(const MultiIndex& left, const MultiIndex& right);

}  // namespace ttint
