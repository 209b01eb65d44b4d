#include "ttint/oracle.hpp"

#include <algorithm>
#include <thread>

namespace ttint {

namespace {

// Batches smaller than this are evaluated on the calling thread.
constexpr std::size_t kMinParallelBatch = 64;

}  // namespace

FunctionOracle::FunctionOracle(std::vector<int> mode_sizes, Callback callback)
    : modes_(std::move(mode_sizes)),
      callback_(std::move(callback)),
      count_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  if (modes_.empty()) throw InputError("oracle needs at least one mode");
  for (int n : modes_)
    if (n < 1) throw InputError("mode sizes must be positive");
  if (!callback_) throw InputError("oracle callback is empty");
}

bool FunctionOracle::in_range(std::span<const int> index) const noexcept {
  if (index.size() != modes_.size()) return false;
  for (std::size_t k = 0; k < index.size(); ++k)
    if (index[k] < 0 || index[k] >= modes_[k]) return false;
  return true;
}

Scalar FunctionOracle::operator()(std::span<const int> index) const {
  if (index.size() != modes_.size())
    throw InputError("multi-index length " + std::to_string(index.size()) + " does not match dimension " +
                     std::to_string(modes_.size()));
  for (std::size_t k = 0; k < index.size(); ++k)
    if (index[k] < 0 || index[k] >= modes_[k])
      throw InputError("index entry " + std::to_string(index[k] + 1) + " out of range 1.." +
                       std::to_string(modes_[k]) + " in mode " + std::to_string(k + 1));
  return evaluate_unchecked(index);
}

Evaluator::Evaluator(const FunctionOracle& oracle, EvaluatorOptions options)
    : oracle_(oracle), options_(options) {
  options_.threads = std::max(1, options_.threads);
}

Evaluator::Key Evaluator::make_key(std::span<const int> index) noexcept {
  std::uint64_t a = 0x243F6A8885A308D3ull, b = 0x13198A2E03707344ull;
  for (int v : index) {
    a = mix64(a ^ static_cast<std::uint64_t>(v));
    b = mix64(b + static_cast<std::uint64_t>(v) * 0xA4093822299F31D0ull);
  }
  return {a, b};
}

Scalar Evaluator::operator()(std::span<const int> index) {
  Scalar value{};
  evaluate(index, std::span<Scalar>(&value, 1));
  return value;
}

void Evaluator::evaluate(std::span<const int> flat, std::span<Scalar> out) {
  const std::size_t d = static_cast<std::size_t>(dimension());
  const std::size_t count = out.size();
  if (flat.size() != count * d) throw InputError("flat index buffer has wrong length");

  std::vector<std::size_t> misses;
  std::vector<Key> keys;
  if (options_.memoize) {
    keys.resize(count);
    std::unique_lock lock(mutex_);
    for (std::size_t c = 0; c < count; ++c) {
      keys[c] = make_key(flat.subspan(c * d, d));
      if (auto it = cache_.find(keys[c]); it != cache_.end()) {
        out[c] = it->second;
        hits_.fetch_add(1, std::memory_order_relaxed);
      } else {
        misses.push_back(c);
      }
    }
    // Duplicates inside one batch are evaluated once.
    std::vector<std::size_t> unique;
    unique.reserve(misses.size());
    std::unordered_map<Key, std::size_t, KeyHash> first;
    std::vector<std::pair<std::size_t, std::size_t>> dup;
    for (std::size_t c : misses) {
      auto [it, inserted] = first.emplace(keys[c], c);
      if (inserted)
        unique.push_back(c);
      else
        dup.emplace_back(c, it->second);
    }
    misses.swap(unique);
    // Evaluate outside the lock.
    lock.unlock();
    {
      const int threads = misses.size() >= kMinParallelBatch ? options_.threads : 1;
      auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
          std::size_t c = misses[m];
          out[c] = oracle_.evaluate_unchecked(flat.subspan(c * d, d));
        }
      };
      if (threads == 1) {
        work(0, misses.size());
      } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (misses.size() + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
          std::size_t b = t * chunk, e = std::min(misses.size(), b + chunk);
          if (b < e) pool.emplace_back(work, b, e);
        }
      }
    }
    lock.lock();
    for (auto [c, src] : dup) {
      out[c] = out[src];
      hits_.fetch_add(1, std::memory_order_relaxed);
    }
    if (cache_.size() + misses.size() > options_.cache_capacity) cache_.clear();
    for (std::size_t c : misses) cache_.emplace(keys[c], out[c]);
    return;
  }

  const int threads = count >= kMinParallelBatch ? options_.threads : 1;
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) out[c] = oracle_.evaluate_unchecked(flat.subspan(c * d, d));
  };
  if (threads == 1) {
    work(0, count);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      std::size_t b = t * chunk, e = std::min(count, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
}

std::size_t Evaluator::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

void Evaluator::clear_cache() {
  std::lock_guard lock(mutex_);
  cache_.clear();
}

std::pair<MultiIndex, MultiIndex> split_index(const MultiIndex& index, int k) {
  if (k < 1 || k >= static_cast<int>(index.size()))
    throw InputError("split position " + std::to_string(k) + " outside 1.." + std::to_string(index.size() - 1));
  return {MultiIndex(index.begin(), index.begin() + k), MultiIndex(index.begin() + k, index.end())};
}

MultiIndex join_index(const MultiIndex& left, const MultiIndex& right) {
  MultiIndex out;
  out.reserve(left.size() + right.size());
  out.insert(out.end(), left.begin(), left.end());
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

}  // namespace ttint
