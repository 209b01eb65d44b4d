#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "ttint/oracle.hpp"
#include "ttint/tt_model.hpp"

namespace testing {

using namespace ttint;

// Random tensor train with prescribed bond ranks; entries are the product of
// Gaussian cores.
struct RandomTT {
  std::vector<int> modes;
  std::vector<std::vector<Matrix>> cores;  // cores[k][i] is r_{k-1} x r_k

  RandomTT(std::vector<int> n, const std::vector<int>& ranks, std::uint64_t seed) : modes(std::move(n)) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const int d = static_cast<int>(modes.size());
    for (int k = 0; k < d; ++k) {
      const int rl = k == 0 ? 1 : ranks[k - 1];
      const int rr = k == d - 1 ? 1 : ranks[k];
      std::vector<Matrix> c;
      for (int i = 0; i < modes[k]; ++i) {
        Matrix m(rl, rr);
        for (Index a = 0; a < m.size(); ++a) m.data()[a] = g(rng);
        c.push_back(m);
      }
      cores.push_back(std::move(c));
    }
  }

  Scalar operator()(std::span<const int> idx) const {
    Matrix v = cores[0][idx[0]];
    for (std::size_t k = 1; k < cores.size(); ++k) v = v * cores[k][idx[k]];
    return v(0, 0);
  }

  FunctionOracle oracle() const {
    auto self = std::make_shared<RandomTT>(*this);
    return FunctionOracle(modes, [self](std::span<const int> idx) { return (*self)(idx); });
  }
};

// Visit every multi-index of the grid in lexicographic order.
inline void for_each_index(const std::vector<int>& modes, const std::function<void(const MultiIndex&)>& fn) {
  MultiIndex idx(modes.size(), 0);
  while (true) {
    fn(idx);
    std::size_t k = 0;
    while (k < modes.size() && ++idx[k] == modes[k]) idx[k++] = 0;
    if (k == modes.size()) return;
  }
}

// Max relative error of the model over the full grid against `exact`.
template <class F>
double max_rel_error(const TTCrossModel& model, F&& exact) {
  double err = 0, scale = 0;
  for_each_index(model.mode_sizes(), [&](const MultiIndex& idx) {
    const double e = exact(std::span<const int>(idx));
    scale = std::max(scale, std::abs(e));
    err = std::max(err, std::abs(e - model(idx)));
  });
  return err / scale;
}

// Smooth test function 1 / (1 + Σ c_k t_k) on a uniform interior grid.
inline FunctionOracle smooth_oracle(std::vector<int> modes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> c(modes.size());
  for (auto& v : c) v = u(rng);
  auto nodes = modes;
  return FunctionOracle(modes, [c, nodes](std::span<const int> idx) {
    double s = 1;
    for (std::size_t k = 0; k < idx.size(); ++k) s += c[k] * (idx[k] + 0.5) / nodes[k];
    return 1.0 / s;
  });
}

}  // namespace testing
