#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ttint/parcross.hpp"

namespace ttint {

struct Rule1D {
  Vector nodes;
  Vector weights;
};

/// n-point Gauss–Legendre rule on [0,1], nodes increasing. 1 <= n <= 1025.
Rule1D gauss_legendre(int n);

/// Per-mode nodes and weights.
struct QuadratureGrid {
  std::vector<Vector> nodes;
  std::vector<Vector> weights;

  static QuadratureGrid uniform(int dimension, int n);
  static QuadratureGrid from_sizes(const std::vector<int>& sizes);

  int dimension() const noexcept { return static_cast<int>(nodes.size()); }
  std::vector<int> modes() const;
};

using PointFunction = std::function<Scalar(std::span<const Scalar>)>;

/// Tensor of f on the grid. With `fold` the entries are
/// w_{i_1}...w_{i_d} f(t_{i_1},...,t_{i_d}); `weight_scale` multiplies every
/// weight (integrate uses n_k so folded entries keep the size of f).
FunctionOracle weighted_oracle(PointFunction f, const QuadratureGrid& grid, bool fold = true,
                               const std::vector<Scalar>& weight_scale = {});

/// Σ_i Π_k w_k(i_k) Ã(i): quadrature weights for a raw model, unit weights
/// for a folded one. No oracle calls.
Scalar tt_integrate(const TTCrossModel& model, const QuadratureGrid& grid, bool folded);

/// Integrand description for integrate(). When `log10_value` is set, entries
/// are formed as 10^(log10 f + Σ log10 w - reference_exponent) and the result
/// carries reference_exponent in its exponent offset.
struct Integrand {
  int dimension = 1;
  PointFunction value;
  PointFunction log10_value;
  std::int64_t reference_exponent = 0;
};

struct IntegrateOptions {
  int n = 33;
  Strategy strategy = Strategy::Greedy;
  Scalar rel_tol = 1e-10;
  Index max_rank = 1000;
  int max_sweeps = 200;
  int workers = 1;
  int threads = 1;
  /// Fixed rank of ALS runs.
  Index initial_rank = 1;
  std::uint64_t seed = 1;
  bool fold = true;
  bool memoize = true;
};

struct IntegralResult {
  /// Integral = estimate * 10^exponent_offset.
  Scalar estimate = 0;
  std::int64_t exponent_offset = 0;
  std::uint64_t n_eval = 0;
  bool converged = false;
  ConvergenceLog log;
  std::vector<Index> ranks;
  int workers = 1;
  std::uint64_t messages = 0;
  TTCrossModel model;

  /// estimate * 10^exponent_offset in working precision (may underflow).
  Scalar value() const;
  /// log10 |integral|.
  double log10_value() const;
  /// Mantissa in [1,10) and decimal exponent.
  std::pair<Scalar, std::int64_t> normalized() const;
};

/// Grid, folded oracle, cross interpolation with the integral as the
/// convergence functional, contraction.
IntegralResult integrate(const Integrand& f, const IntegrateOptions& options);

/// Plain-function convenience overload.
IntegralResult integrate(PointFunction f, int dimension, const IntegrateOptions& options);

}  // namespace ttint
