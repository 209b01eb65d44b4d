#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ttint/common.hpp"
#include "ttint/quadrature.hpp"

namespace ttint {

/// Counter-based uniform generator: value k of stream s under seed is a pure
/// function of (seed, s, k).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : key_(mix64(seed ^ mix64(stream + 0x5851F42D4C957F2Dull))) {}
  std::uint64_t bits(std::uint64_t counter) const noexcept { return mix64(key_ + mix64(counter)); }
  /// Uniform in [0,1) with 53 random bits.
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

/// Rank-1 lattice generating vector.
struct LatticeRule {
  std::vector<std::int64_t> q;
  std::int64_t design_size = 0;
  std::string source;

  int dimension() const noexcept { return static_cast<int>(q.size()); }
  /// Optional `# dim=<D> n=<N>` header line, then one integer per line.
  static LatticeRule load(const std::filesystem::path& path);
  static LatticeRule parse(const std::string& text, std::string source = "<memory>");
};

/// Fixed-order pairwise sum.
Scalar pairwise_sum(std::span<const Scalar> values);

/// Mean of f at N uniform points of [0,1]^d; stream selects an independent
/// sequence under the same seed.
Scalar mc_integrate(const PointFunction& f, int d, std::uint64_t n, std::uint64_t seed, std::uint64_t stream = 0,
                    int threads = 1);

/// x_i = frac(i q / N + s), i = 1..N, row-major N x d.
std::vector<Scalar> qmc_points(const LatticeRule& rule, int d, std::uint64_t n, std::span<const Scalar> shift);

/// Equal-weight lattice estimate with one shift.
Scalar qmc_estimate(const PointFunction& f, const LatticeRule& rule, int d, std::uint64_t n,
                    std::span<const Scalar> shift, int threads = 1);

struct StdEstimate {
  Scalar mean = 0;
  /// Relative std, or the absolute std when `absolute` is set.
  Scalar rel_std = 0;
  bool absolute = false;
};

/// mean and (1/mean) sqrt(Σ (I_j - mean)^2 / (S - 1)). Falls back to the
/// absolute std when the mean is zero.
StdEstimate std_estimate(std::span<const Scalar> estimates);

struct EstimateBatch {
  std::vector<Scalar> estimates;
  Scalar mean = 0;
  Scalar rel_std = 0;
  bool absolute = false;
  std::uint64_t n_per_estimate = 0;
};

/// S random shifts of the lattice.
EstimateBatch qmc_integrate(const PointFunction& f, const LatticeRule& rule, int d, std::uint64_t n, int s,
                            std::uint64_t seed, int threads = 1);

/// S independent MC estimates (streams 0..S-1).
EstimateBatch mc_batch(const PointFunction& f, int d, std::uint64_t n, int s, std::uint64_t seed, int threads = 1);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace ttint
