#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ttint/matcross.hpp"
#include "ttint/oracle.hpp"
#include "ttint/tt_model.hpp"

namespace ttint {

/// Lazy view of the superblock A(I_{<=q-1} i_q, i_{q+1} I_{>q+1}).
///
/// Rows are flattened as alpha * n_q + i_q (alpha indexes I_{<=q-1}),
/// columns as beta * n_{q+1} + i_{q+1} (beta indexes I_{>q+1}). Entries go
/// through the evaluator on demand.
class Superblock final : public MatrixAccess {
 public:
  Superblock(Evaluator& evaluator, const NestedIndexSets& sets, int q);

  Index rows() const override { return m_; }
  Index cols() const override { return n_; }
  void gather(std::span<const Cell> cells, std::span<Scalar> out) const override;

  int interface() const noexcept { return q_; }
  /// (alpha, i_q)
  std::pair<Index, int> decode_row(Index row) const;
  /// (i_{q+1}, beta)
  std::pair<int, Index> decode_col(Index col) const;
  /// i_{<=q} of a row and i_{>q} of a column.
  MultiIndex left_part(Index row) const;
  MultiIndex right_part(Index col) const;
  MultiIndex full_index(Index row, Index col) const;

 private:
  Evaluator& eval_;
  const NestedIndexSets& sets_;
  int q_;
  int d_;
  int nq_, nq1_;
  Index m_, n_;
};

Superblock build_superblock(Evaluator& evaluator, const NestedIndexSets& sets, int q);

/// Sets plus fiber blocks F_c = A(I_{<=c-1}, i_c, I_{>c}) kept in step with
/// them. This is the mutable working copy of a sweep.
struct CrossState {
  NestedIndexSets sets;
  std::vector<Matrix> fibers;

  int dimension() const noexcept { return sets.dimension(); }
  /// Rank-1 state at `point`, fibers evaluated.
  static CrossState start(Evaluator& evaluator, const MultiIndex& point);
  /// Random nested sets with ranks min(r, available), fibers evaluated.
  static CrossState random(Evaluator& evaluator, Index rank, std::uint64_t seed);
  /// Evaluate every fiber block from the current sets.
  void rebuild(Evaluator& evaluator);
  TTCrossModel model() const { return TTCrossModel(sets, fibers); }
};

/// Fiber block c of `sets` evaluated through `evaluator`.
Matrix evaluate_fiber(Evaluator& evaluator, const NestedIndexSets& sets, int c);

/// Dense superblock q; throws ResourceError if it exceeds `cap` scalars.
Matrix evaluate_superblock(Evaluator& evaluator, const NestedIndexSets& sets, int q, std::size_t cap);

enum class SweepDirection { LeftToRight, RightToLeft };

struct SweepReport {
  /// Interfaces that received a pivot (greedy) or were updated.
  std::vector<int> pivot_interfaces;
  std::vector<Index> ranks;
  std::uint64_t evaluations = 0;
  /// Part of `evaluations` spent on superblocks (DMRG only).
  std::uint64_t superblock_evaluations = 0;
  /// Σ_q r_{q-1} n_q n_{q+1} r_{q+1} at the time each superblock was formed.
  std::uint64_t superblock_entries = 0;
  Scalar max_residual = 0;
  Scalar max_abs = 0;
  int swaps = 0;
  int rejected = 0;
};

/// Alternating-least-squares maxvol sweep at fixed ranks. Updates the left
/// sets (left-to-right) or right sets (right-to-left) and rebuilds fibers.
SweepReport als_sweep(Evaluator& evaluator, CrossState& state, SweepDirection direction = SweepDirection::LeftToRight,
                      Scalar swap_tol = 1e-2);

struct TruncatedSvd {
  Matrix u;
  Vector s;
  Matrix v;
  Index rank = 0;
};

/// Keeps the leading singular triplets; the discarded tail has squared sum
/// at most eps^2 times the total. At least one triplet is kept.
TruncatedSvd truncated_svd(const Matrix& a, Scalar eps);

/// Two-mode maxvol sweep with rank truncation at accuracy eps. After a
/// left-to-right pass the right sets are re-selected right-to-left at the
/// new ranks so that both families end nested (and mirrored).
SweepReport dmrg_maxvol_sweep(Evaluator& evaluator, CrossState& state, Scalar eps,
                              SweepDirection direction = SweepDirection::LeftToRight,
                              std::size_t superblock_cap = 10'000'000);

struct GreedyOptions {
  CrossStepOptions step;
  Index max_rank = 1000;
  /// Pivots rejected for a singular intersection before an interface gives up.
  int max_retries = 3;
};

/// Greedy step on a single interface; appends the pivot to the sets and
/// extends fibers q and q+1 from the step's raw row and column. Returns true
/// when a pivot was added.
bool greedy_update(Evaluator& evaluator, CrossState& state, int q, const GreedyOptions& options,
                   std::uint64_t step_seed, Scalar& scale, SweepReport& report);

/// Greedy sweep over interfaces [q_begin, q_end) in the given direction.
SweepReport greedy_sweep(Evaluator& evaluator, CrossState& state, const GreedyOptions& options, std::uint64_t seed,
                         int sweep, Scalar& scale, SweepDirection direction = SweepDirection::LeftToRight,
                         int q_begin = 0, int q_end = -1);

/// Seed of the greedy step at (sweep, interface); independent of worker layout.
std::uint64_t step_seed(std::uint64_t seed, int sweep, int q) noexcept;

enum class Strategy { Greedy, Als, Dmrg };

Strategy parse_strategy(const std::string& name);
std::string to_string(Strategy strategy);

struct CrossOptions {
  Strategy strategy = Strategy::Greedy;
  Scalar rel_tol = 1e-10;
  Index max_rank = 1000;
  int max_sweeps = 200;
  std::uint64_t seed = 1;
  /// Starting point; when empty, the mid-grid index refined by
  /// `start_sweeps` rank-1 maxvol sweeps.
  std::optional<MultiIndex> start;
  int start_sweeps = 4;
  /// Fixed rank of ALS runs (random nested start); 1 keeps the mid-grid start.
  Index initial_rank = 1;
  /// Probe and rook settings; the step tolerance is taken from rel_tol.
  CrossStepOptions step;
  int max_retries = 3;
  std::size_t superblock_cap = 10'000'000;
  EvaluatorOptions evaluator;
  /// Per-mode weights of the convergence functional; unit weights when empty.
  std::vector<Vector> weights;
  /// Sweeps the functional must stay within rel_tol before stopping.
  int stable_sweeps = 2;
};

struct CrossResult {
  TTCrossModel model;
  ConvergenceLog log;
  bool converged = false;
  std::uint64_t n_eval = 0;
  Scalar functional = 0;
  /// Interfaces touched by every greedy sweep, in order (for determinism tests).
  std::vector<std::vector<MultiIndex>> pivot_history;
};

/// Mid-grid start point (n_k - 1) / 2 in every mode (0-based).
MultiIndex mid_grid(const std::vector<int>& modes);

/// Rank-1 maxvol sweeps from `point`: each index moves to the largest |A|
/// along its fiber. Stops after `sweeps` sweeps or when nothing moves.
MultiIndex ascend_start(Evaluator& evaluator, MultiIndex point, int sweeps);

/// Start point used by the drivers.
MultiIndex initial_point(Evaluator& evaluator, const CrossOptions& options);

/// Σ Π_c w_c(i_c) Ã(i) from the factors, with unit weights when `weights` is empty.
Scalar functional_value(const TTCrossModel& model, const std::vector<Vector>& weights);

/// Relative change |a - b| / max(|a|, tiny).
Scalar relative_change(Scalar current, Scalar previous) noexcept;

/// Sequential cross interpolation driver.
CrossResult cross_interpolate(const FunctionOracle& oracle, const CrossOptions& options);

}  // namespace ttint
