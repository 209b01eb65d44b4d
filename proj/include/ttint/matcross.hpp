#pragma once

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ttint/common.hpp"

namespace ttint {

struct Cell {
  Index row;
  Index col;
};

/// Lazy m x n matrix. Implementations provide batched entry access; the
/// cross algorithms never ask for more than a few rows and columns at once.
class MatrixAccess {
 public:
  virtual ~MatrixAccess() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual void gather(std::span<const Cell> cells, std::span<Scalar> out) const = 0;

  Scalar operator()(Index i, Index j) const;
  Vector column(Index j) const;
  RowVector row(Index i) const;
  /// A(rows, cols) as a dense block.
  Matrix block(std::span<const Index> rows, std::span<const Index> cols) const;
  Matrix dense() const;
};

/// View of a dense matrix; counts entry reads.
class DenseAccess final : public MatrixAccess {
 public:
  explicit DenseAccess(Matrix a) : a_(std::move(a)) {
    if (a_.rows() < 1 || a_.cols() < 1) throw InputError("matrix dimensions must be positive");
  }

  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  void gather(std::span<const Cell> cells, std::span<Scalar> out) const override;

  const Matrix& matrix() const noexcept { return a_; }
  std::uint64_t reads() const noexcept { return reads_; }
  void reset_reads() noexcept { reads_ = 0; }

 private:
  Matrix a_;
  mutable std::uint64_t reads_ = 0;
};

/// Entries from a callback (i, j) -> scalar.
class FunctionAccess final : public MatrixAccess {
 public:
  FunctionAccess(Index m, Index n, std::function<Scalar(Index, Index)> entry);

  Index rows() const override { return m_; }
  Index cols() const override { return n_; }
  void gather(std::span<const Cell> cells, std::span<Scalar> out) const override;

 private:
  Index m_, n_;
  std::function<Scalar(Index, Index)> entry_;
};

/// Row set I and column set J of a matrix cross, |I| = |J|.
struct CrossSets {
  std::vector<Index> rows;
  std::vector<Index> cols;

  Index rank() const noexcept { return static_cast<Index>(rows.size()); }
  /// Throws InputError on unequal sizes, duplicates or out-of-range entries.
  void validate(Index m, Index n) const;
};

/// Skeleton approximation A(i,J) A(I,J)^{-1} A(I,j) held in factored form.
///
/// `columns` = A(:,J) and `rows_block` = A(I,:) are stored; the interpolation
/// matrix `left` = A(:,J) A(I,J)^{-1} is formed through a Householder QR of
/// A(:,J), so the intersection is never inverted explicitly. With r = 0 the
/// approximation is identically zero.
class Skeleton {
 public:
  Skeleton(Index m, Index n) : m_(m), n_(n), columns_(m, 0), rows_block_(0, n), left_(m, 0) {}

  /// Build from stored blocks A(:,J) (m x r) and A(I,:) (r x n).
  Skeleton(CrossSets cross, Matrix columns, Matrix rows_block);

  /// Evaluates A(:,J) and A(I,:) through `acc`.
  static Skeleton build(const MatrixAccess& acc, CrossSets cross);

  Index rows() const noexcept { return m_; }
  Index cols() const noexcept { return n_; }
  Index rank() const noexcept { return cross_.rank(); }
  const CrossSets& cross() const noexcept { return cross_; }
  const Matrix& columns() const noexcept { return columns_; }
  const Matrix& rows_block() const noexcept { return rows_block_; }
  /// A(:,J) A(I,J)^{-1}; equals the identity on rows I.
  const Matrix& interpolation() const noexcept { return left_; }

  Scalar approx(Index i, Index j) const;
  /// Reciprocal condition estimate of the factor restricted to rows I.
  Scalar rcond() const noexcept { return rcond_; }

  /// Append pivot (i, j) with its full column A(:,j) and row A(i,:).
  /// Throws DegeneracyError if the enlarged intersection is singular.
  void add_pivot(Index i, Index j, const Vector& column, const RowVector& row);

 private:
  void refactor();

  Index m_ = 0, n_ = 0;
  CrossSets cross_;
  Matrix columns_;
  Matrix rows_block_;
  Matrix left_;
  Scalar rcond_ = 1;
};

/// Interpolation matrix A A(I,:)^{-1} of a tall m x r matrix with row
/// selection I, via QR. Throws DegeneracyError(0,..) when A(I,:) is singular
/// to working precision.
Matrix interpolation_matrix(const Matrix& tall, std::span<const Index> rows, Scalar* rcond_out = nullptr);

/// Ã(i,j) of the skeleton formula (zero for an empty cross).
Scalar skeleton_eval(const MatrixAccess& acc, const CrossSets& cross, Index i, Index j);

/// A(i,j) - Ã(i,j).
Scalar residual(const MatrixAccess& acc, const CrossSets& cross, Index i, Index j);

struct SwapResult {
  bool swapped = false;
  /// |B(i*, i†)|; the volume of A(I,J) is multiplied by this on a swap.
  Scalar ratio = 1;
  Index row_in = -1;
  Index row_out = -1;
};

/// One row exchange of the maxvol iteration on the columns J of `acc`.
/// Swaps only when the ratio exceeds 1 + swap_tol.
SwapResult maxvol_swap_step(const MatrixAccess& acc, CrossSets& cross, Scalar swap_tol = 1e-2);

/// Same step on a dense tall matrix whose columns are all used.
SwapResult maxvol_swap_step(const Matrix& tall, std::vector<Index>& rows, Scalar swap_tol = 1e-2);

struct MaxvolResult {
  std::vector<Index> rows;
  int swaps = 0;
  bool converged = false;
};

/// Dominant r x r submatrix rows of an m x r matrix. Starts from `initial`
/// when given, otherwise from the pivot rows of a fully pivoted LU, then
/// swaps until no entry of A A(I,:)^{-1} exceeds 1 + swap_tol.
MaxvolResult maxvol(const Matrix& tall, std::vector<Index> initial = {}, Scalar swap_tol = 1e-2,
                    int max_swaps = 200);

struct CrossStepOptions {
  /// Random probes; 0 selects m + n.
  Index probe_count = 0;
  /// Column/row alternations of the rook search.
  int rook_budget = 4;
  Scalar rel_tol = 1e-12;
  Scalar abs_tol = 0;
};

struct CrossStepResult {
  bool converged = true;
  Index row = -1;
  Index col = -1;
  /// A(row,col) - Ã(row,col) at the returned pivot.
  Scalar residual = 0;
  /// Raw entries A(:,col) and A(row,:) of the pivot (for fiber updates).
  Vector column;
  RowVector row_values;
  bool rook_satisfied = false;
  int alternations = 0;
  /// Largest |A| entry seen in this step.
  Scalar max_abs_sampled = 0;
  /// Entry reads requested from the access (before any caching).
  std::uint64_t requested = 0;
  /// Best probes in decreasing residual order (used for retries).
  std::vector<Cell> ranked_probes;
};

/// One greedy expansion step: random probes outside the cross, then rook
/// pivoting on the residual. `scale` is the caller's running max |A|; the
/// step reports convergence when the pivot residual is at most
/// abs_tol + rel_tol * max(scale, max |sampled|). Ties go to the lowest index.
/// `start` overrides the random probe stage with a given starting cell.
CrossStepResult cross_expand_step(const MatrixAccess& acc, const Skeleton& skeleton, const CrossStepOptions& options,
                                  std::mt19937_64& rng, Scalar scale = 0, std::optional<Cell> start = std::nullopt);

/// Convenience overload that factors the cross first.
CrossStepResult cross_expand_step(const MatrixAccess& acc, const CrossSets& cross, const CrossStepOptions& options,
                                  std::mt19937_64& rng, Scalar scale = 0);

}  // namespace ttint
