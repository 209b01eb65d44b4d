#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ttint/common.hpp"

namespace ttint {

/// Left and right interpolation sets of a tensor cross.
///
/// Interfaces are numbered q = 0..d-2 (between modes q and q+1). left[q]
/// holds multi-indices over modes 0..q, right[q] over modes q+1..d-1, and
/// |left[q]| = |right[q]| = r_q.
struct NestedIndexSets {
  std::vector<int> modes;
  std::vector<std::vector<MultiIndex>> left;
  std::vector<std::vector<MultiIndex>> right;

  int dimension() const noexcept { return static_cast<int>(modes.size()); }
  int interfaces() const noexcept { return dimension() - 1; }
  /// r_q, with r_{-1} = r_{d-1} = 1.
  Index rank(int q) const;
  std::vector<Index> ranks() const;
  Index max_rank() const;

  /// Sizes, lengths, ranges and duplicates; throws InputError.
  void validate() const;

  /// Every set holds the single point restricted to its modes.
  static NestedIndexSets rank_one(std::vector<int> modes, const MultiIndex& point);
};

/// True iff left[q+1] ⊂ left[q] × {0..n_{q+1}-1} and
/// right[q] ⊂ {0..n_{q+1}-1} × right[q+1] for every q.
bool check_nestedness(const NestedIndexSets& sets);

/// Position of each element of left[q] inside the rows (alpha, i_q) of
/// fiber block q, flattened as alpha * n_q + i_q. Throws InputError if the
/// sets are not nested.
std::vector<Index> left_positions(const NestedIndexSets& sets, int q);

/// Position of each element of right[q] inside the columns (i_{q+1}, beta)
/// of superblock q, flattened as beta * n_{q+1} + i_{q+1}.
std::vector<Index> right_positions(const NestedIndexSets& sets, int q);

/// Tensor cross interpolant
///   A(i_1..i_d) ≈ F_1(i_1) M_1^{-1} F_2(i_2) M_2^{-1} ... F_d(i_d)
/// with fiber blocks F_c = A(I_{<=c-1}, i_c, I_{>c}) stored as
/// (r_{c-1} n_c) x r_c matrices (row alpha * n_c + i) and intersections
/// M_q = A(I_{<=q}, I_{>q}) read off the fiber blocks.
///
/// The inverses are never formed: each G_c = F_c M_c^{-1} is computed from a
/// QR factorization of F_c, and evaluation/contraction use the G_c.
/// Immutable once constructed.
class TTCrossModel {
 public:
  TTCrossModel() = default;
  /// Throws DegeneracyError when an intersection is singular and
  /// InputError when the sets are not nested or blocks are mis-sized.
  TTCrossModel(NestedIndexSets sets, std::vector<Matrix> fibers);

  int dimension() const noexcept { return sets_.dimension(); }
  const std::vector<int>& mode_sizes() const noexcept { return sets_.modes; }
  const NestedIndexSets& sets() const noexcept { return sets_; }
  const std::vector<Matrix>& fibers() const noexcept { return fibers_; }
  const Matrix& fiber(int c) const { return fibers_.at(c); }
  /// F_c M_c^{-1} (or F_d for the last mode).
  const Matrix& factor(int c) const { return factors_.at(c); }
  const std::vector<Matrix>& factors() const noexcept { return factors_; }
  std::vector<Index> ranks() const { return sets_.ranks(); }
  /// Reciprocal condition estimates of the intersections.
  const std::vector<Scalar>& rcond() const noexcept { return rcond_; }

  Matrix intersection(int q) const;

  Scalar operator()(std::span<const int> index) const;

  /// Σ_i w_i G_c(i), an r_{c-1} x r_c matrix.
  Matrix weighted_factor(int c, const Vector& weights) const;

  /// Σ over the whole grid of Π_c w_c(i_c) Ã(i).
  Scalar contract(const std::vector<Vector>& weights) const;

  /// Number of stored tensor entries.
  std::size_t stored_entries() const;

 private:
  NestedIndexSets sets_;
  std::vector<Matrix> fibers_;
  std::vector<Matrix> factors_;
  std::vector<Scalar> rcond_;
};

/// Pointwise value of the interpolant.
Scalar tt_eval(const TTCrossModel& model, std::span<const int> index);

/// Product of weighted factors c_begin..c_end-1 (r_{c_begin-1} x r_{c_end-1}).
Matrix weighted_chain(const std::vector<Matrix>& factors, const std::vector<int>& modes, int c_begin, int c_end,
                      const std::vector<Vector>& weights);

/// Weighted factor for a single core given its G block.
Matrix weighted_block(const Matrix& factor, int mode_size, const Vector& weights);

struct ConvergenceRecord {
  int sweep = 0;
  Index max_rank = 0;
  std::uint64_t n_eval = 0;
  Scalar estimate = 0;
  std::int64_t exponent_offset = 0;
  Scalar rel_change = 0;
  double wall_seconds = 0;
  int pivots_added = 0;
};

/// Per-sweep history; N_eval nondecreasing and sweep index increasing.
class ConvergenceLog {
 public:
  /// Throws InputError when a record breaks the ordering invariants.
  void append(const ConvergenceRecord& record);
  const std::vector<ConvergenceRecord>& records() const noexcept { return records_; }
  bool empty() const noexcept { return records_.empty(); }
  const ConvergenceRecord& back() const { return records_.back(); }
  std::size_t size() const noexcept { return records_.size(); }

 private:
  std::vector<ConvergenceRecord> records_;
};

}  // namespace ttint
