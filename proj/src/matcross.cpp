#include "ttint/matcross.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace ttint {

namespace {

constexpr Scalar kEps = std::numeric_limits<Scalar>::epsilon();

// Lowest-index argmax of |v|.
template <typename V>
Index argmax_abs(const V& v) {
  Index best = 0;
  Scalar best_val = -1;
  for (Index k = 0; k < v.size(); ++k) {
    Scalar a = std::abs(v(k));
    if (a > best_val) {
      best_val = a;
      best = k;
    }
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// MatrixAccess

Scalar MatrixAccess::operator()(Index i, Index j) const {
  Cell c{i, j};
  Scalar v{};
  gather(std::span<const Cell>(&c, 1), std::span<Scalar>(&v, 1));
  return v;
}

Vector MatrixAccess::column(Index j) const {
  std::vector<Cell> cells(rows());
  for (Index i = 0; i < rows(); ++i) cells[i] = {i, j};
  Vector out(rows());
  gather(cells, std::span<Scalar>(out.data(), out.size()));
  return out;
}

RowVector MatrixAccess::row(Index i) const {
  std::vector<Cell> cells(cols());
  for (Index j = 0; j < cols(); ++j) cells[j] = {i, j};
  RowVector out(cols());
  gather(cells, std::span<Scalar>(out.data(), out.size()));
  return out;
}

Matrix MatrixAccess::block(std::span<const Index> rs, std::span<const Index> cs) const {
  std::vector<Cell> cells;
  cells.reserve(rs.size() * cs.size());
  for (Index c : cs)
    for (Index r : rs) cells.push_back({r, c});
  Matrix out(static_cast<Index>(rs.size()), static_cast<Index>(cs.size()));
  gather(cells, std::span<Scalar>(out.data(), out.size()));
  return out;
}

Matrix MatrixAccess::dense() const {
  std::vector<Index> rs(rows()), cs(cols());
  std::iota(rs.begin(), rs.end(), Index{0});
  std::iota(cs.begin(), cs.end(), Index{0});
  return block(rs, cs);
}

void DenseAccess::gather(std::span<const Cell> cells, std::span<Scalar> out) const {
  for (std::size_t k = 0; k < cells.size(); ++k) out[k] = a_(cells[k].row, cells[k].col);
  reads_ += cells.size();
}

FunctionAccess::FunctionAccess(Index m, Index n, std::function<Scalar(Index, Index)> entry)
    : m_(m), n_(n), entry_(std::move(entry)) {
  if (m < 1 || n < 1) throw InputError("matrix dimensions must be positive");
}

void FunctionAccess::gather(std::span<const Cell> cells, std::span<Scalar> out) const {
  for (std::size_t k = 0; k < cells.size(); ++k) out[k] = entry_(cells[k].row, cells[k].col);
}

void CrossSets::validate(Index m, Index n) const {
  if (rows.size() != cols.size()) throw InputError("cross row and column sets differ in size");
  auto check = [](const std::vector<Index>& s, Index limit, const char* what) {
    std::unordered_set<Index> seen;
    for (Index v : s) {
      if (v < 0 || v >= limit) throw InputError(std::string("cross ") + what + " index out of range");
      if (!seen.insert(v).second) throw InputError(std::string("duplicate cross ") + what);
    }
  };
  check(rows, m, "row");
  check(cols, n, "column");
}

// ---------------------------------------------------------------------------
// Skeleton

Matrix interpolation_matrix(const Matrix& tall, std::span<const Index> rows, Scalar* rcond_out) {
  const Index m = tall.rows(), r = tall.cols();
  if (static_cast<Index>(rows.size()) != r) throw InputError("row selection size must equal column count");
  if (r == 0) {
    if (rcond_out) *rcond_out = 1;
    return Matrix(m, 0);
  }
  Eigen::HouseholderQR<Matrix> qr(tall);
  const Matrix& packed = qr.matrixQR();
  Scalar rmax = 0, rmin = std::numeric_limits<Scalar>::max();
  for (Index k = 0; k < r; ++k) {
    rmax = std::max(rmax, std::abs(packed(k, k)));
    rmin = std::min(rmin, std::abs(packed(k, k)));
  }
  if (!(rmin > 16 * kEps * rmax)) throw DegeneracyError(0, "fiber block is rank deficient");

  Matrix q = qr.householderQ() * Matrix::Identity(m, r);
  Matrix q_sel(r, r);
  for (Index s = 0; s < r; ++s) q_sel.row(s) = q.row(rows[s]);
  Eigen::PartialPivLU<Matrix> lu(q_sel.transpose());
  Scalar rc = lu.rcond();
  if (rcond_out) *rcond_out = rc;
  if (!(rc > 16 * kEps)) throw DegeneracyError(0, "intersection matrix is singular");
  Matrix left = lu.solve(q.transpose()).transpose();
  // Exact identity on the cross rows.
  for (Index s = 0; s < r; ++s) {
    left.row(rows[s]).setZero();
    left(rows[s], s) = 1;
  }
  return left;
}

Skeleton::Skeleton(CrossSets cross, Matrix columns, Matrix rows_block)
    : m_(columns.rows()),
      n_(rows_block.cols()),
      cross_(std::move(cross)),
      columns_(std::move(columns)),
      rows_block_(std::move(rows_block)) {
  if (columns_.cols() != cross_.rank() || rows_block_.rows() != cross_.rank())
    throw InputError("stored cross blocks do not match the cross rank");
  cross_.validate(m_, n_);
  refactor();
}

Skeleton Skeleton::build(const MatrixAccess& acc, CrossSets cross) {
  cross.validate(acc.rows(), acc.cols());
  std::vector<Index> all_rows(acc.rows()), all_cols(acc.cols());
  std::iota(all_rows.begin(), all_rows.end(), Index{0});
  std::iota(all_cols.begin(), all_cols.end(), Index{0});
  Matrix cols = acc.block(all_rows, cross.cols);
  Matrix rows = acc.block(cross.rows, all_cols);
  if (cross.rank() == 0) {
    Skeleton s(acc.rows(), acc.cols());
    return s;
  }
  return Skeleton(std::move(cross), std::move(cols), std::move(rows));
}

void Skeleton::refactor() { left_ = interpolation_matrix(columns_, cross_.rows, &rcond_); }

Scalar Skeleton::approx(Index i, Index j) const {
  if (rank() == 0) return 0;
  return left_.row(i).dot(rows_block_.col(j));
}

void Skeleton::add_pivot(Index i, Index j, const Vector& column, const RowVector& row) {
  if (column.size() != m_ || row.size() != n_) throw InputError("pivot column/row has wrong length");
  if (std::find(cross_.rows.begin(), cross_.rows.end(), i) != cross_.rows.end() ||
      std::find(cross_.cols.begin(), cross_.cols.end(), j) != cross_.cols.end())
    throw InputError("pivot already in the cross");
  const Index r = rank();
  Matrix old_cols = columns_, old_rows = rows_block_;
  columns_.conservativeResize(m_, r + 1);
  columns_.col(r) = column;
  rows_block_.conservativeResize(r + 1, n_);
  rows_block_.row(r) = row;
  cross_.rows.push_back(i);
  cross_.cols.push_back(j);
  try {
    refactor();
  } catch (...) {
    columns_ = std::move(old_cols);
    rows_block_ = std::move(old_rows);
    cross_.rows.pop_back();
    cross_.cols.pop_back();
    throw;
  }
}

Scalar skeleton_eval(const MatrixAccess& acc, const CrossSets& cross, Index i, Index j) {
  if (cross.rank() == 0) return 0;
  return Skeleton::build(acc, cross).approx(i, j);
}

Scalar residual(const MatrixAccess& acc, const CrossSets& cross, Index i, Index j) {
  return acc(i, j) - skeleton_eval(acc, cross, i, j);
}

// ---------------------------------------------------------------------------
// maxvol

SwapResult maxvol_swap_step(const Matrix& tall, std::vector<Index>& rows, Scalar swap_tol) {
  Matrix b = interpolation_matrix(tall, rows);
  SwapResult res;
  Scalar best = -1;
  for (Index i = 0; i < b.rows(); ++i)
    for (Index t = 0; t < b.cols(); ++t)
      if (std::abs(b(i, t)) > best) {
        best = std::abs(b(i, t));
        res.row_in = i;
        res.row_out = t;
      }
  res.ratio = best;
  if (best <= 1 + swap_tol) {
    res.row_in = res.row_out = -1;
    return res;
  }
  res.swapped = true;
  const Index slot = res.row_out;
  res.row_out = rows[slot];
  rows[slot] = res.row_in;
  return res;
}

SwapResult maxvol_swap_step(const MatrixAccess& acc, CrossSets& cross, Scalar swap_tol) {
  cross.validate(acc.rows(), acc.cols());
  std::vector<Index> all_rows(acc.rows());
  std::iota(all_rows.begin(), all_rows.end(), Index{0});
  Matrix tall = acc.block(all_rows, cross.cols);
  return maxvol_swap_step(tall, cross.rows, swap_tol);
}

MaxvolResult maxvol(const Matrix& tall, std::vector<Index> initial, Scalar swap_tol, int max_swaps) {
  const Index m = tall.rows(), r = tall.cols();
  if (r > m) throw InputError("maxvol needs at least as many rows as columns");
  MaxvolResult out;
  if (r == 0) {
    out.converged = true;
    return out;
  }
  if (initial.empty()) {
    // Gaussian elimination with row pivoting picks a well-conditioned start.
    Matrix work = tall;
    std::vector<char> used(m, 0);
    const Scalar scale = tall.cwiseAbs().maxCoeff();
    for (Index c = 0; c < r; ++c) {
      Index piv = -1;
      Scalar best = -1;
      for (Index i = 0; i < m; ++i)
        if (!used[i] && std::abs(work(i, c)) > best) {
          best = std::abs(work(i, c));
          piv = i;
        }
      if (!(best > 16 * kEps * scale)) throw DegeneracyError(0, "maxvol input is rank deficient");
      used[piv] = 1;
      initial.push_back(piv);
      if (c + 1 < r) {
        RowVector prow = work.row(piv).tail(r - c - 1) / work(piv, c);
        work.rightCols(r - c - 1).noalias() -= work.col(c) * prow;
      }
    }
  }
  out.rows = std::move(initial);
  for (out.swaps = 0; out.swaps < max_swaps; ++out.swaps) {
    SwapResult s = maxvol_swap_step(tall, out.rows, swap_tol);
    if (!s.swapped) {
      out.converged = true;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// greedy cross step

CrossStepResult cross_expand_step(const MatrixAccess& acc, const Skeleton& skeleton, const CrossStepOptions& options,
                                  std::mt19937_64& rng, Scalar scale, std::optional<Cell> start) {
  const Index m = acc.rows(), n = acc.cols();
  if (skeleton.rows() != m || skeleton.cols() != n) throw InputError("skeleton does not match the matrix");
  if (options.rook_budget < 1) throw InputError("rook budget must be at least 1");

  CrossStepResult res;
  std::vector<char> row_in(m, 0), col_in(n, 0);
  for (Index i : skeleton.cross().rows) row_in[i] = 1;
  for (Index j : skeleton.cross().cols) col_in[j] = 1;
  std::vector<Index> free_rows, free_cols;
  for (Index i = 0; i < m; ++i)
    if (!row_in[i]) free_rows.push_back(i);
  for (Index j = 0; j < n; ++j)
    if (!col_in[j]) free_cols.push_back(j);
  if (free_rows.empty() || free_cols.empty()) return res;  // cross spans the matrix

  const Matrix& left = skeleton.interpolation();
  const Matrix& rows_block = skeleton.rows_block();
  const bool empty = skeleton.rank() == 0;
  auto approx_col = [&](Index j) -> Vector {
    if (empty) return Vector::Zero(m);
    return left * rows_block.col(j);
  };
  auto approx_row = [&](Index i) -> RowVector {
    if (empty) return RowVector::Zero(n);
    return left.row(i) * rows_block;
  };

  Cell pivot{};
  if (start) {
    pivot = *start;
  } else {
    const Index probes = options.probe_count > 0 ? options.probe_count : m + n;
    if (probes < 1) throw InputError("probe count must be at least 1");
    std::uniform_int_distribution<std::size_t> pick_row(0, free_rows.size() - 1), pick_col(0, free_cols.size() - 1);
    std::vector<Cell> cells(probes);
    for (auto& c : cells) {
      c.row = free_rows[pick_row(rng)];
      c.col = free_cols[pick_col(rng)];
    }
    std::vector<Scalar> vals(probes);
    acc.gather(cells, vals);
    res.requested += probes;
    std::vector<std::pair<Scalar, Cell>> ranked(probes);
    for (Index p = 0; p < probes; ++p) {
      res.max_abs_sampled = std::max(res.max_abs_sampled, std::abs(vals[p]));
      ranked[p] = {std::abs(vals[p] - skeleton.approx(cells[p].row, cells[p].col)), cells[p]};
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      if (a.second.row != b.second.row) return a.second.row < b.second.row;
      return a.second.col < b.second.col;
    });
    for (const auto& [v, c] : ranked) {
      if (!res.ranked_probes.empty() && res.ranked_probes.back().row == c.row && res.ranked_probes.back().col == c.col)
        continue;
      res.ranked_probes.push_back(c);
    }
    pivot = res.ranked_probes.front();
  }

  Index i = pivot.row, j = pivot.col;
  Vector col_res;
  bool have_col = false;
  for (res.alternations = 0; res.alternations < options.rook_budget;) {
    res.column = acc.column(j);
    res.requested += m;
    res.max_abs_sampled = std::max(res.max_abs_sampled, res.column.cwiseAbs().maxCoeff());
    col_res = res.column - approx_col(j);
    have_col = true;
    i = argmax_abs(col_res);
    res.row_values = acc.row(i);
    res.requested += n;
    res.max_abs_sampled = std::max(res.max_abs_sampled, res.row_values.cwiseAbs().maxCoeff());
    RowVector row_res = res.row_values - approx_row(i);
    const Index j_next = argmax_abs(row_res);
    ++res.alternations;
    if (j_next == j) {
      res.rook_satisfied = true;
      break;
    }
    j = j_next;
    have_col = false;
  }
  if (!have_col) {
    res.column = acc.column(j);
    res.requested += m;
    res.max_abs_sampled = std::max(res.max_abs_sampled, res.column.cwiseAbs().maxCoeff());
    col_res = res.column - approx_col(j);
  }
  res.row = i;
  res.col = j;
  res.residual = col_res(i);

  const Scalar threshold = options.abs_tol + options.rel_tol * std::max(scale, res.max_abs_sampled);
  res.converged = !(std::abs(res.residual) > threshold) || row_in[i] || col_in[j];
  return res;
}

CrossStepResult cross_expand_step(const MatrixAccess& acc, const CrossSets& cross, const CrossStepOptions& options,
                                  std::mt19937_64& rng, Scalar scale) {
  Skeleton skel = cross.rank() == 0 ? Skeleton(acc.rows(), acc.cols()) : Skeleton::build(acc, cross);
  return cross_expand_step(acc, skel, options, rng, scale);
}

}  // namespace ttint
