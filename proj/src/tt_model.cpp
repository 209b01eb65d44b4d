#include "ttint/tt_model.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ttint/matcross.hpp"

namespace ttint {

Index NestedIndexSets::rank(int q) const {
  if (q < 0 || q >= interfaces()) return 1;
  return static_cast<Index>(left[q].size());
}

std::vector<Index> NestedIndexSets::ranks() const {
  std::vector<Index> r(std::max(0, interfaces()));
  for (int q = 0; q < interfaces(); ++q) r[q] = rank(q);
  return r;
}

Index NestedIndexSets::max_rank() const {
  Index r = 1;
  for (int q = 0; q < interfaces(); ++q) r = std::max(r, rank(q));
  return r;
}

void NestedIndexSets::validate() const {
  const int d = dimension();
  if (d < 1) throw InputError("index sets need at least one mode");
  if (static_cast<int>(left.size()) != d - 1 || static_cast<int>(right.size()) != d - 1)
    throw InputError("index sets must have d-1 interfaces");
  for (int q = 0; q + 1 < d; ++q) {
    if (left[q].size() != right[q].size()) throw InputError("left and right sets differ in size at an interface");
    if (left[q].empty()) throw InputError("empty interpolation set");
    auto check = [&](const std::vector<MultiIndex>& s, int first_mode, int length) {
      std::set<MultiIndex> seen;
      for (const auto& mi : s) {
        if (static_cast<int>(mi.size()) != length) throw InputError("multi-index has wrong length");
        for (int t = 0; t < length; ++t)
          if (mi[t] < 0 || mi[t] >= modes[first_mode + t]) throw InputError("multi-index entry out of range");
        if (!seen.insert(mi).second) throw InputError("duplicate multi-index in an interpolation set");
      }
    };
    check(left[q], 0, q + 1);
    check(right[q], q + 1, d - q - 1);
  }
}

NestedIndexSets NestedIndexSets::rank_one(std::vector<int> modes, const MultiIndex& point) {
  NestedIndexSets s;
  s.modes = std::move(modes);
  const int d = s.dimension();
  if (static_cast<int>(point.size()) != d) throw InputError("start point has wrong length");
  s.left.resize(d - 1);
  s.right.resize(d - 1);
  for (int q = 0; q + 1 < d; ++q) {
    s.left[q] = {MultiIndex(point.begin(), point.begin() + q + 1)};
    s.right[q] = {MultiIndex(point.begin() + q + 1, point.end())};
  }
  s.validate();
  return s;
}

bool check_nestedness(const NestedIndexSets& sets) {
  const int d = sets.dimension();
  for (int q = 1; q + 1 < d; ++q) {
    std::set<MultiIndex> prev(sets.left[q - 1].begin(), sets.left[q - 1].end());
    for (const auto& mi : sets.left[q])
      if (!prev.count(MultiIndex(mi.begin(), mi.end() - 1))) return false;
  }
  for (int q = 0; q + 2 < d; ++q) {
    std::set<MultiIndex> next(sets.right[q + 1].begin(), sets.right[q + 1].end());
    for (const auto& mi : sets.right[q])
      if (!next.count(MultiIndex(mi.begin() + 1, mi.end()))) return false;
  }
  return true;
}

std::vector<Index> left_positions(const NestedIndexSets& sets, int q) {
  const int n = sets.modes[q];
  std::vector<Index> pos;
  pos.reserve(sets.left[q].size());
  if (q == 0) {
    for (const auto& mi : sets.left[0]) pos.push_back(mi[0]);
    return pos;
  }
  std::map<MultiIndex, Index> where;
  for (Index a = 0; a < static_cast<Index>(sets.left[q - 1].size()); ++a) where.emplace(sets.left[q - 1][a], a);
  for (const auto& mi : sets.left[q]) {
    auto it = where.find(MultiIndex(mi.begin(), mi.end() - 1));
    if (it == where.end()) throw InputError("left sets are not nested");
    pos.push_back(it->second * n + mi.back());
  }
  return pos;
}

std::vector<Index> right_positions(const NestedIndexSets& sets, int q) {
  const int d = sets.dimension();
  const int n = sets.modes[q + 1];
  std::vector<Index> pos;
  pos.reserve(sets.right[q].size());
  if (q == d - 2) {
    for (const auto& mi : sets.right[q]) pos.push_back(mi[0]);
    return pos;
  }
  std::map<MultiIndex, Index> where;
  for (Index b = 0; b < static_cast<Index>(sets.right[q + 1].size()); ++b) where.emplace(sets.right[q + 1][b], b);
  for (const auto& mi : sets.right[q]) {
    auto it = where.find(MultiIndex(mi.begin() + 1, mi.end()));
    if (it == where.end()) throw InputError("right sets are not nested");
    pos.push_back(it->second * n + mi.front());
  }
  return pos;
}

// ---------------------------------------------------------------------------

TTCrossModel::TTCrossModel(NestedIndexSets sets, std::vector<Matrix> fibers)
    : sets_(std::move(sets)), fibers_(std::move(fibers)) {
  sets_.validate();
  const int d = sets_.dimension();
  if (static_cast<int>(fibers_.size()) != d) throw InputError("need one fiber block per mode");
  for (int c = 0; c < d; ++c) {
    if (fibers_[c].rows() != sets_.rank(c - 1) * sets_.modes[c] || fibers_[c].cols() != sets_.rank(c))
      throw InputError("fiber block " + std::to_string(c + 1) + " has wrong shape");
  }
  factors_.resize(d);
  rcond_.assign(std::max(0, d - 1), 1);
  for (int c = 0; c + 1 < d; ++c) {
    std::vector<Index> rows = left_positions(sets_, c);
    try {
      factors_[c] = interpolation_matrix(fibers_[c], rows, &rcond_[c]);
    } catch (const DegeneracyError& e) {
      throw DegeneracyError(c, "singular intersection matrix");
    }
  }
  factors_[d - 1] = fibers_[d - 1];
}

Matrix TTCrossModel::intersection(int q) const {
  std::vector<Index> rows = left_positions(sets_, q);
  Matrix m(rows.size(), fibers_[q].cols());
  for (std::size_t s = 0; s < rows.size(); ++s) m.row(s) = fibers_[q].row(rows[s]);
  return m;
}

Scalar TTCrossModel::operator()(std::span<const int> index) const {
  const int d = dimension();
  if (static_cast<int>(index.size()) != d) throw InputError("multi-index has wrong length");
  RowVector v = RowVector::Ones(1);
  for (int c = 0; c < d; ++c) {
    const int n = sets_.modes[c];
    const int i = index[c];
    if (i < 0 || i >= n) throw InputError("multi-index entry out of range");
    const Matrix& g = factors_[c];
    RowVector next = RowVector::Zero(g.cols());
    for (Index a = 0; a < v.size(); ++a) next.noalias() += v(a) * g.row(a * n + i);
    v.swap(next);
  }
  return v(0);
}

Matrix weighted_block(const Matrix& factor, int mode_size, const Vector& weights) {
  if (weights.size() != mode_size) throw InputError("weight vector does not match mode size");
  const Index rl = factor.rows() / mode_size;
  Matrix w = Matrix::Zero(rl, factor.cols());
  for (Index a = 0; a < rl; ++a)
    for (int i = 0; i < mode_size; ++i) w.row(a).noalias() += weights(i) * factor.row(a * mode_size + i);
  return w;
}

Matrix TTCrossModel::weighted_factor(int c, const Vector& weights) const {
  return weighted_block(factors_.at(c), sets_.modes[c], weights);
}

Matrix weighted_chain(const std::vector<Matrix>& factors, const std::vector<int>& modes, int c_begin, int c_end,
                      const std::vector<Vector>& weights) {
  Matrix acc;
  for (int c = c_begin; c < c_end; ++c) {
    Matrix w = weighted_block(factors[c], modes[c], weights[c]);
    if (c == c_begin)
      acc = std::move(w);
    else
      acc = acc * w;
  }
  return acc;
}

Scalar TTCrossModel::contract(const std::vector<Vector>& weights) const {
  if (static_cast<int>(weights.size()) != dimension()) throw InputError("need one weight vector per mode");
  Matrix m = weighted_chain(factors_, sets_.modes, 0, dimension(), weights);
  return m(0, 0);
}

std::size_t TTCrossModel::stored_entries() const {
  std::size_t total = 0;
  for (const auto& f : fibers_) total += static_cast<std::size_t>(f.size());
  return total;
}

Scalar tt_eval(const TTCrossModel& model, std::span<const int> index) { return model(index); }

void ConvergenceLog::append(const ConvergenceRecord& record) {
  if (!records_.empty()) {
    if (record.sweep <= records_.back().sweep) throw InputError("sweep index must increase");
    if (record.n_eval < records_.back().n_eval) throw InputError("N_eval must be nondecreasing");
  }
  records_.push_back(record);
}

}  // namespace ttint
