#include "ttint/ttcross.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include <Eigen/SVD>

namespace ttint {

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<MultiIndex> kEmptySet{MultiIndex{}};

const std::vector<MultiIndex>& left_of(const NestedIndexSets& s, int q) { return q < 0 ? kEmptySet : s.left[q]; }

const std::vector<MultiIndex>& right_of(const NestedIndexSets& s, int q) {
  return q >= s.interfaces() ? kEmptySet : s.right[q];
}

// Positions of `subset` rows inside a tall block whose rows are listed by
// `decode`; empty when some element is missing.
template <class Decode>
std::vector<Index> locate(const std::vector<MultiIndex>& subset, Index rows, Decode decode) {
  std::map<MultiIndex, Index> where;
  for (Index r = 0; r < rows; ++r) where.emplace(decode(r), r);
  std::vector<Index> out;
  for (const auto& mi : subset) {
    auto it = where.find(mi);
    if (it == where.end()) return {};
    out.push_back(it->second);
  }
  return out;
}

MaxvolResult maxvol_at(const Matrix& tall, std::vector<Index> initial, Scalar swap_tol, int q) {
  try {
    return maxvol(tall, std::move(initial), swap_tol);
  } catch (const DegeneracyError&) {
    throw DegeneracyError(q, "rank deficient fiber block during maxvol");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// superblock

Superblock::Superblock(Evaluator& evaluator, const NestedIndexSets& sets, int q)
    : eval_(evaluator), sets_(sets), q_(q), d_(sets.dimension()) {
  if (q < 0 || q >= sets.interfaces()) throw InputError("interface out of range");
  nq_ = sets.modes[q];
  nq1_ = sets.modes[q + 1];
  m_ = static_cast<Index>(left_of(sets, q - 1).size()) * nq_;
  n_ = static_cast<Index>(right_of(sets, q + 1).size()) * nq1_;
}

std::pair<Index, int> Superblock::decode_row(Index row) const {
  return {row / nq_, static_cast<int>(row % nq_)};
}

std::pair<int, Index> Superblock::decode_col(Index col) const {
  return {static_cast<int>(col % nq1_), col / nq1_};
}

MultiIndex Superblock::left_part(Index row) const {
  auto [alpha, i] = decode_row(row);
  MultiIndex out = left_of(sets_, q_ - 1)[alpha];
  out.push_back(i);
  return out;
}

MultiIndex Superblock::right_part(Index col) const {
  auto [i, beta] = decode_col(col);
  const MultiIndex& tail = right_of(sets_, q_ + 1)[beta];
  MultiIndex out;
  out.reserve(tail.size() + 1);
  out.push_back(i);
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

MultiIndex Superblock::full_index(Index row, Index col) const { return join_index(left_part(row), right_part(col)); }

void Superblock::gather(std::span<const Cell> cells, std::span<Scalar> out) const {
  std::vector<int> flat(cells.size() * d_);
  const auto& lset = left_of(sets_, q_ - 1);
  const auto& rset = right_of(sets_, q_ + 1);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    int* dst = flat.data() + c * d_;
    auto [alpha, i] = decode_row(cells[c].row);
    auto [j, beta] = decode_col(cells[c].col);
    const MultiIndex& l = lset[alpha];
    const MultiIndex& r = rset[beta];
    dst = std::copy(l.begin(), l.end(), dst);
    *dst++ = i;
    *dst++ = j;
    std::copy(r.begin(), r.end(), dst);
  }
  eval_.evaluate(flat, out);
}

Superblock build_superblock(Evaluator& evaluator, const NestedIndexSets& sets, int q) {
  return Superblock(evaluator, sets, q);
}

// ---------------------------------------------------------------------------
// fibers and states

Matrix evaluate_fiber(Evaluator& evaluator, const NestedIndexSets& sets, int c) {
  const int d = sets.dimension();
  const int n = sets.modes[c];
  const auto& lset = left_of(sets, c - 1);
  const auto& rset = right_of(sets, c);
  const Index m = static_cast<Index>(lset.size()) * n, r = static_cast<Index>(rset.size());
  std::vector<int> flat(static_cast<std::size_t>(m * r) * d);
  std::vector<Scalar> vals(m * r);
  std::size_t k = 0;
  for (Index b = 0; b < r; ++b)
    for (Index a = 0; a < static_cast<Index>(lset.size()); ++a)
      for (int i = 0; i < n; ++i) {
        int* dst = flat.data() + k * d;
        dst = std::copy(lset[a].begin(), lset[a].end(), dst);
        *dst++ = i;
        std::copy(rset[b].begin(), rset[b].end(), dst);
        ++k;
      }
  evaluator.evaluate(flat, vals);
  return Eigen::Map<Matrix>(vals.data(), m, r);
}

Matrix evaluate_superblock(Evaluator& evaluator, const NestedIndexSets& sets, int q, std::size_t cap) {
  Superblock sb(evaluator, sets, q);
  const std::size_t total = static_cast<std::size_t>(sb.rows()) * static_cast<std::size_t>(sb.cols());
  if (total > cap)
    throw ResourceError("superblock of " + std::to_string(total) + " entries exceeds the cap of " +
                        std::to_string(cap) + "; use the greedy strategy");
  std::vector<Cell> cells;
  cells.reserve(total);
  for (Index j = 0; j < sb.cols(); ++j)
    for (Index i = 0; i < sb.rows(); ++i) cells.push_back({i, j});
  std::vector<Scalar> vals(total);
  sb.gather(cells, vals);
  return Eigen::Map<Matrix>(vals.data(), sb.rows(), sb.cols());
}

void CrossState::rebuild(Evaluator& evaluator) {
  fibers.resize(sets.dimension());
  for (int c = 0; c < sets.dimension(); ++c) fibers[c] = evaluate_fiber(evaluator, sets, c);
}

CrossState CrossState::start(Evaluator& evaluator, const MultiIndex& point) {
  CrossState s;
  s.sets = NestedIndexSets::rank_one(evaluator.oracle().mode_sizes(), point);
  s.rebuild(evaluator);
  return s;
}

CrossState CrossState::random(Evaluator& evaluator, Index rank, std::uint64_t seed) {
  if (rank < 1) throw InputError("rank must be positive");
  CrossState s;
  s.sets.modes = evaluator.oracle().mode_sizes();
  const int d = s.sets.dimension();
  std::vector<Index> r(std::max(0, d - 1));
  auto capped_product = [&](int b, int e) {
    Index p = 1;
    for (int c = b; c < e && p <= rank; ++c) p *= s.sets.modes[c];
    return p;
  };
  for (int q = 0; q + 1 < d; ++q) r[q] = std::min({rank, capped_product(0, q + 1), capped_product(q + 1, d)});
  std::mt19937_64 rng(mix64(seed));
  s.sets.left.resize(d - 1);
  s.sets.right.resize(d - 1);
  for (int q = 0; q + 1 < d; ++q) {
    std::vector<MultiIndex> pool;
    for (const auto& l : left_of(s.sets, q - 1))
      for (int i = 0; i < s.sets.modes[q]; ++i) {
        pool.push_back(l);
        pool.back().push_back(i);
      }
    std::shuffle(pool.begin(), pool.end(), rng);
    s.sets.left[q].assign(pool.begin(), pool.begin() + r[q]);
  }
  for (int q = d - 2; q >= 0; --q) {
    std::vector<MultiIndex> pool;
    for (const auto& t : right_of(s.sets, q + 1))
      for (int i = 0; i < s.sets.modes[q + 1]; ++i) {
        MultiIndex mi{i};
        mi.insert(mi.end(), t.begin(), t.end());
        pool.push_back(std::move(mi));
      }
    std::shuffle(pool.begin(), pool.end(), rng);
    s.sets.right[q].assign(pool.begin(), pool.begin() + r[q]);
  }
  s.sets.validate();
  s.rebuild(evaluator);
  return s;
}

// ---------------------------------------------------------------------------
// ALS

namespace {

// Right-to-left reselection of right[q] as maxvol rows of
// A(I_{<=q}, i_{q+1} I_{>q+1}) transposed.
int reselect_right(Evaluator& evaluator, NestedIndexSets& sets, int q, Scalar swap_tol) {
  Matrix f = evaluate_fiber(evaluator, sets, q + 1);  // (r_q n) x r_{q+1}
  const int n = sets.modes[q + 1];
  const Index rq = static_cast<Index>(sets.left[q].size());
  const auto& tails = right_of(sets, q + 1);
  const Index rows = static_cast<Index>(tails.size()) * n;
  if (rows < rq) throw DegeneracyError(q, "rank exceeds the size of the neighbouring fiber");
  Matrix t(rows, rq);
  for (Index s = 0; s < rq; ++s)
    for (int i = 0; i < n; ++i)
      for (Index b = 0; b < static_cast<Index>(tails.size()); ++b) t(b * n + i, s) = f(s * n + i, b);
  auto decode = [&](Index row) {
    MultiIndex mi{static_cast<int>(row % n)};
    const auto& tail = tails[row / n];
    mi.insert(mi.end(), tail.begin(), tail.end());
    return mi;
  };
  MaxvolResult mv = maxvol_at(t, locate(sets.right[q], rows, decode), swap_tol, q);
  std::vector<MultiIndex> next;
  for (Index row : mv.rows) next.push_back(decode(row));
  sets.right[q] = std::move(next);
  return mv.swaps;
}

int reselect_left(Evaluator& evaluator, NestedIndexSets& sets, int q, Scalar swap_tol) {
  Matrix f = evaluate_fiber(evaluator, sets, q);  // (r_{q-1} n) x r_q
  const int n = sets.modes[q];
  const auto& heads = left_of(sets, q - 1);
  if (f.rows() < f.cols()) throw DegeneracyError(q, "rank exceeds the size of the neighbouring fiber");
  auto decode = [&](Index row) {
    MultiIndex mi = heads[row / n];
    mi.push_back(static_cast<int>(row % n));
    return mi;
  };
  MaxvolResult mv = maxvol_at(f, locate(sets.left[q], f.rows(), decode), swap_tol, q);
  std::vector<MultiIndex> next;
  for (Index row : mv.rows) next.push_back(decode(row));
  sets.left[q] = std::move(next);
  return mv.swaps;
}

}  // namespace

SweepReport als_sweep(Evaluator& evaluator, CrossState& state, SweepDirection direction, Scalar swap_tol) {
  SweepReport rep;
  const std::uint64_t before = evaluator.oracle().eval_count();
  const int last = state.sets.interfaces();
  if (direction == SweepDirection::LeftToRight) {
    for (int q = 0; q < last; ++q) {
      int swaps = reselect_left(evaluator, state.sets, q, swap_tol);
      rep.swaps += swaps;
      if (swaps) rep.pivot_interfaces.push_back(q);
    }
  } else {
    for (int q = last - 1; q >= 0; --q) {
      int swaps = reselect_right(evaluator, state.sets, q, swap_tol);
      rep.swaps += swaps;
      if (swaps) rep.pivot_interfaces.push_back(q);
    }
  }
  state.rebuild(evaluator);
  for (const auto& f : state.fibers) rep.max_abs = std::max(rep.max_abs, f.cwiseAbs().maxCoeff());
  rep.ranks = state.sets.ranks();
  rep.evaluations = evaluator.oracle().eval_count() - before;
  return rep;
}

// ---------------------------------------------------------------------------
// DMRG

TruncatedSvd truncated_svd(const Matrix& a, Scalar eps) {
  TruncatedSvd out;
  if (a.size() == 0) return out;
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const Index full = s.size();
  const Scalar total = s.squaredNorm();
  Index k = full;
  if (!(std::isinf(eps))) {
    const Scalar budget = eps * eps * total;
    Scalar tail = 0;
    while (k > 1 && tail + s(k - 1) * s(k - 1) <= budget) {
      tail += s(k - 1) * s(k - 1);
      --k;
    }
  } else {
    k = 1;
  }
  k = std::max<Index>(1, k);
  out.rank = k;
  out.s = s.head(k);
  out.u = svd.matrixU().leftCols(k);
  out.v = svd.matrixV().leftCols(k);
  return out;
}

SweepReport dmrg_maxvol_sweep(Evaluator& evaluator, CrossState& state, Scalar eps, SweepDirection direction,
                              std::size_t superblock_cap) {
  SweepReport rep;
  NestedIndexSets& sets = state.sets;
  const std::uint64_t before = evaluator.oracle().eval_count();
  const int last = sets.interfaces();
  auto update = [&](int q) {
    Superblock sb(evaluator, sets, q);
    rep.superblock_entries += static_cast<std::uint64_t>(sb.rows()) * static_cast<std::uint64_t>(sb.cols());
    Matrix a = evaluate_superblock(evaluator, sets, q, superblock_cap);
    rep.max_abs = std::max(rep.max_abs, a.cwiseAbs().maxCoeff());
    TruncatedSvd t = truncated_svd(a, eps);
    MaxvolResult lu = maxvol_at(t.u, {}, 1e-2, q);
    MaxvolResult rv = maxvol_at(t.v, {}, 1e-2, q);
    std::vector<MultiIndex> left, right;
    for (Index r : lu.rows) left.push_back(sb.left_part(r));
    for (Index c : rv.rows) right.push_back(sb.right_part(c));
    if (static_cast<Index>(sets.left[q].size()) != t.rank || left != sets.left[q] || right != sets.right[q])
      rep.pivot_interfaces.push_back(q);
    sets.left[q] = std::move(left);
    sets.right[q] = std::move(right);
  };
  if (direction == SweepDirection::LeftToRight) {
    for (int q = 0; q < last; ++q) update(q);
    rep.superblock_evaluations = evaluator.oracle().eval_count() - before;
    for (int q = last - 1; q >= 0; --q) rep.swaps += reselect_right(evaluator, sets, q, 1e-2);
  } else {
    for (int q = last - 1; q >= 0; --q) update(q);
    rep.superblock_evaluations = evaluator.oracle().eval_count() - before;
    for (int q = 0; q < last; ++q) rep.swaps += reselect_left(evaluator, sets, q, 1e-2);
  }
  state.rebuild(evaluator);
  rep.ranks = sets.ranks();
  rep.evaluations = evaluator.oracle().eval_count() - before;
  return rep;
}

// ---------------------------------------------------------------------------
// greedy

std::uint64_t step_seed(std::uint64_t seed, int sweep, int q) noexcept {
  return mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(sweep)) ^ (static_cast<std::uint64_t>(q) << 32));
}

bool greedy_update(Evaluator& evaluator, CrossState& state, int q, const GreedyOptions& options,
                   std::uint64_t seed, Scalar& scale, SweepReport& report) {
  NestedIndexSets& sets = state.sets;
  if (static_cast<Index>(sets.left[q].size()) >= options.max_rank) return false;
  const std::uint64_t before = evaluator.oracle().eval_count();
  Superblock sb(evaluator, sets, q);
  const int n1 = sets.modes[q + 1];
  const Index r = static_cast<Index>(sets.left[q].size());
  const Matrix& fnext = state.fibers[q + 1];
  Matrix rows_block(r, sb.cols());
  for (Index s = 0; s < r; ++s)
    for (Index b = 0; b < fnext.cols(); ++b)
      for (int i = 0; i < n1; ++i) rows_block(s, b * n1 + i) = fnext(s * n1 + i, b);
  CrossSets cross{left_positions(sets, q), right_positions(sets, q)};
  Skeleton skel = [&] {
    try {
      return Skeleton(cross, state.fibers[q], rows_block);
    } catch (const DegeneracyError&) {
      throw DegeneracyError(q, "singular intersection before expansion");
    }
  }();

  std::mt19937_64 rng(seed);
  CrossStepResult step = cross_expand_step(sb, skel, options.step, rng, scale);
  std::vector<Cell> ranked = step.ranked_probes;
  std::set<std::pair<Index, Index>> rejected;
  std::size_t next_probe = 0;
  bool added = false;
  for (int attempt = 0;; ++attempt) {
    scale = std::max(scale, step.max_abs_sampled);
    report.max_abs = std::max(report.max_abs, step.max_abs_sampled);
    if (step.converged) break;
    report.max_residual = std::max(report.max_residual, std::abs(step.residual));
    bool ok = true;
    try {
      Skeleton trial = skel;
      trial.add_pivot(step.row, step.col, step.column, step.row_values);
    } catch (const DegeneracyError&) {
      ok = false;
    }
    if (ok) {
      MultiIndex lp = sb.left_part(step.row), rp = sb.right_part(step.col);
      const Index m = state.fibers[q].rows();
      state.fibers[q].conservativeResize(m, r + 1);
      state.fibers[q].col(r) = step.column;
      Matrix& g = state.fibers[q + 1];
      const Index old_rows = g.rows();
      g.conservativeResize(old_rows + n1, g.cols());
      for (Index b = 0; b < g.cols(); ++b)
        for (int i = 0; i < n1; ++i) g(old_rows + i, b) = step.row_values(b * n1 + i);
      sets.left[q].push_back(std::move(lp));
      sets.right[q].push_back(std::move(rp));
      report.pivot_interfaces.push_back(q);
      added = true;
      break;
    }
    ++report.rejected;
    rejected.insert({step.row, step.col});
    if (attempt >= options.max_retries) break;
    while (next_probe < ranked.size() && rejected.count({ranked[next_probe].row, ranked[next_probe].col}))
      ++next_probe;
    if (next_probe >= ranked.size()) break;
    step = cross_expand_step(sb, skel, options.step, rng, scale, ranked[next_probe++]);
  }
  report.evaluations += evaluator.oracle().eval_count() - before;
  return added;
}

SweepReport greedy_sweep(Evaluator& evaluator, CrossState& state, const GreedyOptions& options, std::uint64_t seed,
                         int sweep, Scalar& scale, SweepDirection direction, int q_begin, int q_end) {
  SweepReport rep;
  if (q_end < 0) q_end = state.sets.interfaces();
  if (direction == SweepDirection::LeftToRight) {
    for (int q = q_begin; q < q_end; ++q) greedy_update(evaluator, state, q, options, step_seed(seed, sweep, q), scale, rep);
  } else {
    for (int q = q_end - 1; q >= q_begin; --q)
      greedy_update(evaluator, state, q, options, step_seed(seed, sweep, q), scale, rep);
  }
  rep.ranks = state.sets.ranks();
  return rep;
}

// ---------------------------------------------------------------------------
// driver

Strategy parse_strategy(const std::string& name) {
  if (name == "greedy") return Strategy::Greedy;
  if (name == "als") return Strategy::Als;
  if (name == "dmrg") return Strategy::Dmrg;
  throw InputError("unknown strategy '" + name + "' (expected greedy, als or dmrg)");
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Greedy: return "greedy";
    case Strategy::Als: return "als";
    case Strategy::Dmrg: return "dmrg";
  }
  return "greedy";
}

MultiIndex mid_grid(const std::vector<int>& modes) {
  MultiIndex p(modes.size());
  for (std::size_t k = 0; k < modes.size(); ++k) p[k] = (modes[k] - 1) / 2;
  return p;
}

MultiIndex ascend_start(Evaluator& evaluator, MultiIndex point, int sweeps) {
  const std::vector<int>& modes = evaluator.oracle().mode_sizes();
  const int d = static_cast<int>(modes.size());
  std::vector<int> flat;
  std::vector<Scalar> vals;
  for (int s = 0; s < sweeps; ++s) {
    bool moved = false;
    for (int k = 0; k < d; ++k) {
      flat.clear();
      for (int i = 0; i < modes[k]; ++i) {
        flat.insert(flat.end(), point.begin(), point.end());
        flat[static_cast<std::size_t>(i) * d + k] = i;
      }
      vals.resize(modes[k]);
      evaluator.evaluate(flat, vals);
      int best = point[k];
      for (int i = 0; i < modes[k]; ++i)
        if (std::abs(vals[i]) > std::abs(vals[best])) best = i;
      if (best != point[k]) {
        point[k] = best;
        moved = true;
      }
    }
    if (!moved) break;
  }
  return point;
}

MultiIndex initial_point(Evaluator& evaluator, const CrossOptions& options) {
  if (options.start) return *options.start;
  return ascend_start(evaluator, mid_grid(evaluator.oracle().mode_sizes()), options.start_sweeps);
}

Scalar functional_value(const TTCrossModel& model, const std::vector<Vector>& weights) {
  if (!weights.empty()) {
    Matrix m = weighted_chain(model.factors(), model.mode_sizes(), 0, model.dimension(), weights);
    return m(0, 0);
  }
  std::vector<Vector> unit;
  for (int n : model.mode_sizes()) unit.push_back(Vector::Ones(n));
  Matrix m = weighted_chain(model.factors(), model.mode_sizes(), 0, model.dimension(), unit);
  return m(0, 0);
}

Scalar relative_change(Scalar current, Scalar previous) noexcept {
  const Scalar denom = std::max(std::abs(current), std::numeric_limits<Scalar>::min());
  return std::abs(current - previous) / denom;
}

CrossResult cross_interpolate(const FunctionOracle& oracle, const CrossOptions& options) {
  if (options.rel_tol < 0) throw InputError("tolerance must be nonnegative");
  if (options.max_rank < 1) throw InputError("max rank must be positive");
  if (options.max_sweeps < 1) throw InputError("max sweeps must be positive");
  const auto t0 = Clock::now();
  const std::uint64_t base = oracle.eval_count();
  Evaluator ev(oracle, options.evaluator);
  const int d = oracle.dimension();

  CrossState state = (options.strategy != Strategy::Greedy && options.initial_rank > 1)
                         ? CrossState::random(ev, options.initial_rank, options.seed)
                         : CrossState::start(ev, initial_point(ev, options));
  CrossResult res;
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  TTCrossModel model = state.model();
  Scalar prev = functional_value(model, options.weights);
  if (d == 1) {
    res.model = std::move(model);
    res.functional = prev;
    res.converged = true;
    res.n_eval = oracle.eval_count() - base;
    res.log.append({0, 1, res.n_eval, prev, 0, 0, elapsed(), 0});
    return res;
  }

  Scalar scale = 0;
  for (const auto& f : state.fibers) scale = std::max(scale, f.cwiseAbs().maxCoeff());
  GreedyOptions gopt{options.step, options.max_rank, options.max_retries};
  gopt.step.rel_tol = options.rel_tol;
  int stable = 0;
  std::vector<Index> prev_ranks = state.sets.ranks();
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const SweepDirection dir = sweep % 2 == 0 ? SweepDirection::LeftToRight : SweepDirection::RightToLeft;
    SweepReport rep;
    bool quiet = false;
    bool stalled = false;
    switch (options.strategy) {
      case Strategy::Greedy: {
        const Index before_max = state.sets.max_rank();
        rep = greedy_sweep(ev, state, gopt, options.seed, sweep, scale, dir);
        std::vector<MultiIndex> pivots;
        for (int q : rep.pivot_interfaces) pivots.push_back(join_index(state.sets.left[q].back(), state.sets.right[q].back()));
        res.pivot_history.push_back(std::move(pivots));
        quiet = rep.pivot_interfaces.empty() && before_max < options.max_rank;
        stalled = rep.pivot_interfaces.empty() && !quiet;
        break;
      }
      case Strategy::Als:
        rep = als_sweep(ev, state, dir);
        quiet = rep.swaps == 0 && sweep > 0;
        break;
      case Strategy::Dmrg:
        rep = dmrg_maxvol_sweep(ev, state, options.rel_tol, dir, options.superblock_cap);
        quiet = false;
        break;
    }
    model = state.model();
    const Scalar value = functional_value(model, options.weights);
    const Scalar change = relative_change(value, prev);
    res.log.append({sweep + 1, state.sets.max_rank(), oracle.eval_count() - base, value, 0, change, elapsed(),
                    static_cast<int>(rep.pivot_interfaces.size())});
    prev = value;
    const std::vector<Index> ranks = state.sets.ranks();
    const bool ranks_steady = ranks == prev_ranks;
    prev_ranks = ranks;
    if (quiet || stalled) {
      res.converged = quiet;
      break;
    }
    stable = (change <= options.rel_tol && (options.strategy != Strategy::Dmrg || ranks_steady)) ? stable + 1 : 0;
    if (stable >= options.stable_sweeps) {
      res.converged = true;
      break;
    }
  }
  res.model = std::move(model);
  res.functional = prev;
  res.n_eval = oracle.eval_count() - base;
  return res;
}

}  // namespace ttint
