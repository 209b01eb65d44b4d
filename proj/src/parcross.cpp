#include "ttint/parcross.hpp"

#include <atomic>
#include <barrier>
#include <exception>
#include <thread>

namespace ttint {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<Vector> resolve_weights(const std::vector<int>& modes, const std::vector<Vector>& weights) {
  if (!weights.empty()) return weights;
  std::vector<Vector> unit;
  for (int n : modes) unit.push_back(Vector::Ones(n));
  return unit;
}

}  // namespace

std::vector<int> ModePartition::sizes() const {
  std::vector<int> s;
  for (const auto& r : ranges) s.push_back(r.size());
  return s;
}

int ModePartition::owner(int q) const {
  for (int p = 0; p < workers(); ++p)
    if (q >= ranges[p].begin && q < ranges[p].end) return p;
  throw InputError("interface " + std::to_string(q + 1) + " is not covered by the partition");
}

ModePartition partition_modes(int d, int workers) {
  const int total = d - 1;
  if (workers < 1 || workers > total)
    throw InputError("worker count " + std::to_string(workers) + " outside 1.." + std::to_string(std::max(total, 0)));
  ModePartition part;
  part.dimension = d;
  const int base = total / workers, extra = total % workers;
  int q = 0;
  for (int p = 0; p < workers; ++p) {
    const int len = base + (p < extra ? 1 : 0);
    part.ranges.push_back({q, q + len});
    q += len;
  }
  return part;
}

void Channel::send(PivotMessage message) {
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(message));
  }
  ready_.notify_one();
}

PivotMessage Channel::receive(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  if (!ready_.wait_for(lock, timeout, [&] { return !queue_.empty(); }))
    throw TransportError("timed out waiting for a neighbour pivot message");
  PivotMessage m = std::move(queue_.front());
  queue_.pop_front();
  return m;
}

std::size_t Channel::pending() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

ChannelSet::ChannelSet(int workers) {
  for (int p = 0; p + 1 < workers; ++p) {
    rightward.push_back(std::make_unique<Channel>());
    leftward.push_back(std::make_unique<Channel>());
  }
}

SweepReport local_sweep(WorkerState& worker, const GreedyOptions& options, std::uint64_t seed, int sweep) {
  const SweepDirection dir = sweep % 2 == 0 ? SweepDirection::LeftToRight : SweepDirection::RightToLeft;
  SweepReport rep = greedy_sweep(*worker.evaluator, worker.state, options, seed, sweep, worker.scale, dir,
                                 worker.range.begin, worker.range.end);
  worker.last_pivots = rep.pivot_interfaces;
  return rep;
}

namespace {

bool added_at(const WorkerState& w, int q) {
  return std::find(w.last_pivots.begin(), w.last_pivots.end(), q) != w.last_pivots.end();
}

// New element of I_{<=k} at k = begin-1: rows of fiber `begin`.
void merge_left(WorkerState& w, const MultiIndex& left) {
  NestedIndexSets& s = w.state.sets;
  const int c = w.range.begin;
  const int d = s.dimension();
  s.left[c - 1].push_back(left);
  const int n = s.modes[c];
  const auto& rset = s.right[c];
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(n) * rset.size() * d);
  for (const auto& r : rset)
    for (int i = 0; i < n; ++i) {
      flat.insert(flat.end(), left.begin(), left.end());
      flat.push_back(i);
      flat.insert(flat.end(), r.begin(), r.end());
    }
  std::vector<Scalar> vals(static_cast<std::size_t>(n) * rset.size());
  w.evaluator->evaluate(flat, vals);
  Matrix& f = w.state.fibers[c];
  const Index old = f.rows();
  f.conservativeResize(old + n, f.cols());
  for (std::size_t b = 0; b < rset.size(); ++b)
    for (int i = 0; i < n; ++i) f(old + i, b) = vals[b * n + i];
}

// New element of I_{>k} at k = end: one more column of fiber `end`.
void merge_right(WorkerState& w, const MultiIndex& right) {
  NestedIndexSets& s = w.state.sets;
  const int c = w.range.end;
  const int d = s.dimension();
  s.right[c].push_back(right);
  const int n = s.modes[c];
  const std::vector<MultiIndex> none{MultiIndex{}};
  const auto& lset = c == 0 ? none : s.left[c - 1];
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(n) * lset.size() * d);
  for (const auto& l : lset)
    for (int i = 0; i < n; ++i) {
      flat.insert(flat.end(), l.begin(), l.end());
      flat.push_back(i);
      flat.insert(flat.end(), right.begin(), right.end());
    }
  std::vector<Scalar> vals(static_cast<std::size_t>(n) * lset.size());
  w.evaluator->evaluate(flat, vals);
  Matrix& f = w.state.fibers[c];
  f.conservativeResize(f.rows(), f.cols() + 1);
  f.col(f.cols() - 1) = Eigen::Map<Vector>(vals.data(), static_cast<Index>(vals.size()));
}

}  // namespace

int exchange_pivots(WorkerState& worker, const ModePartition& partition, ChannelSet& channels, int sweep,
                    std::chrono::milliseconds timeout) {
  const int p = worker.id, P = partition.workers();
  const NestedIndexSets& s = worker.state.sets;
  int sent = 0;
  if (p + 1 < P) {
    const int k = worker.range.end - 1;
    PivotMessage m{PivotDirection::Rightward, k, {}, sweep, added_at(worker, k)};
    if (m.has_pivot) m.payload = s.left[k].back();
    channels.rightward[p]->send(std::move(m));
    ++sent;
  }
  if (p > 0) {
    const int k = worker.range.begin;
    PivotMessage m{PivotDirection::Leftward, k, {}, sweep, added_at(worker, k)};
    if (m.has_pivot) m.payload = s.right[k].back();
    channels.leftward[p - 1]->send(std::move(m));
    ++sent;
  }
  if (p > 0) {
    PivotMessage m = channels.rightward[p - 1]->receive(timeout);
    if (m.sweep != sweep || m.interface != worker.range.begin - 1)
      throw TransportError("pivot message out of sequence from worker " + std::to_string(p));
    if (m.has_pivot) merge_left(worker, m.payload);
  }
  if (p + 1 < P) {
    PivotMessage m = channels.leftward[p]->receive(timeout);
    if (m.sweep != sweep || m.interface != worker.range.end)
      throw TransportError("pivot message out of sequence from worker " + std::to_string(p + 2));
    if (m.has_pivot) merge_right(worker, m.payload);
  }
  return sent;
}

Matrix partial_functional(const WorkerState& worker, int workers, const std::vector<Vector>& weights) {
  const NestedIndexSets& s = worker.state.sets;
  const int d = s.dimension();
  const int cb = worker.range.begin;
  const int ce = worker.id == workers - 1 ? d : worker.range.end;
  std::vector<Matrix> factors(d);
  for (int c = cb; c < ce; ++c) {
    if (c == d - 1) {
      factors[c] = worker.state.fibers[c];
      continue;
    }
    std::vector<Index> rows = left_positions(s, c);
    try {
      factors[c] = interpolation_matrix(worker.state.fibers[c], rows);
    } catch (const DegeneracyError&) {
      throw DegeneracyError(c, "singular intersection matrix");
    }
  }
  return weighted_chain(factors, s.modes, cb, ce, resolve_weights(s.modes, weights));
}

TTCrossModel assemble_model(const std::vector<WorkerState>& workers, const ModePartition& partition) {
  const int d = partition.dimension;
  const int P = partition.workers();
  NestedIndexSets sets;
  sets.modes = workers.front().state.sets.modes;
  sets.left.resize(d - 1);
  sets.right.resize(d - 1);
  std::vector<Matrix> fibers(d);
  for (int q = 0; q + 1 < d; ++q) {
    const auto& own = workers[partition.owner(q)].state;
    sets.left[q] = own.sets.left[q];
    sets.right[q] = own.sets.right[q];
    fibers[q] = own.fibers[q];
  }
  fibers[d - 1] = workers[P - 1].state.fibers[d - 1];
  return TTCrossModel(std::move(sets), std::move(fibers));
}

ParallelResult parallel_cross_interpolate(const FunctionOracle& oracle, const ParallelOptions& options) {
  const CrossOptions& co = options.cross;
  if (options.workers < 1) throw InputError("worker count must be positive");
  if (co.strategy != Strategy::Greedy) throw InputError("the parallel driver runs the greedy strategy only");
  const int d = oracle.dimension();
  if (d == 1) {
    ParallelResult r;
    static_cast<CrossResult&>(r) = cross_interpolate(oracle, co);
    return r;
  }
  if (co.rel_tol < 0) throw InputError("tolerance must be nonnegative");
  if (co.max_rank < 1) throw InputError("max rank must be positive");
  if (co.max_sweeps < 1) throw InputError("max sweeps must be positive");

  const int P = std::min(options.workers, d - 1);
  const ModePartition part = partition_modes(d, P);
  const auto t0 = Clock::now();
  const std::uint64_t base = oracle.eval_count();

  std::vector<WorkerState> workers(P);
  {
    Evaluator seed_eval(oracle, co.evaluator);
    CrossState initial = CrossState::start(seed_eval, initial_point(seed_eval, co));
    Scalar scale = 0;
    for (const auto& f : initial.fibers) scale = std::max(scale, f.cwiseAbs().maxCoeff());
    for (int p = 0; p < P; ++p) {
      workers[p].id = p;
      workers[p].range = part.ranges[p];
      workers[p].state = initial;
      workers[p].evaluator = std::make_unique<Evaluator>(oracle, co.evaluator);
      workers[p].scale = scale;
    }
  }

  ParallelResult res;
  res.workers = P;
  res.partition_sizes = part.sizes();
  GreedyOptions gopt{co.step, co.max_rank, co.max_retries};
  gopt.step.rel_tol = co.rel_tol;
  const std::vector<Vector> weights = co.weights;

  Scalar prev = functional_value(TTCrossModel(workers[0].state.sets, workers[0].state.fibers), weights);
  ChannelSet channels(P);
  std::vector<Matrix> partial(P);
  std::vector<char> quiet(P), added(P), failed(P);
  std::vector<std::vector<MultiIndex>> pivots(P);
  std::atomic<std::uint64_t> messages{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  bool stop = false;
  int stable = 0;
  std::barrier sync(P);

  auto record_error = [&](int p) {
    failed[p] = 1;
    std::lock_guard lock(error_mutex);
    if (!error) error = std::current_exception();
  };

  auto run = [&](int p) {
    WorkerState& w = workers[p];
    for (int sweep = 0; sweep < co.max_sweeps; ++sweep) {
      pivots[p].clear();
      quiet[p] = added[p] = 0;
      if (!failed[p]) {
        try {
          SweepReport rep = local_sweep(w, gopt, co.seed, sweep);
          for (int q : rep.pivot_interfaces)
            pivots[p].push_back(join_index(w.state.sets.left[q].back(), w.state.sets.right[q].back()));
          added[p] = !rep.pivot_interfaces.empty();
          bool capped = false;
          for (int q = w.range.begin; q < w.range.end; ++q) capped |= w.state.sets.rank(q) >= co.max_rank;
          quiet[p] = !added[p] && !capped;
        } catch (...) {
          record_error(p);
          w.last_pivots.clear();
        }
      }
      try {
        messages += exchange_pivots(w, part, channels, sweep, options.timeout);
      } catch (...) {
        record_error(p);
      }
      if (!failed[p]) {
        try {
          partial[p] = partial_functional(w, P, weights);
        } catch (...) {
          record_error(p);
        }
      }
      sync.arrive_and_wait();
      for (int stride = 1; stride < P; stride *= 2) {
        if (p % (2 * stride) == 0 && p + stride < P && !failed[p] && !failed[p + stride])
          partial[p] = partial[p] * partial[p + stride];
        sync.arrive_and_wait();
      }
      if (p == 0) {
        bool any_failed = false, all_quiet = true, any_added = false;
        for (int k = 0; k < P; ++k) {
          any_failed |= failed[k] != 0;
          all_quiet &= quiet[k] != 0;
          any_added |= added[k] != 0;
        }
        std::vector<MultiIndex> hist;
        for (int k = 0; k < P; ++k) hist.insert(hist.end(), pivots[k].begin(), pivots[k].end());
        res.pivot_history.push_back(std::move(hist));
        if (any_failed) {
          stop = true;
        } else {
          const Scalar value = partial[0](0, 0);
          const Scalar change = relative_change(value, prev);
          Index max_rank = 1;
          for (int q = 0; q + 1 < d; ++q)
            max_rank = std::max(max_rank, workers[part.owner(q)].state.sets.rank(q));
          int count = 0;
          for (int k = 0; k < P; ++k) count += static_cast<int>(pivots[k].size());
          res.log.append({sweep + 1, max_rank, oracle.eval_count() - base, value, 0, change,
                          std::chrono::duration<double>(Clock::now() - t0).count(), count});
          prev = value;
          if (!any_added) {
            res.converged = all_quiet;
            stop = true;
          } else {
            stable = change <= co.rel_tol ? stable + 1 : 0;
            if (stable >= co.stable_sweeps) {
              res.converged = true;
              stop = true;
            }
          }
        }
      }
      sync.arrive_and_wait();
      if (stop) break;
    }
  };

  {
    std::vector<std::jthread> pool;
    for (int p = 1; p < P; ++p) pool.emplace_back(run, p);
    run(0);
  }
  if (error) std::rethrow_exception(error);

  res.model = assemble_model(workers, part);
  res.functional = prev;
  res.messages = messages;
  res.n_eval = oracle.eval_count() - base;
  return res;
}

}  // namespace ttint
