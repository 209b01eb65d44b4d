#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <vector>

#include "ttint/ttcross.hpp"

namespace ttint {

/// Interfaces [begin, end) handled by one worker.
struct ModeRange {
  int begin = 0;
  int end = 0;
  int size() const noexcept { return end - begin; }
};

struct ModePartition {
  int dimension = 0;
  std::vector<ModeRange> ranges;

  int workers() const noexcept { return static_cast<int>(ranges.size()); }
  std::vector<int> sizes() const;
  int owner(int q) const;
};

/// Contiguous blocks of ceil((d-1)/P) or floor((d-1)/P) interfaces, larger
/// blocks first. Throws InputError unless 1 <= P <= d-1.
ModePartition partition_modes(int d, int workers);

enum class PivotDirection { Rightward, Leftward };

/// Boundary pivot sent to a neighbour. A rightward message carries the new
/// element of I_{<=k} to worker p+1, a leftward one the new element of I_{>k}
/// to worker p-1. `has_pivot` false is the explicit "no pivot" marker.
struct PivotMessage {
  PivotDirection direction = PivotDirection::Rightward;
  int interface = 0;
  MultiIndex payload;
  int sweep = 0;
  bool has_pivot = false;
};

/// In-process mailbox between two workers.
class Channel {
 public:
  void send(PivotMessage message);
  /// Blocks up to `timeout`; throws TransportError when nothing arrives.
  PivotMessage receive(std::chrono::milliseconds timeout);
  std::size_t pending() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<PivotMessage> queue_;
};

/// Private working copy of one worker.
struct WorkerState {
  int id = 0;
  ModeRange range;
  CrossState state;
  std::unique_ptr<Evaluator> evaluator;
  Scalar scale = 0;
  /// Pivots added by the last local sweep, per interface in visiting order.
  std::vector<int> last_pivots;
};

/// Greedy expansion over the worker's interfaces. The first interface sees
/// the left set of the previous global sweep, the last one the right set.
SweepReport local_sweep(WorkerState& worker, const GreedyOptions& options, std::uint64_t seed, int sweep);

/// Channels of a run: rightward[p] carries p -> p+1, leftward[p] carries p+1 -> p.
struct ChannelSet {
  std::vector<std::unique_ptr<Channel>> rightward;
  std::vector<std::unique_ptr<Channel>> leftward;
  explicit ChannelSet(int workers);
};

/// Sends this worker's boundary pivots (or markers) and merges the
/// neighbours' pivots into its sets and fibers. Returns messages sent.
int exchange_pivots(WorkerState& worker, const ModePartition& partition, ChannelSet& channels, int sweep,
                    std::chrono::milliseconds timeout);

/// Product Π_c W_c over the cores owned by the worker (cores begin..end-1,
/// plus the last core for the last worker).
Matrix partial_functional(const WorkerState& worker, int workers, const std::vector<Vector>& weights);

struct ParallelOptions {
  CrossOptions cross;
  int workers = 1;
  std::chrono::milliseconds timeout{600000};
};

struct ParallelResult : CrossResult {
  int workers = 1;
  std::uint64_t messages = 0;
  std::vector<int> partition_sizes;
};

/// Dimension-parallel greedy cross interpolation with P threads.
ParallelResult parallel_cross_interpolate(const FunctionOracle& oracle, const ParallelOptions& options);

/// Assemble the global model from worker copies; interface q comes from its
/// owner, core c from the owner of interface c (the last worker for c = d-1).
TTCrossModel assemble_model(const std::vector<WorkerState>& workers, const ModePartition& partition);

}  // namespace ttint
