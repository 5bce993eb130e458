#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "prismdg/exec.hpp"
#include "prismdg/mesh.hpp"

namespace prismdg {

struct Partition {
  int rank = 0;
  std::vector<int> owned;     // contiguous range of triangle ids
  std::vector<int> ghosts;    // neighbors of owned triangles owned elsewhere, ascending
  std::vector<int> local;     // owned then ghosts
  std::vector<int> boundary;  // owned triangles some other rank holds as ghosts
  std::vector<int> interior;  // the remaining owned triangles
  std::map<int, std::vector<int>> send;  // neighbor rank -> owned ids, ascending
  std::map<int, std::vector<int>> recv;  // neighbor rank -> ghost ids, ascending
};

// Splits the storage order (Hilbert order for a reordered mesh) into P
// contiguous ranges balanced by `weights` (prism count per column; all ones
// when empty). Throws TooManyRanks.
std::vector<Partition> decompose(const Mesh2D& mesh, int ranks, std::span<const int> weights = {});

// Throws MapMismatch unless every send list equals the matching recv list.
void check_maps(const std::vector<Partition>& parts);

// Max over min of the weighted owned load.
double load_imbalance(const std::vector<Partition>& parts, std::span<const int> weights);

// Point-to-point message queues between in-process workers.
class Channels {
 public:
  explicit Channels(int ranks);

  void send(int from, int to, std::vector<double> msg);
  // Blocks for the next message from `from` to `to`. Throws ChannelClosed.
  std::vector<double> recv(int from, int to);
  // Wakes every waiter with ChannelClosed (used when a worker fails).
  void close();

 private:
  struct Box {
    std::deque<std::vector<double>> queue;
  };
  int ranks_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<Box> boxes_;
  bool closed_ = false;
};

class Barrier;

// One worker's view: kernels run boundary-first, ghosts travel through the
// channels while the interior runs.
class PartitionExecutor : public Executor {
 public:
  PartitionExecutor(const Partition& part, Channels& channels, Barrier& barrier, bool poison);

  std::span<const int> owned() const override { return part_.owned; }
  std::span<const int> local() const override { return part_.local; }
  void phase(const ElementKernel& kernel, std::vector<HaloField> fields) override;
  int rank() const override { return part_.rank; }
  void barrier() override;

 private:
  const Partition& part_;
  Channels& channels_;
  Barrier& barrier_;
  bool poison_;
};

// Reusable barrier that can be broken when a worker fails.
class Barrier {
 public:
  explicit Barrier(int count) : count_(count) {}
  void arrive_and_wait();
  void break_all();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int count_;
  int waiting_ = 0;
  long generation_ = 0;
  bool broken_ = false;
};

// Runs `worker(exec)` on one thread per partition and rethrows the first
// failure after all threads have stopped.
void run_partitioned(const std::vector<Partition>& parts, bool poison,
                     const std::function<void(Executor&)>& worker);

struct AmdahlFit {
  double serial = 0.0;    // a
  double parallel = 0.0;  // b
  double r2 = 0.0;
};

// Least-squares fit of T(P) = a + b / P.
AmdahlFit amdahl_fit(std::span<const int> ranks, std::span<const double> times);

}  // namespace prismdg
