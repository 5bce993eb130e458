#include "prismdg/partition.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <numeric>
#include <set>
#include <string>
#include <thread>

#include "prismdg/errors.hpp"

namespace prismdg {

std::vector<Partition> decompose(const Mesh2D& mesh, int ranks, std::span<const int> weights) {
  const int n = mesh.num_triangles();
  if (ranks < 1) throw TooManyRanks("rank count must be at least 1");
  if (ranks > n) {
    throw TooManyRanks(std::to_string(ranks) + " ranks for " + std::to_string(n) + " triangles");
  }
  if (!weights.empty() && static_cast<int>(weights.size()) != n) throw ShapeMismatch("one weight per triangle");
  std::vector<long> prefix(n + 1, 0);
  for (int t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + (weights.empty() ? 1 : weights[t]);
  const double total = static_cast<double>(prefix[n]);

  // Cut p sits where the prefix sum is closest to p * total / P, keeping at
  // least one triangle per rank.
  std::vector<int> cut(ranks + 1, 0);
  cut[ranks] = n;
  for (int p = 1; p < ranks; ++p) {
    const double target = total * p / ranks;
    int c = static_cast<int>(std::lower_bound(prefix.begin(), prefix.end(), static_cast<long>(target)) -
                             prefix.begin());
    if (c > 0 && std::abs(prefix[c - 1] - target) <= std::abs(prefix[c] - target)) --c;
    c = std::clamp(c, cut[p - 1] + 1, n - (ranks - p));
    cut[p] = c;
  }

  std::vector<int> owner(n);
  for (int p = 0; p < ranks; ++p) {
    for (int t = cut[p]; t < cut[p + 1]; ++t) owner[t] = p;
  }
  std::vector<Partition> parts(ranks);
  for (int p = 0; p < ranks; ++p) {
    Partition& part = parts[p];
    part.rank = p;
    std::set<int> ghosts;
    std::set<int> boundary;
    for (int t = cut[p]; t < cut[p + 1]; ++t) {
      part.owned.push_back(t);
      for (int k = 0; k < 3; ++k) {
        const int nb = mesh.neighbor(t, k);
        if (nb < 0 || owner[nb] == p) continue;
        ghosts.insert(nb);
        boundary.insert(t);
        part.send[owner[nb]].push_back(t);
      }
    }
    for (auto& [q, list] : part.send) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    part.ghosts.assign(ghosts.begin(), ghosts.end());
    for (int g : part.ghosts) part.recv[owner[g]].push_back(g);
    part.local = part.owned;
    part.local.insert(part.local.end(), part.ghosts.begin(), part.ghosts.end());
    part.boundary.assign(boundary.begin(), boundary.end());
    for (int t : part.owned) {
      if (!boundary.count(t)) part.interior.push_back(t);
    }
  }
  return parts;
}

void check_maps(const std::vector<Partition>& parts) {
  for (const Partition& p : parts) {
    for (const auto& [q, list] : p.send) {
      if (q < 0 || q >= static_cast<int>(parts.size())) throw MapMismatch("send map names unknown rank");
      auto it = parts[q].recv.find(p.rank);
      if (it == parts[q].recv.end() || it->second != list) {
        throw MapMismatch("rank " + std::to_string(p.rank) + " sends to " + std::to_string(q) +
                          " a list the receiver does not expect");
      }
    }
    for (const auto& [q, list] : p.recv) {
      auto it = parts[q].send.find(p.rank);
      if (it == parts[q].send.end() || it->second != list) {
        throw MapMismatch("rank " + std::to_string(p.rank) + " expects from " + std::to_string(q) +
                          " a list the sender does not provide");
      }
    }
  }
}

double load_imbalance(const std::vector<Partition>& parts, std::span<const int> weights) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const Partition& p : parts) {
    double w = 0.0;
    for (int t : p.owned) w += weights.empty() ? 1.0 : weights[t];
    lo = first ? w : std::min(lo, w);
    hi = first ? w : std::max(hi, w);
    first = false;
  }
  return hi / lo;
}

Channels::Channels(int ranks) : ranks_(ranks), boxes_(static_cast<std::size_t>(ranks) * ranks) {}

void Channels::send(int from, int to, std::vector<double> msg) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) throw ChannelClosed("send on a closed channel");
    boxes_[static_cast<std::size_t>(from) * ranks_ + to].queue.push_back(std::move(msg));
  }
  cv_.notify_all();
}

std::vector<double> Channels::recv(int from, int to) {
  std::unique_lock lock(mutex_);
  Box& box = boxes_[static_cast<std::size_t>(from) * ranks_ + to];
  cv_.wait(lock, [&] { return closed_ || !box.queue.empty(); });
  if (box.queue.empty()) {
    throw ChannelClosed("channel " + std::to_string(from) + " -> " + std::to_string(to) + " closed");
  }
  std::vector<double> msg = std::move(box.queue.front());
  box.queue.pop_front();
  return msg;
}

void Channels::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

void Barrier::arrive_and_wait() {
  std::unique_lock lock(mutex_);
  if (broken_) throw ChannelClosed("barrier broken");
  const long gen = generation_;
  if (++waiting_ == count_) {
    waiting_ = 0;
    ++generation_;
    cv_.notify_all();
    return;
  }
  cv_.wait(lock, [&] { return broken_ || generation_ != gen; });
  if (generation_ == gen) throw ChannelClosed("barrier broken");
}

void Barrier::break_all() {
  {
    std::lock_guard lock(mutex_);
    broken_ = true;
  }
  cv_.notify_all();
}

PartitionExecutor::PartitionExecutor(const Partition& part, Channels& channels, Barrier& barrier, bool poison)
    : part_(part), channels_(channels), barrier_(barrier), poison_(poison) {}

void PartitionExecutor::barrier() { barrier_.arrive_and_wait(); }

namespace {

double micros_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void PartitionExecutor::phase(const ElementKernel& kernel, std::vector<HaloField> fields) {
  using clock = std::chrono::steady_clock;
  if (fields.empty()) {
    const auto t0 = clock::now();
    kernel(part_.owned);
    micros_[Interior] += micros_since(t0);
    return;
  }
  auto t0 = clock::now();
  kernel(part_.boundary);
  micros_[Boundary] += micros_since(t0);

  t0 = clock::now();
  std::vector<double> buf;
  for (const auto& [q, list] : part_.send) {
    buf.clear();
    for (const HaloField& f : fields) {
      for (int t : list) f.pack(t, buf);
    }
    channels_.send(part_.rank, q, buf);
  }
  if (poison_) {
    for (const HaloField& f : fields) {
      for (int g : part_.ghosts) f.poison(g);
    }
  }
  micros_[Pack] += micros_since(t0);

  t0 = clock::now();
  kernel(part_.interior);
  if (poison_) {
    for (const HaloField& f : fields) {
      for (int t : part_.owned) {
        if (f.any_nan(t)) {
          throw ScheduleViolation("rank " + std::to_string(part_.rank) + ": element " + std::to_string(t) +
                                  " read a ghost value before the exchange completed");
        }
      }
    }
  }
  micros_[Interior] += micros_since(t0);

  t0 = clock::now();
  for (const auto& [q, list] : part_.recv) {
    const std::vector<double> msg = channels_.recv(q, part_.rank);
    std::size_t expected = 0;
    for (const HaloField& f : fields) {
      for (int t : list) expected += f.size(t);
    }
    if (msg.size() != expected) {
      throw MapMismatch("rank " + std::to_string(part_.rank) + " received " + std::to_string(msg.size()) +
                        " values from " + std::to_string(q) + ", expected " + std::to_string(expected));
    }
    const double* in = msg.data();
    for (const HaloField& f : fields) {
      for (int t : list) {
        f.unpack(t, in);
        in += f.size(t);
      }
    }
  }
  micros_[Unpack] += micros_since(t0);
  ++exchanges_;
}

void run_partitioned(const std::vector<Partition>& parts, bool poison,
                     const std::function<void(Executor&)>& worker) {
  const int p = static_cast<int>(parts.size());
  Channels channels(p);
  Barrier barrier(p);
  std::vector<std::exception_ptr> errors(p);
  std::vector<std::thread> threads;
  threads.reserve(p);
  for (int r = 0; r < p; ++r) {
    threads.emplace_back([&, r] {
      try {
        PartitionExecutor exec(parts[r], channels, barrier, poison);
        worker(exec);
      } catch (...) {
        errors[r] = std::current_exception();
        channels.close();
        barrier.break_all();
      }
    });
  }
  for (auto& t : threads) t.join();
  // Prefer the root cause over the ChannelClosed it triggered elsewhere.
  std::exception_ptr first;
  for (const auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const ChannelClosed&) {
      if (!first) first = e;
    } catch (...) {
      std::rethrow_exception(e);
    }
  }
  if (first) std::rethrow_exception(first);
}

AmdahlFit amdahl_fit(std::span<const int> ranks, std::span<const double> times) {
  if (ranks.size() != times.size() || ranks.size() < 2) throw ShapeMismatch("need at least two (P, T) samples");
  const double n = static_cast<double>(ranks.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const double x = 1.0 / ranks[i];
    sx += x;
    sy += times[i];
    sxx += x * x;
    sxy += x * times[i];
  }
  const double det = n * sxx - sx * sx;
  AmdahlFit fit;
  if (det == 0.0) {
    fit.serial = sy / n;
    fit.r2 = 1.0;
    return fit;
  }
  fit.parallel = (n * sxy - sx * sy) / det;
  fit.serial = (sy - fit.parallel * sx) / n;
  const double mean = sy / n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const double pred = fit.serial + fit.parallel / ranks[i];
    ss_res += (times[i] - pred) * (times[i] - pred);
    ss_tot += (times[i] - mean) * (times[i] - mean);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace prismdg
