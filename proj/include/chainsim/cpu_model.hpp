// CPU time approximation on multi-core hosts: cgroups share/quota semantics,
// logarithmic cache-miss corrections, the CPU Performance Equation with
// incremental instruction accounting, and the simplified CFS load balancer.
//
// A share ratio of 1024 is one full core; the ratio scales available core
// throughput so an isolated Best Effort thread reduces exactly to the CPU
// Performance Equation.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "chainsim/core.hpp"
#include "chainsim/scenario.hpp"

namespace chainsim {

inline constexpr double kFullShare = 1024.0;

// t_share: the parent service's cpu.shares divided over the endpoint
// function's currently running threads.
inline double compute_share(double service_cpu_share, int live_function_threads) {
  return service_cpu_share / static_cast<double>(live_function_threads);
}

// t_share_ratio in (0, 1024]. Best Effort (no quota) threads split the core
// proportionally to shares on their runqueue; Guaranteed threads hold their
// fixed share, throttled by the quota-derived per-thread cap and by one core.
inline double compute_share_ratio(double share, double runqueue_share_sum, bool guaranteed,
                                  double quota_thread_cap = kFullShare) {
  if (!guaranteed) return share * kFullShare / runqueue_share_sum;
  return std::min({share, quota_thread_cap, kFullShare});
}

// Reference miss rate scaled by the CMC (allocated CPU size) and CMT
// (co-located memory traffic) log models. A correction with an undefined log
// argument contributes zero: CMC requires an explicit CPU limit, CMT a
// positive runqueue access count.
inline double cache_miss_rate(const ThreadPrototype& t, std::optional<double> cpu_limits_mc,
                              int live_function_threads, double runqueue_maccs_sum) {
  double cmc = 0.0;
  if (cpu_limits_mc && *cpu_limits_mc > 0.0)
    cmc = t.cmc_a * std::log(*cpu_limits_mc / static_cast<double>(live_function_threads)) +
          t.cmc_b;
  double cmt = 0.0;
  if (runqueue_maccs_sum > 0.0 && (t.cmt_a != 0.0 || t.cmt_b != 0.0))
    cmt = t.cmt_a * std::log(runqueue_maccs_sum) + t.cmt_b;
  return t.baseline_miss_rate() * std::max(0.0, cmt + 1.0) * std::max(0.0, cmc + 1.0);
}

// Average stall cycles per instruction due to cache misses.
inline double cycle_penalty(const ThreadPrototype& t, double miss_rate) {
  if (t.instructions <= 0) return 0.0;
  return static_cast<double>(t.mem_accesses) / static_cast<double>(t.instructions) * miss_rate *
         t.cache_miss_penalty;
}

// Instructions per second at the given share ratio and miss rate.
inline double instruction_rate(const ThreadPrototype& t, double clock_hz, double share_ratio,
                               double miss_rate) {
  return clock_hz * (share_ratio / kFullShare) / (t.cpi + cycle_penalty(t, miss_rate));
}

// CPU Performance Equation for a lone Best Effort thread on an idle core.
inline double isolated_cpu_time_seconds(const ThreadPrototype& t, double clock_hz) {
  const double miss_rate =
      cache_miss_rate(t, std::nullopt, 1, static_cast<double>(t.mem_accesses));
  return static_cast<double>(t.instructions) * (t.cpi + cycle_penalty(t, miss_rate)) / clock_hz;
}

inline Ns isolated_cpu_time(const ThreadPrototype& t, double clock_hz) {
  if (t.instructions <= 0) return 0;
  return ceil_duration_ns(isolated_cpu_time_seconds(t, clock_hz));
}

// Remaining CPU time of a thread on its runqueue at the current rates.
inline Ns effective_cpu_time(double remaining_instructions, const ThreadPrototype& t,
                             double clock_hz, double share_ratio, double miss_rate) {
  if (remaining_instructions <= 0.0) return 0;
  return ceil_duration_ns(remaining_instructions /
                          instruction_rate(t, clock_hz, share_ratio, miss_rate));
}

// Instructions left after running `delta` nanoseconds at the given rate,
// floored at zero.
inline double consume_instructions(double remaining_instructions, double inst_rate, Ns delta) {
  return std::max(0.0, remaining_instructions - ns_to_seconds(delta) * inst_rate);
}

// ---------------------------------------------------------------------------
// Live threads and runqueues

enum class ThreadPhase { Cpu, Blkio, Idle, Done };

struct LiveThread {
  int id = -1;
  const ThreadPrototype* model = nullptr;
  int host = -1;
  int runqueue = -1;  // core id; -1 once off the runqueue
  ThreadPhase phase = ThreadPhase::Cpu;

  double remaining_instructions = 0.0;
  Ns remaining_blkio = 0;  // resolved to time at phase entry
  Ns remaining_idle = 0;

  double share = kFullShare;
  double weight = 0.0;
  double load = 0.0;
  double share_ratio = kFullShare;
  double miss_rate = 0.0;
  double inst_rate = 0.0;  // instructions/s at the last estimation

  // load tracking; seeded 1/1 so fresh threads take part in balancing
  double runnable_sum = 1.0;
  double runnable_period = 1.0;

  // engine bookkeeping
  int replica = -1;
  int share_group = -1;      // (replica, endpoint function) group
  int function_instance = -1;
  double consumed = 0.0;

  bool runnable() const { return phase == ThreadPhase::Cpu; }
};

struct RunQueue {
  std::vector<int> threads;
};

// Two scheduling domains on the single socket: core pairs, and the NUMA node
// whose groups are the pairs. An odd core count leaves one singleton pair.
struct SchedTopology {
  std::vector<std::vector<int>> pair_groups;

  static SchedTopology for_cores(int cores) {
    SchedTopology t;
    for (int c = 0; c < cores; c += 2) {
      std::vector<int> g = {c};
      if (c + 1 < cores) g.push_back(c + 1);
      t.pair_groups.push_back(std::move(g));
    }
    return t;
  }
};

struct HostRuntime {
  int host = -1;
  double clock_hz = 1.0;
  std::vector<RunQueue> queues;
  SchedTopology sched;

  int cores() const { return static_cast<int>(queues.size()); }
};

namespace detail {

// t_weight = t_share / sum of shares on the host; t_load scales the weight by
// the fraction of time the thread was runnable.
inline void refresh_loads(HostRuntime& h, std::vector<LiveThread>& threads) {
  double host_share_sum = 0.0;
  for (const auto& q : h.queues)
    for (int tid : q.threads) host_share_sum += threads[tid].share;
  for (auto& q : h.queues) {
    for (int tid : q.threads) {
      LiveThread& t = threads[tid];
      t.weight = host_share_sum > 0.0 ? t.share / host_share_sum : 0.0;
      t.load = t.runnable_period > 0.0 ? t.runnable_sum * t.weight / t.runnable_period : t.weight;
    }
  }
}

inline double queue_load(const HostRuntime& h, const std::vector<LiveThread>& threads, int core) {
  double sum = 0.0;
  for (int tid : h.queues[core].threads) sum += threads[tid].load;
  return sum;
}

// Mean runqueue load over a group of cores.
inline double group_load(const HostRuntime& h, const std::vector<LiveThread>& threads,
                         const std::vector<int>& cores) {
  double sum = 0.0;
  for (int c : cores) sum += queue_load(h, threads, c);
  return sum / static_cast<double>(cores.size());
}

inline int first_idle_core(const HostRuntime& h, const std::vector<int>& cores) {
  for (int c : cores)
    if (h.queues[c].threads.empty()) return c;
  return -1;
}

inline void move_thread(HostRuntime& h, std::vector<LiveThread>& threads, int tid, int from,
                        int to) {
  auto& src = h.queues[from].threads;
  src.erase(std::find(src.begin(), src.end(), tid));
  h.queues[to].threads.push_back(tid);
  threads[tid].runqueue = to;
}

// Pull threads into current_core while the group-load gap strictly shrinks.
// Source cores are visited busiest first; when no thread of a core improves
// the balance, the next busiest core is tried. Within a core the thread
// minimizing the post-move gap wins.
inline bool pull_from_group(HostRuntime& h, std::vector<LiveThread>& threads,
                            const std::vector<int>& busiest, int current_core,
                            const std::vector<int>& current_group) {
  bool moved_any = false;
  for (;;) {
    const double cur = group_load(h, threads, current_group);
    const double busy = group_load(h, threads, busiest);
    if (!(busy > cur)) break;
    const double gap = busy - cur;
    const double spill = 1.0 / static_cast<double>(busiest.size()) +
                         1.0 / static_cast<double>(current_group.size());

    std::vector<int> order;
    for (int c : busiest)
      if (c != current_core && !h.queues[c].threads.empty()) order.push_back(c);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      const double lx = queue_load(h, threads, x);
      const double ly = queue_load(h, threads, y);
      if (lx != ly) return lx > ly;
      return x < y;
    });

    bool moved = false;
    for (int c : order) {
      int best_tid = -1;
      double best_after = gap;
      for (int tid : h.queues[c].threads) {
        const double after = std::abs(gap - threads[tid].load * spill);
        if (after < best_after - 1e-15) {
          best_after = after;
          best_tid = tid;
        }
      }
      if (best_tid >= 0) {
        move_thread(h, threads, best_tid, c, current_core);
        moved = moved_any = true;
        break;
      }
    }
    if (!moved) break;
  }
  return moved_any;
}

}  // namespace detail

// Simplified CFS load balancing. For every core and scheduling domain, the
// first idle core of the domain (else its first core) may pull work: group
// loads are compared and threads migrate from the busiest core of the busiest
// group until the balance no longer improves. Sweeps repeat until a full pass
// makes no migration.
inline void load_balance(HostRuntime& h, std::vector<LiveThread>& threads) {
  const int cores = h.cores();
  if (cores <= 1) return;

  std::vector<int> all_cores(cores);
  for (int c = 0; c < cores; ++c) all_cores[c] = c;
  // singleton groups for within-pair balancing
  std::vector<std::vector<int>> singleton(cores);
  for (int c = 0; c < cores; ++c) singleton[c] = {c};

  int sweeps = 0;
  bool moved = true;
  while (moved && sweeps++ < cores + static_cast<int>(threads.size())) {
    moved = false;
    detail::refresh_loads(h, threads);
    for (int current = 0; current < cores; ++current) {
      // NUMA domain: spans all cores, groups are the pairs
      {
        int designated = detail::first_idle_core(h, all_cores);
        if (designated < 0) designated = 0;
        if (designated == current) {
          const std::vector<int>* current_group = nullptr;
          for (const auto& g : h.sched.pair_groups)
            if (std::find(g.begin(), g.end(), current) != g.end()) current_group = &g;
          const std::vector<int>* busiest = nullptr;
          double busiest_load = -1.0;
          for (const auto& g : h.sched.pair_groups) {
            if (&g == current_group) continue;
            double l = detail::group_load(h, threads, g);
            if (l > busiest_load) {
              busiest_load = l;
              busiest = &g;
            }
          }
          if (busiest && busiest_load > detail::group_load(h, threads, *current_group))
            moved |= detail::pull_from_group(h, threads, *busiest, current, *current_group);
        }
      }
      // pair domain: spans one pair, groups are its single cores
      for (const auto& pair : h.sched.pair_groups) {
        if (std::find(pair.begin(), pair.end(), current) == pair.end()) continue;
        int designated = detail::first_idle_core(h, pair);
        if (designated < 0) designated = pair.front();
        if (designated != current) break;
        const std::vector<int>* busiest = nullptr;
        double busiest_load = -1.0;
        for (int c : pair) {
          if (c == current) continue;
          double l = detail::queue_load(h, threads, c);
          if (l > busiest_load) {
            busiest_load = l;
            busiest = &singleton[c];
          }
        }
        if (busiest && busiest_load > detail::queue_load(h, threads, current))
          moved |= detail::pull_from_group(h, threads, *busiest, current, singleton[current]);
        break;
      }
    }
  }

  // newly-idle pull, the work-conservation step: an idle core always takes
  // the lightest thread from the fullest runqueue holding two or more
  for (;;) {
    int idle = -1;
    for (int c = 0; c < cores; ++c)
      if (h.queues[c].threads.empty()) {
        idle = c;
        break;
      }
    if (idle < 0) break;
    int src = -1;
    std::size_t most = 1;
    double src_load = -1.0;
    for (int c = 0; c < cores; ++c) {
      const std::size_t size = h.queues[c].threads.size();
      const double l = detail::queue_load(h, threads, c);
      if (size >= 2 && (size > most || (size == most && l > src_load))) {
        src = c;
        most = size;
        src_load = l;
      }
    }
    if (src < 0) break;
    int pick = h.queues[src].threads.front();
    for (int tid : h.queues[src].threads)
      if (threads[tid].load < threads[pick].load ||
          (threads[tid].load == threads[pick].load && tid < pick))
        pick = tid;
    detail::move_thread(h, threads, pick, src, idle);
  }
}

}  // namespace chainsim
