// The discrete-event loop. Five event classes drive a run: request
// generation, thread generation, execution-time estimation, thread execution
// and network transmission. Estimation passes recompute every live rate after
// each state change and schedule the earliest next milestone; superseded
// milestones are invalidated by an epoch counter. Time is integer nanoseconds
// and the whole loop is deterministic for a given bundle.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "chainsim/chain_graph.hpp"
#include "chainsim/cluster.hpp"
#include "chainsim/cpu_model.hpp"
#include "chainsim/io_net_model.hpp"
#include "chainsim/placement.hpp"
#include "chainsim/scenario.hpp"
#include "chainsim/topology.hpp"

namespace chainsim {

// Tie-break priority for simultaneous events, then insertion sequence.
enum class EventClass : int {
  RequestGeneration = 0,
  NetworkTransmission = 1,
  ThreadsExecution = 2,
  ThreadsGeneration = 3,
  ThreadsExecutionTimeEstimation = 4,
};

inline constexpr int kEventClassCount = 5;

struct Event {
  Ns ts = 0;
  EventClass cls = EventClass::RequestGeneration;
  std::int64_t seq = 0;
  int a = -1, b = -1, c = -1;   // payload, meaning depends on cls
  std::int64_t epoch = -1;      // milestone validity
};

struct EventAfter {
  bool operator()(const Event& x, const Event& y) const {
    if (x.ts != y.ts) return x.ts > y.ts;
    if (x.cls != y.cls) return static_cast<int>(x.cls) > static_cast<int>(y.cls);
    return x.seq > y.seq;
  }
};

// Arrival instants for one chain: every 1/rate seconds a batch arrives,
// starting at t = 0, for duration * rate arrivals in total.
inline std::vector<Ns> generate_request_arrivals(const TrafficPrototype& t) {
  std::vector<Ns> out;
  const std::int64_t n = t.arrival_count();
  const Ns interval = t.interval_ns();
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) out.push_back(k * interval);
  return out;
}

struct RequestRecord {
  std::int64_t id = 0;
  int binding = 0;
  Ns arrival = 0;
  Ns exe_time = 0;
};

struct BindingStats {
  std::string chain;
  int chain_nodes = 0;
  int alt_nodes = 0;   // |S'|
  int subchains = 0;   // n^{G'}
};

struct RunResult {
  std::string scenario;
  std::vector<RequestRecord> requests;
  std::vector<BindingStats> bindings;
  std::array<std::int64_t, kEventClassCount> events_by_class{};
  std::int64_t events_total = 0;
  std::int64_t threads_spawned = 0;
  int peak_live_threads = 0;
  double instructions_spawned = 0.0;
  double instructions_consumed = 0.0;
  Ns horizon = 0;
  Ns sim_end = 0;
  double wall_seconds = 0.0;  // not part of the serialized results document
  std::vector<int> replica_host;  // resolved placement
};

struct EngineOptions {
  double max_drain_factor = 10.0;
  bool cmt_includes_self = true;
};

class Engine {
 public:
  Engine(const ScenarioBundle& bundle, int scenario_idx, EngineOptions opts = {})
      : bundle_(bundle), opts_(opts), cluster_(materialize_cluster(bundle, scenario_idx)) {
    schedule(cluster_);
    const ClusterScenario& cs = bundle.cluster_scenarios[scenario_idx];
    result_.scenario = cs.name;
    result_.replica_host = cluster_.pi.replica_host;

    for (const auto& cb : cs.chains) {
      BindingRuntime rt;
      rt.binding = cb;
      rt.alt = build_alternative_graph(bundle.chains[cb.chain]);
      rt.plan = extract_subchains(rt.alt);
      bindings_.push_back(std::move(rt));
      const auto& b = bindings_.back();
      result_.bindings.push_back({bundle.chains[cb.chain].name,
                                  static_cast<int>(bundle.chains[cb.chain].nodes.size()),
                                  static_cast<int>(b.alt.nodes.size()),
                                  static_cast<int>(b.plan.subchains.size())});
    }

    hosts_.reserve(cluster_.hosts.size());
    for (std::size_t h = 0; h < cluster_.hosts.size(); ++h) {
      HostRuntime hr;
      hr.host = static_cast<int>(h);
      const HostPrototype& proto = cluster_.host_proto(static_cast<int>(h));
      hr.clock_hz = proto.clock_hz;
      hr.queues.resize(proto.cores);
      hr.sched = SchedTopology::for_cores(proto.cores);
      hosts_.push_back(std::move(hr));
    }
    link_load_ = LinkLoad(cluster_.topo.links.size());
    rr_ = std::make_unique<RoundRobinBalancer>(bundle.services.size());
  }

  RunResult run() {
    const auto wall_start = std::chrono::steady_clock::now();

    for (std::size_t bi = 0; bi < bindings_.size(); ++bi) {
      const TrafficPrototype& traffic =
          bundle_.traffic_protos[bindings_[bi].binding.traffic];
      const auto arrivals = generate_request_arrivals(traffic);
      for (std::size_t k = 0; k < arrivals.size(); ++k)
        push_event(arrivals[k], EventClass::RequestGeneration, static_cast<int>(bi),
                   static_cast<int>(k));
      result_.horizon = std::max(result_.horizon, traffic.duration_ns());
    }
    const Ns drain_deadline =
        static_cast<Ns>(static_cast<double>(result_.horizon) * opts_.max_drain_factor);

    while (!queue_.empty()) {
      const Event ev = queue_.top();
      queue_.pop();
      if ((ev.cls == EventClass::ThreadsExecution ||
           ev.cls == EventClass::NetworkTransmission) &&
          ev.epoch != epoch_)
        continue;  // superseded milestone
      if (ev.ts > drain_deadline && in_flight_ > 0)
        throw DrainTimeoutError("in-flight work at t=" + std::to_string(ev.ts) +
                                "ns exceeds the drain cap of " +
                                std::to_string(drain_deadline) + "ns");
      advance_to(ev.ts);
      result_.events_by_class[static_cast<int>(ev.cls)]++;
      result_.events_total++;
      switch (ev.cls) {
        case EventClass::RequestGeneration: on_request_generation(ev.a, ev.b); break;
        case EventClass::ThreadsGeneration: on_threads_generation(ev.a, ev.b, ev.c); break;
        case EventClass::ThreadsExecution: on_threads_execution(); break;
        case EventClass::NetworkTransmission: on_network_transmission(); break;
        case EventClass::ThreadsExecutionTimeEstimation: on_estimation(); break;
      }
    }

    if (in_flight_ > 0)
      throw DeadlockError("event queue drained with " + std::to_string(in_flight_) +
                          " request(s) still in flight");

    std::sort(result_.requests.begin(), result_.requests.end(),
              [](const RequestRecord& x, const RequestRecord& y) { return x.id < y.id; });
    result_.sim_end = now_;
    result_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result_;
  }

  const ClusterState& cluster() const { return cluster_; }

 private:
  struct BindingRuntime {
    ChainBinding binding;
    AlternativeGraph alt;
    SubchainPlan plan;
  };

  struct RequestState {
    std::int64_t id = 0;
    int binding = 0;
    Ns arrival = 0;
    int remaining_leaves = 0;
    std::vector<int> node_replica;
  };

  struct FnInstance {
    int request = -1;
    int alt_node = -1;
    int replica = -1;
    int live = 0;
  };

  // ---- event plumbing --------------------------------------------------

  void push_event(Ns ts, EventClass cls, int a = -1, int b = -1, int c = -1,
                  std::int64_t epoch = -1) {
    queue_.push(Event{ts, cls, seq_++, a, b, c, epoch});
  }

  void request_estimation() {
    if (estimation_queued_at_ == now_) return;
    estimation_queued_at_ = now_;
    push_event(now_, EventClass::ThreadsExecutionTimeEstimation);
  }

  // ---- world advance at frozen rates ------------------------------------

  void advance_to(Ns ts) {
    const Ns delta = ts - now_;
    if (delta <= 0) return;
    const double dt = ns_to_seconds(delta);
    for (int tid : live_threads_) {
      LiveThread& t = threads_[tid];
      switch (t.phase) {
        case ThreadPhase::Cpu: {
          const double left = consume_instructions(t.remaining_instructions, t.inst_rate, delta);
          t.consumed += t.remaining_instructions - left;
          t.remaining_instructions = left;
          t.runnable_sum += static_cast<double>(delta);
          break;
        }
        case ThreadPhase::Blkio:
          t.remaining_blkio = std::max<Ns>(0, t.remaining_blkio - delta);
          break;
        case ThreadPhase::Idle:
          t.remaining_idle = std::max<Ns>(0, t.remaining_idle - delta);
          break;
        case ThreadPhase::Done: break;
      }
      if (t.phase != ThreadPhase::Done) t.runnable_period += static_cast<double>(delta);
    }
    for (int xid : live_transmissions_) {
      Transmission& x = transmissions_[xid];
      if (x.phase == TransferPhase::Latency)
        x.remaining_latency = std::max<Ns>(0, x.remaining_latency - delta);
      else if (x.phase == TransferPhase::Payload)
        x.remaining_payload = std::max(0.0, x.remaining_payload - dt * x.bandwidth);
    }
    now_ = ts;
  }

  // ---- request generation ------------------------------------------------

  void on_request_generation(int binding_idx, int /*arrival_idx*/) {
    const BindingRuntime& rt = bindings_[binding_idx];
    const TrafficPrototype& traffic = bundle_.traffic_protos[rt.binding.traffic];
    for (int k = 0; k < traffic.batch; ++k) {
      RequestState req;
      req.id = static_cast<std::int64_t>(requests_.size());
      req.binding = binding_idx;
      req.arrival = now_;
      req.remaining_leaves = rt.plan.leaf_count;
      req.node_replica.assign(rt.alt.nodes.size(), -1);
      const int rid = static_cast<int>(requests_.size());
      requests_.push_back(std::move(req));
      in_flight_++;
      const int replica =
          next_hop(bundle_.chains[rt.binding.chain], rt.alt, rt.alt.source,
                   cluster_.service_replicas, *rr_);
      requests_[rid].node_replica[rt.alt.source] = replica;
      push_event(now_, EventClass::ThreadsGeneration, rid, rt.alt.source, replica);
    }
  }

  // ---- thread generation ---------------------------------------------------

  int group_of(int replica, int service, int function) {
    auto [it, fresh] = group_index_.try_emplace(std::make_tuple(replica, service, function),
                                                static_cast<int>(group_live_.size()));
    if (fresh) group_live_.push_back(0);
    return it->second;
  }

  void on_threads_generation(int rid, int alt_node, int replica) {
    const BindingRuntime& rt = bindings_[requests_[rid].binding];
    const ChainNodeSpec& node = bundle_.chains[rt.binding.chain].nodes[rt.alt.nodes[alt_node].orig];
    const auto& protos = bundle_.services[node.service].functions[node.function].threads;

    const int inst_id = static_cast<int>(instances_.size());
    instances_.push_back({rid, alt_node, replica, static_cast<int>(protos.size())});

    const int host = cluster_.pi.replica_host[replica];
    HostRuntime& hr = hosts_[host];
    const auto* rs = cluster_.res_scenario_of(replica);
    const double svc_share = rs ? rs->cpu_share() : kFullShare;
    std::vector<int> spawned;
    for (const auto& proto : protos) {
      const int tid = static_cast<int>(threads_.size());
      LiveThread t;
      t.id = tid;
      t.model = &proto;
      t.host = host;
      t.phase = ThreadPhase::Cpu;
      t.remaining_instructions = static_cast<double>(proto.instructions);
      t.replica = replica;
      t.share_group = group_of(replica, node.service, node.function);
      t.function_instance = inst_id;
      // provisional share for wake-up balancing; the estimation pass refines
      t.share = compute_share(svc_share, group_live_[t.share_group] + 1);
      // wake-up placement: the emptiest runqueue, lowest core id on ties
      int core = 0;
      for (int c = 1; c < hr.cores(); ++c)
        if (hr.queues[c].threads.size() < hr.queues[core].threads.size()) core = c;
      t.runqueue = core;
      threads_.push_back(t);
      hr.queues[core].threads.push_back(tid);
      group_live_[t.share_group]++;
      live_threads_.push_back(tid);
      spawned.push_back(tid);
      result_.threads_spawned++;
      result_.instructions_spawned += static_cast<double>(proto.instructions);
      live_count_++;
    }
    result_.peak_live_threads = std::max(result_.peak_live_threads, live_count_);

    for (int tid : spawned)
      if (threads_[tid].remaining_instructions <= 0.0) finish_cpu_phase(tid);

    load_balance(hr, threads_);
    request_estimation();
  }

  // ---- thread execution -----------------------------------------------------

  void on_threads_execution() {
    const std::vector<int> subjects = pending_thread_subjects_;
    std::vector<int> balance_hosts;
    for (int tid : subjects) {
      LiveThread& t = threads_[tid];
      switch (t.phase) {
        case ThreadPhase::Cpu:
          balance_hosts.push_back(t.host);
          finish_cpu_phase(tid);
          break;
        case ThreadPhase::Blkio:
          t.remaining_blkio = 0;
          enter_idle(tid);
          break;
        case ThreadPhase::Idle:
          t.remaining_idle = 0;
          conclude_thread(tid);
          break;
        case ThreadPhase::Done: break;
      }
    }
    for (int h : balance_hosts) load_balance(hosts_[h], threads_);
    request_estimation();
  }

  // CPU end: account the tail, leave the runqueue, start the blkio phase.
  void finish_cpu_phase(int tid) {
    LiveThread& t = threads_[tid];
    t.consumed += t.remaining_instructions;
    t.remaining_instructions = 0.0;
    auto& q = hosts_[t.host].queues[t.runqueue].threads;
    q.erase(std::find(q.begin(), q.end(), tid));
    t.runqueue = -1;
    group_live_[t.share_group]--;

    const auto* rs = cluster_.res_scenario_of(t.replica);
    const double host_bw = cluster_.host_proto(t.host).capacities[Resource::BlkioBw];
    t.phase = ThreadPhase::Blkio;
    t.remaining_blkio =
        blkio_time(t.model->blkio_rw, host_bw, rs ? rs->blkio_bw : std::nullopt);
    if (t.remaining_blkio <= 0) enter_idle(tid);
  }

  void enter_idle(int tid) {
    LiveThread& t = threads_[tid];
    t.phase = ThreadPhase::Idle;
    t.remaining_idle = t.model->idle_time;
    if (t.remaining_idle <= 0) conclude_thread(tid);
  }

  void conclude_thread(int tid) {
    LiveThread& t = threads_[tid];
    t.phase = ThreadPhase::Done;
    live_count_--;
    result_.instructions_consumed += t.consumed;
    FnInstance& inst = instances_[t.function_instance];
    if (--inst.live == 0) on_node_complete(inst.request, inst.alt_node, inst.replica);
  }

  // ---- chain propagation -----------------------------------------------------

  void on_node_complete(int rid, int alt_node, int replica) {
    RequestState& req = requests_[rid];
    const BindingRuntime& rt = bindings_[req.binding];
    const ChainSpec& chain = bundle_.chains[rt.binding.chain];

    if (rt.alt.outdeg(alt_node) == 0) {
      if (--req.remaining_leaves == 0) {
        in_flight_--;
        result_.requests.push_back({req.id, req.binding, req.arrival, now_ - req.arrival});
      }
      return;
    }

    const int src_host = cluster_.pi.replica_host[replica];
    for (int eid : rt.alt.out[alt_node]) {
      const AltEdge& edge = rt.alt.edges[eid];
      const int dst_replica =
          next_hop(chain, rt.alt, edge.to, cluster_.service_replicas, *rr_);
      req.node_replica[edge.to] = dst_replica;
      const int dst_host = cluster_.pi.replica_host[dst_replica];
      if (dst_host == src_host) {
        // co-located replicas: the network transfer time is zero
        push_event(now_, EventClass::ThreadsGeneration, rid, edge.to, dst_replica);
        continue;
      }
      const HostPath& path = cluster_.topo.path_between(src_host, dst_host);
      Transmission x;
      x.id = static_cast<int>(transmissions_.size());
      x.src_replica = replica;
      x.dst_replica = dst_replica;
      x.src_host = src_host;
      x.dst_host = dst_host;
      x.remaining_latency = path_latency(cluster_.topo, path);
      x.remaining_payload = static_cast<double>(chain.edges[edge.orig].payload);
      x.links = path.links;
      const auto* src_rs = cluster_.res_scenario_of(replica);
      const auto* dst_rs = cluster_.res_scenario_of(dst_replica);
      if (src_rs) x.sender_out_cap = src_rs->out_bw;
      if (dst_rs) x.receiver_in_cap = dst_rs->in_bw;
      x.request = rid;
      x.alt_node = edge.to;
      if (x.remaining_latency <= 0 && x.remaining_payload <= 0.0) {
        push_event(now_, EventClass::ThreadsGeneration, rid, edge.to, dst_replica);
        continue;
      }
      if (x.remaining_latency <= 0) {
        x.phase = TransferPhase::Payload;
        link_load_.add(x.links);
      }
      transmissions_.push_back(std::move(x));
      live_transmissions_.push_back(transmissions_.back().id);
    }
  }

  // ---- network transmission ----------------------------------------------------

  void on_network_transmission() {
    const std::vector<int> subjects = pending_net_subjects_;
    for (int xid : subjects) {
      Transmission& x = transmissions_[xid];
      if (x.phase == TransferPhase::Latency) {
        x.remaining_latency = 0;
        if (x.remaining_payload > 0.0) {
          x.phase = TransferPhase::Payload;
          link_load_.add(x.links);
        } else {
          deliver(x);
        }
      } else if (x.phase == TransferPhase::Payload) {
        x.remaining_payload = 0.0;
        link_load_.remove(x.links);
        deliver(x);
      }
    }
    request_estimation();
  }

  void deliver(Transmission& x) {
    x.phase = TransferPhase::Done;
    push_event(now_, EventClass::ThreadsGeneration, x.request, x.alt_node, x.dst_replica);
  }

  // ---- estimation pass -----------------------------------------------------------

  void compact_live_lists() {
    std::vector<int> live;
    live.reserve(live_threads_.size());
    for (int tid : live_threads_)
      if (threads_[tid].phase != ThreadPhase::Done) live.push_back(tid);
    live_threads_ = std::move(live);
    std::vector<int> lx;
    lx.reserve(live_transmissions_.size());
    for (int xid : live_transmissions_)
      if (transmissions_[xid].phase != TransferPhase::Done) lx.push_back(xid);
    live_transmissions_ = std::move(lx);
  }

  // Recompute shares, ratios, miss rates and bandwidths; then schedule the
  // earliest thread and transmission milestones under the fresh epoch.
  void on_estimation() {
    estimation_queued_at_ = -1;
    compact_live_lists();
    epoch_++;

    for (int tid : live_threads_) {
      LiveThread& t = threads_[tid];
      if (!t.runnable()) continue;
      const auto* rs = cluster_.res_scenario_of(t.replica);
      const double svc_share = rs ? rs->cpu_share() : 1024.0;
      t.share = compute_share(svc_share, group_live_[t.share_group]);
    }
    for (int tid : live_threads_) {
      LiveThread& t = threads_[tid];
      if (!t.runnable()) continue;
      const HostRuntime& hr = hosts_[t.host];
      double share_sum = 0.0;
      double maccs_sum = 0.0;
      for (int other : hr.queues[t.runqueue].threads) {
        share_sum += threads_[other].share;
        if (other != tid || opts_.cmt_includes_self)
          maccs_sum += static_cast<double>(threads_[other].model->mem_accesses);
      }
      const auto* rs = cluster_.res_scenario_of(t.replica);
      const bool guaranteed = rs && rs->guaranteed();
      double quota_cap = kFullShare;
      if (guaranteed)
        quota_cap = *rs->cpu_limits_mc * kFullShare / 1000.0 /
                    static_cast<double>(group_live_[t.share_group]);
      t.share_ratio = compute_share_ratio(t.share, share_sum, guaranteed, quota_cap);
      t.miss_rate = cache_miss_rate(*t.model, rs ? rs->cpu_limits_mc : std::nullopt,
                                    group_live_[t.share_group], maccs_sum);
      t.inst_rate = instruction_rate(*t.model, hr.clock_hz, t.share_ratio, t.miss_rate);
    }

    Ns thread_min = std::numeric_limits<Ns>::max();
    pending_thread_subjects_.clear();
    for (int tid : live_threads_) {
      const LiveThread& t = threads_[tid];
      Ns eta;
      switch (t.phase) {
        case ThreadPhase::Cpu:
          eta = std::max<Ns>(1, effective_cpu_time(t.remaining_instructions, *t.model,
                                                   hosts_[t.host].clock_hz, t.share_ratio,
                                                   t.miss_rate));
          break;
        case ThreadPhase::Blkio: eta = std::max<Ns>(1, t.remaining_blkio); break;
        case ThreadPhase::Idle: eta = std::max<Ns>(1, t.remaining_idle); break;
        default: continue;
      }
      if (eta < thread_min) {
        thread_min = eta;
        pending_thread_subjects_.clear();
      }
      if (eta == thread_min) pending_thread_subjects_.push_back(tid);
    }
    if (!pending_thread_subjects_.empty())
      push_event(now_ + thread_min, EventClass::ThreadsExecution, -1, -1, -1, epoch_);

    Ns net_min = std::numeric_limits<Ns>::max();
    pending_net_subjects_.clear();
    for (int xid : live_transmissions_) {
      Transmission& x = transmissions_[xid];
      Ns eta;
      if (x.phase == TransferPhase::Latency) {
        eta = std::max<Ns>(1, x.remaining_latency);
      } else {
        x.bandwidth = path_bandwidth(cluster_.topo, x.links, link_load_, x.sender_out_cap,
                                     x.receiver_in_cap);
        if (x.bandwidth <= 0.0 && x.remaining_payload > 0.0)
          throw StalledTransferError("transfer from host '" +
                                     cluster_.topo.host_name(x.src_host) + "' to '" +
                                     cluster_.topo.host_name(x.dst_host) +
                                     "' has zero available bandwidth");
        eta = ceil_duration_ns(x.remaining_payload / x.bandwidth);
      }
      if (eta < net_min) {
        net_min = eta;
        pending_net_subjects_.clear();
      }
      if (eta == net_min) pending_net_subjects_.push_back(xid);
    }
    if (!pending_net_subjects_.empty())
      push_event(now_ + net_min, EventClass::NetworkTransmission, -1, -1, -1, epoch_);
  }

  // ---- state ------------------------------------------------------------------

  const ScenarioBundle& bundle_;
  EngineOptions opts_;
  ClusterState cluster_;
  std::vector<BindingRuntime> bindings_;
  std::vector<HostRuntime> hosts_;
  std::vector<LiveThread> threads_;
  std::vector<int> live_threads_;
  std::vector<Transmission> transmissions_;
  std::vector<int> live_transmissions_;
  std::vector<FnInstance> instances_;
  std::vector<RequestState> requests_;
  std::map<std::tuple<int, int, int>, int> group_index_;
  std::vector<int> group_live_;
  LinkLoad link_load_;
  std::unique_ptr<RoundRobinBalancer> rr_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::int64_t seq_ = 0;
  std::int64_t epoch_ = 0;
  Ns now_ = 0;
  Ns estimation_queued_at_ = -1;
  int in_flight_ = 0;
  int live_count_ = 0;
  std::vector<int> pending_thread_subjects_;
  std::vector<int> pending_net_subjects_;

  RunResult result_;
};

inline RunResult run_simulation(const ScenarioBundle& bundle, int scenario_idx,
                                EngineOptions opts = {}) {
  return Engine(bundle, scenario_idx, opts).run();
}

inline RunResult run_simulation(const ScenarioBundle& bundle, const std::string& scenario,
                                EngineOptions opts = {}) {
  const int idx = bundle.cluster_scenario_index(scenario);
  if (idx < 0) throw ReferenceError("unknown cluster scenario '" + scenario + "'");
  return run_simulation(bundle, idx, opts);
}

}  // namespace chainsim
