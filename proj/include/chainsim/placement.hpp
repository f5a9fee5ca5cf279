// Least Allocated placement: enqueue replicas, filter hosts by affinity and
// resource fit, score eligible hosts by weighted request-to-capacity ratios,
// bind each replica to the best host and book its requests against the
// host's free capacity.
#pragma once

#include <algorithm>
#include <deque>
#include <vector>

#include "chainsim/cluster.hpp"

namespace chainsim {

inline constexpr double kScoreMin = 0.0;
inline constexpr double kScoreMax = 100.0;

// Eligible hosts for one replica, in ascending host id order.
// (a) with affinity partners, candidates are the hosts already holding a
//     partner replica (none placed yet -> empty, the scheduler requeues);
// (b) hosts holding an anti-affinity partner replica are removed;
// (c) hosts whose free capacity cannot fit the request are removed, as are
//     hosts with zero initial capacity in a score-weighted resource and hosts
//     whose free memory is below the replica's memory limit.
// Affinity is read from the declaring service's row: the declarer follows its
// partner once that partner is placed (requeueing covers either queue order).
// Anti-affinity excludes the pair whichever row declares it.
inline std::vector<int> filter_hosts(const ClusterState& c, int replica) {
  const int svc = c.replicas[replica].service;
  const int H = static_cast<int>(c.hosts.size());

  std::vector<char> candidate(H, 0);
  bool any_affinity = false;
  if (c.ruleset) {
    for (std::size_t j = 0; j < c.bundle->services.size(); ++j) {
      if (!c.ruleset->affinity[svc][j]) continue;
      any_affinity = true;
      for (int r : c.service_replicas[j]) {
        if (r == replica) continue;
        int h = c.pi.replica_host[r];
        if (h >= 0) candidate[h] = 1;
      }
    }
  }
  if (!any_affinity) std::fill(candidate.begin(), candidate.end(), 1);

  if (c.ruleset) {
    for (std::size_t j = 0; j < c.bundle->services.size(); ++j) {
      if (!c.ruleset->anti[svc][j] && !c.ruleset->anti[j][svc]) continue;
      for (int r : c.service_replicas[j]) {
        if (r == replica) continue;
        int h = c.pi.replica_host[r];
        if (h >= 0) candidate[h] = 0;
      }
    }
  }

  const ResourceVector req = c.replica_requests(replica);
  const auto* rs = c.res_scenario_of(replica);
  std::vector<int> out;
  for (int h = 0; h < H; ++h) {
    if (!candidate[h]) continue;
    if (!req.fits_within(c.hosts[h].current)) continue;
    if (rs && rs->mem_limits && *rs->mem_limits > c.hosts[h].current[Resource::Mem]) continue;
    bool zero_weighted_cap = false;
    for (Resource r : all_resources())
      if (c.placement.weights[r] > 0.0 && c.hosts[h].initial[r] <= 0.0)
        zero_weighted_cap = true;
    if (zero_weighted_cap) continue;
    out.push_back(h);
  }
  return out;
}

// Score in [0, 100]: the weighted mean allocated-capacity fraction the host
// would have after taking the replica. Empty host with a zero request scores
// exactly 0.
inline double score_host(const ClusterState& c, int replica, int host,
                         const PlacementScenario& config) {
  const ResourceVector req = c.replica_requests(replica);
  const HostState& h = c.hosts[host];
  double weight_sum = 0.0;
  double acc = 0.0;
  for (Resource r : all_resources()) {
    weight_sum += config.weights[r];
    if (config.weights[r] <= 0.0) continue;
    const double term = 1.0 - (h.current[r] - req[r]) / h.initial[r];
    acc += term * config.weights[r];
  }
  return kScoreMax * acc / weight_sum;
}

inline void place_replica(ClusterState& c, int replica, int host) {
  c.pi.replica_host[replica] = host;
  c.hosts[host].current -= c.replica_requests(replica);
}

inline void unplace_replica(ClusterState& c, int replica) {
  const int host = c.pi.replica_host[replica];
  if (host < 0) return;
  c.hosts[host].current += c.replica_requests(replica);
  c.pi.replica_host[replica] = -1;
}

// Queue-driven scheduling with a single requeue pass: a replica with no
// eligible host is pushed to the back once (affinity partners may not be
// placed yet); failing a second time is fatal.
inline PlacementMatrix schedule(ClusterState& c) {
  std::deque<int> queue;
  for (std::size_t r = 0; r < c.replicas.size(); ++r) queue.push_back(static_cast<int>(r));
  std::vector<char> requeued(c.replicas.size(), 0);

  while (!queue.empty()) {
    const int replica = queue.front();
    queue.pop_front();
    std::vector<int> eligible = filter_hosts(c, replica);
    if (eligible.empty()) {
      if (requeued[replica])
        throw UnschedulableError(
            "replica " + std::to_string(c.replicas[replica].ordinal + 1) + " of service '" +
            c.bundle->services[c.replicas[replica].service].name + "' cannot be placed");
      requeued[replica] = 1;
      queue.push_back(replica);
      continue;
    }
    // Least Allocated: the lowest score wins, ties go to the lowest host id.
    int best = eligible.front();
    double best_score = score_host(c, replica, best, c.placement);
    for (std::size_t i = 1; i < eligible.size(); ++i) {
      double s = score_host(c, replica, eligible[i], c.placement);
      if (s < best_score) {
        best_score = s;
        best = eligible[i];
      }
    }
    place_replica(c, replica, best);
  }
  return c.pi;
}

}  // namespace chainsim
