// Storage and network time models: blkio time by bandwidth division, and
// payload transfers with equal per-link bandwidth sharing, path-min
// bottleneck selection and endpoint NIC caps.
#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "chainsim/core.hpp"
#include "chainsim/topology.hpp"

namespace chainsim {

// t_blkio_time = blk_rw / effective bandwidth; a service-level blkio cap
// replaces the host figure when smaller.
inline Ns blkio_time(std::int64_t blk_rw, double host_blkio_bw,
                     std::optional<double> service_blkio_bw = std::nullopt) {
  if (blk_rw <= 0) return 0;
  double bw = host_blkio_bw;
  if (service_blkio_bw && *service_blkio_bw > 0.0 && *service_blkio_bw < bw)
    bw = *service_blkio_bw;
  if (bw <= 0.0)
    throw ConfigError("thread reads/writes " + std::to_string(blk_rw) +
                      " bytes but the effective blkio bandwidth is zero");
  return ceil_duration_ns(static_cast<double>(blk_rw) / bw);
}

enum class TransferPhase { Latency, Payload, Done };

struct Transmission {
  int id = -1;
  int src_replica = -1, dst_replica = -1;
  int src_host = -1, dst_host = -1;
  TransferPhase phase = TransferPhase::Latency;
  Ns remaining_latency = 0;       // routers + links, charged once, front-loaded
  double remaining_payload = 0.0; // bytes
  double bandwidth = 0.0;         // bytes/s at the last rebalance
  std::vector<int> links;
  std::optional<double> sender_out_cap;
  std::optional<double> receiver_in_cap;

  // engine bookkeeping: delivery target
  int request = -1;
  int alt_node = -1;
};

// Payload-phase transmission count per directed link.
struct LinkLoad {
  std::vector<int> active;

  explicit LinkLoad(std::size_t links = 0) : active(links, 0) {}
  void add(const std::vector<int>& path) {
    for (int l : path) active[l]++;
  }
  void remove(const std::vector<int>& path) {
    for (int l : path) active[l]--;
  }
};

// Available bandwidth for one flow: every directed link splits its capacity equally among the
// flows through it; the flow gets the minimum share along its path, further
// capped by the sender's out and the receiver's in bandwidth controls.
inline double path_bandwidth(const TopologyGraph& g, const std::vector<int>& path,
                             const LinkLoad& load,
                             std::optional<double> sender_out_cap = std::nullopt,
                             std::optional<double> receiver_in_cap = std::nullopt) {
  double theta = std::numeric_limits<double>::infinity();
  for (int l : path) {
    const int sharers = std::max(1, load.active[l]);
    theta = std::min(theta, g.links[l].capacity / sharers);
  }
  if (sender_out_cap) theta = std::min(theta, *sender_out_cap);
  if (receiver_in_cap) theta = std::min(theta, *receiver_in_cap);
  return theta;
}

// Completion time at current rates: remaining latency plus remaining payload
// over the available bandwidth.
inline Ns transfer_time(const Transmission& t, double theta) {
  Ns total = t.remaining_latency;
  if (t.remaining_payload > 0.0) {
    if (theta <= 0.0)
      throw StalledTransferError("transfer has " + std::to_string(t.remaining_payload) +
                                 " bytes left but zero available bandwidth");
    total += ceil_duration_ns(t.remaining_payload / theta);
  }
  return total;
}

}  // namespace chainsim
