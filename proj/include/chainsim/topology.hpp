// Network topology materialization: hosts and routers become nodes, every
// declared connection becomes two opposite directed links, and host-to-host
// paths over the (acyclic) router graph are precomputed for O(1) lookup.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "chainsim/core.hpp"
#include "chainsim/scenario.hpp"

namespace chainsim {

// Ordered routers and directed links from one host to another. The first
// link leaves the source host, the last one enters the destination host.
struct HostPath {
  std::vector<int> routers;  // local router indices
  std::vector<int> links;    // directed link ids
};

struct DirectedLink {
  int id = -1;
  int from = -1, to = -1;    // node index: hosts first, then routers
  double capacity = 0.0;     // bytes/s; min(out cap of tail, in cap of head)
  Ns latency = 0;
};

class TopologyGraph {
 public:
  // Local node numbering: hosts occupy [0, num_hosts), routers follow.
  std::vector<int> host_equipment;    // local host -> bundle host instance
  std::vector<int> router_equipment;  // local router -> bundle router instance
  std::vector<int> host_router;       // local host -> local router
  std::vector<DirectedLink> links;
  std::vector<std::vector<int>> router_adj;  // router -> outgoing link ids to routers
  std::vector<Ns> router_latency;

  int num_hosts() const { return static_cast<int>(host_equipment.size()); }
  int num_routers() const { return static_cast<int>(router_equipment.size()); }
  int router_node(int r) const { return num_hosts() + r; }

  // Unique path per ordered host pair. Pairs are precomputed at build time up
  // to 256 hosts; beyond that they are derived on first use and memoized, so
  // repeated queries stay O(1) either way.
  const HostPath& path_between(int a, int b) const {
    if (a == b) throw NoPathError("path_between: identical hosts (transfer time is zero)");
    if (!lazy_) {
      const int idx = a * num_hosts() + b;
      if (!path_valid_[idx])
        throw NoPathError("no path between hosts '" + host_name(a) + "' and '" +
                          host_name(b) + "'");
      return paths_[idx];
    }
    const std::int64_t key = static_cast<std::int64_t>(a) * num_hosts() + b;
    auto it = lazy_paths_.find(key);
    if (it == lazy_paths_.end()) {
      HostPath p;
      const bool found = derive_path(a, b, p);
      it = lazy_paths_.emplace(key, std::move(p)).first;
      if (!found) lazy_missing_.insert(key);
    }
    if (lazy_missing_.count(key))
      throw NoPathError("no path between hosts '" + host_name(a) + "' and '" + host_name(b) +
                        "'");
    return it->second;
  }

  std::string host_name(int h) const { return host_names_[h]; }
  std::string router_name(int r) const { return router_names_[r]; }

  bool derive_path(int a, int b, HostPath& out) const;

  // filled by build_topology
  bool lazy_ = false;
  std::vector<HostPath> paths_;
  std::vector<char> path_valid_;
  std::vector<std::string> host_names_;
  std::vector<std::string> router_names_;
  std::vector<int> host_uplink_;    // host -> link id host->router
  std::vector<int> host_downlink_;  // host -> link id router->host
  mutable std::map<std::int64_t, HostPath> lazy_paths_;
  mutable std::set<std::int64_t> lazy_missing_;
};

namespace detail {

// Unique router-to-router walk on the undirected tree; returns false when
// disconnected.
inline bool router_walk(const TopologyGraph& g, int from, int to, std::vector<int>& out_links) {
  out_links.clear();
  if (from == to) return true;
  const int n = g.num_routers();
  std::vector<int> prev_link(n, -1);
  std::vector<char> seen(n, 0);
  std::vector<int> stack = {from};
  seen[from] = 1;
  while (!stack.empty()) {
    int r = stack.back();
    stack.pop_back();
    if (r == to) break;
    for (int lid : g.router_adj[r]) {
      int next = g.links[lid].to - g.num_hosts();
      if (!seen[next]) {
        seen[next] = 1;
        prev_link[next] = lid;
        stack.push_back(next);
      }
    }
  }
  if (!seen[to]) return false;
  for (int r = to; r != from;) {
    int lid = prev_link[r];
    out_links.push_back(lid);
    r = g.links[lid].from - g.num_hosts();
  }
  std::reverse(out_links.begin(), out_links.end());
  return true;
}

}  // namespace detail

inline TopologyGraph build_topology(const ScenarioBundle& b, int topology_idx) {
  const TopologySpec& spec = b.topologies.at(topology_idx);
  TopologyGraph g;

  // split declared nodes into hosts and routers, keeping declaration order
  std::map<std::string, int> local;  // name -> local node index
  for (const auto& n : spec.nodes) {
    int hi = ScenarioBundle::find_by_name(b.hosts, n);
    if (hi >= 0) {
      local[n] = g.num_hosts();
      g.host_equipment.push_back(hi);
      g.host_names_.push_back(n);
    }
  }
  for (const auto& n : spec.nodes) {
    int ri = ScenarioBundle::find_by_name(b.routers, n);
    if (ri >= 0) {
      local[n] = g.router_node(g.num_routers());
      g.router_equipment.push_back(ri);
      g.router_names_.push_back(n);
    }
  }

  const int H = g.num_hosts();
  const int R = g.num_routers();
  g.host_router.assign(H, -1);
  g.router_adj.assign(R, {});
  g.router_latency.resize(R);
  for (int r = 0; r < R; ++r)
    g.router_latency[r] = b.router_protos[b.routers[g.router_equipment[r]].proto].latency;
  g.host_uplink_.assign(H, -1);
  g.host_downlink_.assign(H, -1);

  auto out_cap = [&](int node) {
    if (node < H) return b.host_protos[b.hosts[g.host_equipment[node]].proto]
        .capacities[Resource::OutBw];
    return b.router_protos[b.routers[g.router_equipment[node - H]].proto].out_bw;
  };
  auto in_cap = [&](int node) {
    if (node < H) return b.host_protos[b.hosts[g.host_equipment[node]].proto]
        .capacities[Resource::InBw];
    return b.router_protos[b.routers[g.router_equipment[node - H]].proto].in_bw;
  };

  // union-find over routers for acyclicity
  std::vector<int> uf(R);
  for (int i = 0; i < R; ++i) uf[i] = i;
  auto find = [&](int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };

  std::vector<std::vector<char>> adjacent(H + R, std::vector<char>(H + R, 0));
  for (const auto& e : spec.edges) {
    const std::string where = "topology '" + spec.name + "'";
    int na = local.at(e.a);
    int nb = local.at(e.b);
    if (na == nb) throw TopologyError(where + ": self connection on '" + e.a + "'");
    if (adjacent[na][nb])
      throw TopologyError(where + ": duplicate connection between '" + e.a + "' and '" + e.b +
                          "'");
    adjacent[na][nb] = adjacent[nb][na] = 1;
    const bool a_host = na < H, b_host = nb < H;
    if (a_host && b_host)
      throw TopologyError(where + ": hosts '" + e.a + "' and '" + e.b +
                          "' may only connect through a router");
    if (!a_host && !b_host) {
      int ra = find(na - H), rb = find(nb - H);
      if (ra == rb)
        throw TopologyError(where + ": cycle detected among routers at connection '" + e.a +
                            "' - '" + e.b + "'");
      uf[ra] = rb;
    }
    Ns lat = e.link_proto >= 0 ? b.link_protos[e.link_proto].latency : 0;
    for (auto [from, to] : {std::pair{na, nb}, std::pair{nb, na}}) {
      DirectedLink l;
      l.id = static_cast<int>(g.links.size());
      l.from = from;
      l.to = to;
      l.latency = lat;
      l.capacity = std::min(out_cap(from), in_cap(to));
      if (from < H) {
        if (g.host_router[from] >= 0 && g.host_router[from] != to - H)
          throw TopologyError(where + ": host '" + g.host_name(from) +
                              "' connects to more than one router");
        g.host_router[from] = to - H;
        g.host_uplink_[from] = l.id;
      } else if (to < H) {
        g.host_downlink_[to] = l.id;
      } else {
        g.router_adj[from - H].push_back(l.id);
      }
      g.links.push_back(l);
    }
  }

  for (int h = 0; h < H; ++h)
    if (g.host_router[h] < 0)
      throw TopologyError("topology '" + spec.name + "': host '" + g.host_name(h) +
                          "' is not connected to any router");

  // all ordered host pairs up front; larger clusters memoize on demand to
  // bound the quadratic table
  g.lazy_ = H > 256;
  if (!g.lazy_) {
    g.paths_.assign(static_cast<std::size_t>(H) * H, {});
    g.path_valid_.assign(static_cast<std::size_t>(H) * H, 0);
    for (int a = 0; a < H; ++a)
      for (int bh = 0; bh < H; ++bh) {
        if (a == bh) continue;
        if (g.derive_path(a, bh, g.paths_[a * H + bh])) g.path_valid_[a * H + bh] = 1;
      }
  }
  return g;
}

inline bool TopologyGraph::derive_path(int a, int b, HostPath& out) const {
  std::vector<int> walk;
  if (!detail::router_walk(*this, host_router[a], host_router[b], walk)) return false;
  out.links.push_back(host_uplink_[a]);
  out.routers.push_back(host_router[a]);
  for (int lid : walk) {
    out.links.push_back(lid);
    out.routers.push_back(links[lid].to - num_hosts());
  }
  out.links.push_back(host_downlink_[b]);
  return true;
}

// Fixed latency charged once per transmission: every router on the path plus
// every traversed link.
inline Ns path_latency(const TopologyGraph& g, const HostPath& p) {
  Ns total = 0;
  for (int r : p.routers) total += g.router_latency[r];
  for (int l : p.links) total += g.links[l].latency;
  return total;
}

}  // namespace chainsim
