// Service-chain flow graph transforms: the alternative graph G' in which
// every node is visited once (duplicating nodes with indegree >= 2, one copy
// per incoming edge, rerouted edges only), and the ordered subchain plan over
// G' (a new subchain starts at the source and at every child of a node with
// outdegree >= 2; a subchain ends at the first node with outdegree != 1).
#pragma once

#include <cstdint>
#include <deque>
#include <sstream>
#include <string>
#include <vector>

#include "chainsim/core.hpp"
#include "chainsim/scenario.hpp"

namespace chainsim {

struct AltNode {
  int orig = -1;       // node in G
  int copy = 0;        // 0 for the original instance
  int in_edge = -1;    // the G edge rerouted onto this copy; -1 for the source
};

struct AltEdge {
  int from = -1, to = -1;  // alt node indices
  int orig = -1;           // edge in G
};

// G': a rooted arborescence. Originals keep their ids from G (0..n-1) and all
// outgoing edges; duplicates are appended leaves.
struct AlternativeGraph {
  int n_orig = 0;
  int source = -1;
  std::vector<AltNode> nodes;
  std::vector<AltEdge> edges;              // one per G edge, in G edge order
  std::vector<std::vector<int>> out;       // alt node -> alt edge ids
  std::vector<int> in_edge_of;             // alt node -> alt edge id (-1 for source)

  int outdeg(int node) const { return static_cast<int>(out[node].size()); }
};

inline AlternativeGraph build_alternative_graph(const ChainSpec& g) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<int> indeg(n, 0);
  for (const auto& e : g.edges) indeg[e.to]++;
  int source = -1;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) {
      if (source >= 0) throw GraphError("chain '" + g.name + "' has more than one source node");
      source = v;
    }
  if (source < 0) throw GraphError("chain '" + g.name + "' has no source node");
  for (const auto& e : g.edges)
    if (e.from == source && e.to == source)
      throw GraphError("chain '" + g.name + "' has a self-loop on its source node");

  AlternativeGraph a;
  a.n_orig = n;
  a.source = source;
  for (int v = 0; v < n; ++v) a.nodes.push_back({v, 0, -1});

  // First incoming edge keeps the original node; each further incoming edge
  // targets a fresh duplicate. Duplicates carry no outgoing edges, which
  // unrolls every cycle exactly once.
  std::vector<char> first_taken(n, 0);
  first_taken[source] = 1;  // the source's instance is the request entry
  std::vector<int> copies(n, 0);
  for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
    const auto& e = g.edges[ei];
    int target;
    if (!first_taken[e.to]) {
      first_taken[e.to] = 1;
      target = e.to;
      a.nodes[target].in_edge = static_cast<int>(ei);
    } else {
      target = static_cast<int>(a.nodes.size());
      a.nodes.push_back({e.to, ++copies[e.to], static_cast<int>(ei)});
    }
    a.edges.push_back({e.from, target, static_cast<int>(ei)});
  }

  a.out.assign(a.nodes.size(), {});
  a.in_edge_of.assign(a.nodes.size(), -1);
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    a.out[a.edges[i].from].push_back(static_cast<int>(i));
    a.in_edge_of[a.edges[i].to] = static_cast<int>(i);
  }
  return a;
}

// One ordered subchain: its nodes from source to sink, the alt edge that
// delivers the request into it (-1 for the root chain) and the edges linking
// consecutive nodes. Entry plus internal edges of all subchains partition E'.
struct Subchain {
  int entry_edge = -1;
  std::vector<int> nodes;
  std::vector<int> edges;
};

struct SubchainPlan {
  std::vector<Subchain> subchains;
  std::vector<int> node_subchain;  // alt node -> subchain index
  int leaf_count = 0;              // alt nodes with outdegree 0
};

inline SubchainPlan extract_subchains(const AlternativeGraph& a) {
  SubchainPlan plan;
  plan.node_subchain.assign(a.nodes.size(), -1);

  std::deque<std::pair<int, int>> sources;  // (alt node, entry alt edge)
  sources.push_back({a.source, -1});
  while (!sources.empty()) {
    auto [start, entry] = sources.front();
    sources.pop_front();
    Subchain sc;
    sc.entry_edge = entry;
    int node = start;
    for (;;) {
      sc.nodes.push_back(node);
      plan.node_subchain[node] = static_cast<int>(plan.subchains.size());
      if (a.outdeg(node) != 1) break;
      int edge = a.out[node][0];
      sc.edges.push_back(edge);
      node = a.edges[edge].to;
    }
    if (a.outdeg(node) >= 2)
      for (int edge : a.out[node]) sources.push_back({a.edges[edge].to, edge});
    plan.subchains.push_back(std::move(sc));
  }

  for (std::size_t v = 0; v < a.nodes.size(); ++v)
    if (a.outdeg(static_cast<int>(v)) == 0) plan.leaf_count++;
  return plan;
}

// One round-robin counter per service ("the cluster load-balancer"), shared
// across chains and requests; session affinity is not modeled.
class RoundRobinBalancer {
 public:
  explicit RoundRobinBalancer(std::size_t num_services) : counters_(num_services, 0) {}

  int next(int service, int replica_count) {
    const int pick = static_cast<int>(counters_[service] % static_cast<std::uint64_t>(replica_count));
    counters_[service]++;
    return pick;
  }

 private:
  std::vector<std::uint64_t> counters_;
};

// next_hop: the replica that receives the flow entering `node`'s service.
inline int next_hop(const ChainSpec& g, const AlternativeGraph& a, int alt_node,
                    const std::vector<std::vector<int>>& service_replicas,
                    RoundRobinBalancer& rr) {
  const int svc = g.nodes[a.nodes[alt_node].orig].service;
  const auto& reps = service_replicas[svc];
  return reps[rr.next(svc, static_cast<int>(reps.size()))];
}

// ---------------------------------------------------------------------------
// dot exports for --dump-graphs

inline std::string to_dot(const ChainSpec& g) {
  std::ostringstream os;
  os << "digraph \"" << g.name << "\" {\n";
  for (const auto& n : g.nodes) os << "  \"" << n.name << "\";\n";
  for (const auto& e : g.edges)
    os << "  \"" << g.nodes[e.from].name << "\" -> \"" << g.nodes[e.to].name
       << "\" [label=\"" << e.payload << "B\"];\n";
  os << "}\n";
  return os.str();
}

inline std::string alt_node_label(const ChainSpec& g, const AlternativeGraph& a, int v) {
  std::string label = g.nodes[a.nodes[v].orig].name;
  if (a.nodes[v].copy > 0) label += "'" + std::to_string(a.nodes[v].copy);
  return label;
}

inline std::string to_dot(const ChainSpec& g, const AlternativeGraph& a) {
  std::ostringstream os;
  os << "digraph \"" << g.name << "_alt\" {\n";
  for (std::size_t v = 0; v < a.nodes.size(); ++v)
    os << "  \"" << alt_node_label(g, a, static_cast<int>(v)) << "\";\n";
  for (const auto& e : a.edges)
    os << "  \"" << alt_node_label(g, a, e.from) << "\" -> \"" << alt_node_label(g, a, e.to)
       << "\";\n";
  os << "}\n";
  return os.str();
}

inline std::string to_dot(const ChainSpec& g, const AlternativeGraph& a,
                          const SubchainPlan& plan) {
  static const char* palette[] = {"lightblue", "lightsalmon", "palegreen", "khaki",
                                  "plum",      "lightgray",   "orange",    "cyan"};
  std::ostringstream os;
  os << "digraph \"" << g.name << "_subchains\" {\n  node [style=filled];\n";
  for (std::size_t v = 0; v < a.nodes.size(); ++v) {
    int sc = plan.node_subchain[v];
    os << "  \"" << alt_node_label(g, a, static_cast<int>(v)) << "\" [fillcolor=\""
       << palette[sc % 8] << "\" xlabel=\"c" << sc + 1 << "\"];\n";
  }
  for (const auto& e : a.edges)
    os << "  \"" << alt_node_label(g, a, e.from) << "\" -> \"" << alt_node_label(g, a, e.to)
       << "\";\n";
  os << "}\n";
  return os.str();
}

}  // namespace chainsim
