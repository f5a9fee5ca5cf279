// Shared scenario fixtures used across the unit and acceptance suites.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "chainsim/scenario.hpp"

namespace fixtures {

// Three services with the measured thread models, four identical 4-core
// 1.59 GHz hosts on one 10 Gbps router (a star topology), and a handful of
// traffic shapes. Values mirror the reference measurement table.
inline std::string table3_scenario_json() {
  return R"JSON({
  "prototypes": {
    "microservices": {
      "s1": {
        "f1": [[1.4e9, 0.7432, 3.1e8, 1.0e6, 1.0e5, 4, 0]],
        "f2": [[3.1e9, 0.750, 7.2e8, 1.2e6, 1.3e5, 4, 0],
               [3.1e9, 0.715, 6.6e8, 1.7e6, 2.2e5, 3, 0]]
      },
      "s2": {
        "f1": [[1.7e9, 0.520, 3.4e8, 2.9e6, 2.0e6, 5, 0]],
        "f2": [[1.0e8, 0.4912, 7.4e8, 5.5e6, 4.1e6, 5, 0]]
      },
      "s3": {
        "f1": [[2.1e8, 0.6660, 4.3e7, 1.5e6, 5.7e5, 5, 5.1e7]],
        "f2": [[5.1e8, 0.7199, 2.2e7, 4.3e6, 2.3e6, 5, 1.0e8]]
      }
    },
    "hosts": {
      "i7host": [4, 1.59e9, {"mem": 1.6e10, "in_bw": 1.25e8, "out_bw": 1.25e8,
                             "blkio_bw": 6.57e8, "blkio_size": 5.0e11}]
    },
    "routers": {
      "netgear10g": [7.3e5, 1.25e9, 1.25e9]
    },
    "links": {
      "cat6": [4.2e5]
    },
    "traffics": {
      "steady_1rps_60s": [1, 60, 1],
      "slow_01rps_600s": [0.1, 600, 1],
      "burst_batch3": [1, 3, 3]
    }
  },
  "equipments": {
    "hosts": {"h1": "i7host", "h2": "i7host", "h3": "i7host", "h4": "i7host"},
    "routers": {"r1": "netgear10g"}
  },
  "topologies": {
    "tau1": {
      "nodes": ["h1", "h2", "h3", "h4", "r1"],
      "edges": [["h1", "r1", "cat6"], ["h2", "r1", "cat6"],
                ["h3", "r1", "cat6"], ["h4", "r1", "cat6"]]
    }
  },
  "sfcs": {
    "c1": {
      "nodes": {"n1": "s1.f1"},
      "edges": []
    },
    "c3": {
      "nodes": {"n1": "s1.f1", "n2": "s2.f1", "n3": "s3.f2"},
      "edges": [["n1", "n2", 5.0e7], ["n2", "n3", 5.0e7]]
    }
  },
  "res_alloc_scenarios": {
    "cpu_500mc": {"cpu_requests": 500, "cpu_limits": 500},
    "cpu_2000mc": {"cpu_requests": 2000, "cpu_limits": 2000},
    "mem_1g": {"mem_requests": 1.0e9}
  },
  "placement_scenarios": {
    "least_alloc_cpu_mem": {
      "algorithm": "least_allocated",
      "options": {"millicores": 1, "mem": 1}
    }
  },
  "affinity_rulesets": {
    "spread_s1_s2": {
      "affinity": {},
      "anti-affinity": {"s1": ["s2"]}
    }
  },
  "cluster_scenarios": {
    "single_service": {
      "service_chains": {
        "c1": {
          "traffic_type": "steady_1rps_60s",
          "nodes_settings": {
            "s1": {"replica_count": 1}
          }
        }
      },
      "placement_scenario": "least_alloc_cpu_mem",
      "topology": "tau1"
    },
    "chain_of_three": {
      "service_chains": {
        "c3": {
          "traffic_type": "slow_01rps_600s",
          "nodes_settings": {
            "s1": {"replica_count": 1, "res_scenario": "cpu_2000mc"},
            "s2": {"replica_count": 1, "res_scenario": "cpu_2000mc"},
            "s3": {"replica_count": 1, "res_scenario": "cpu_2000mc"}
          }
        }
      },
      "placement_scenario": "least_alloc_cpu_mem",
      "topology": "tau1"
    }
  }
})JSON";
}

// A chain spec from a bare edge list; node i maps to service i, function 0.
inline chainsim::ChainSpec make_chain(int n_nodes,
                                      const std::vector<std::pair<int, int>>& edges,
                                      std::int64_t payload = 100) {
  chainsim::ChainSpec c;
  c.name = "fixture";
  for (int i = 0; i < n_nodes; ++i)
    c.nodes.push_back({"n" + std::to_string(i + 1), i, 0});
  for (const auto& [from, to] : edges) c.edges.push_back({from, to, payload});
  std::vector<int> indeg(n_nodes, 0);
  for (const auto& e : c.edges) indeg[e.to]++;
  c.source = -1;
  for (int i = 0; i < n_nodes; ++i)
    if (indeg[i] == 0 && c.source < 0) c.source = i;
  return c;
}

struct SvcSpec {
  std::string name;
  std::vector<std::vector<double>> threads;  // rows for the single function "f"
  int replicas = 1;
  double req_mc = 0.0;  // 0: Best Effort
  double lim_mc = 0.0;  // 0: no limit
  double out_bw = 0.0;  // 0: uncapped
  double in_bw = 0.0;
};

struct EdgeSpec {
  int from, to;
  double payload;
};

// Single-chain scenario over a star topology of identical hosts, as JSON
// text. Node i of the chain calls service i's function "f".
inline std::string engine_scenario(int hosts, int cores, double clock,
                                   const std::vector<SvcSpec>& svcs,
                                   const std::vector<EdgeSpec>& edges, double rate,
                                   double duration, int batch) {
  using chainsim::ojson;
  ojson micro = ojson::object();
  ojson nodes = ojson::object();
  ojson settings = ojson::object();
  ojson res = ojson::object();
  for (std::size_t i = 0; i < svcs.size(); ++i) {
    const auto& s = svcs[i];
    micro[s.name] = ojson{{"f", s.threads}};
    nodes["n" + std::to_string(i + 1)] = s.name + ".f";
    ojson setting = ojson{{"replica_count", s.replicas}};
    if (s.req_mc > 0 || s.lim_mc > 0 || s.out_bw > 0 || s.in_bw > 0) {
      ojson r = ojson::object();
      if (s.req_mc > 0) r["cpu_requests"] = s.req_mc;
      if (s.lim_mc > 0) r["cpu_limits"] = s.lim_mc;
      if (s.out_bw > 0) r["out_bw"] = s.out_bw;
      if (s.in_bw > 0) r["in_bw"] = s.in_bw;
      res["res_" + s.name] = std::move(r);
      setting["res_scenario"] = "res_" + s.name;
    }
    settings[s.name] = std::move(setting);
  }
  ojson chain_edges = ojson::array();
  for (const auto& e : edges)
    chain_edges.push_back(ojson::array(
        {"n" + std::to_string(e.from + 1), "n" + std::to_string(e.to + 1), e.payload}));

  ojson host_names = ojson::object();
  ojson topo_nodes = ojson::array();
  ojson topo_edges = ojson::array();
  for (int h = 1; h <= hosts; ++h) {
    const std::string name = "h" + std::to_string(h);
    host_names[name] = "box";
    topo_nodes.push_back(name);
    topo_edges.push_back(ojson::array({name, "r1", "l"}));
  }
  topo_nodes.push_back("r1");

  ojson root = {
      {"prototypes",
       {{"microservices", micro},
        {"hosts",
         {{"box", ojson::array({cores, clock,
                                ojson{{"mem", 1.6e10},
                                      {"in_bw", 1.25e8},
                                      {"out_bw", 1.25e8},
                                      {"blkio_bw", 6.57e8},
                                      {"blkio_size", 5e11}}})}}},
        {"routers", {{"r", ojson::array({7.3e5, 1.25e9, 1.25e9})}}},
        {"links", {{"l", ojson::array({4.2e5})}}},
        {"traffics", {{"t", ojson::array({rate, duration, batch})}}}}},
      {"equipments", {{"hosts", host_names}, {"routers", {{"r1", "r"}}}}},
      {"topologies", {{"star", {{"nodes", topo_nodes}, {"edges", topo_edges}}}}},
      {"sfcs", {{"c", {{"nodes", nodes}, {"edges", chain_edges}}}}},
      {"res_alloc_scenarios", res},
      {"placement_scenarios",
       {{"p", {{"algorithm", "least_allocated"}, {"options", {{"millicores", 1}}}}}}},
      {"cluster_scenarios",
       {{"run",
         {{"service_chains", {{"c", {{"traffic_type", "t"}, {"nodes_settings", settings}}}}},
          {"placement_scenario", "p"},
          {"topology", "star"}}}}}};
  return ojson(root).dump();
}

// 8-node chain with a cycle between the 6th and 7th node and a back edge into
// the 3rd: node 6 ends with indegree 3 and node 3 with indegree 2, so the
// transformation duplicates those two services, reroutes the 6th, 8th and
// 10th edges and yields 5 subchains.
inline chainsim::ChainSpec fig4_chain() {
  return make_chain(8, {{0, 1},   // e1
                        {1, 2},   // e2
                        {2, 3},   // e3
                        {2, 4},   // e4
                        {3, 5},   // e5
                        {4, 2},   // e6  rerouted (second edge into node 3)
                        {5, 6},   // e7
                        {6, 5},   // e8  rerouted (cycle back into node 6)
                        {6, 7},   // e9
                        {7, 5}}); // e10 rerouted (third edge into node 6)
}

}  // namespace fixtures
