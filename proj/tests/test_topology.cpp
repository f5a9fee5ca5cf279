#include <doctest.h>

#include <algorithm>

#include "chainsim/topology.hpp"
#include "fixtures.hpp"

using namespace chainsim;

namespace {

// scenario text with a custom topologies section and three declared routers
std::string with_topology(const std::string& topo_json) {
  std::string text = fixtures::table3_scenario_json();
  const std::string hosts_needle = "\"routers\": {\"r1\": \"netgear10g\"}";
  text.replace(text.find(hosts_needle), hosts_needle.size(),
               "\"routers\": {\"r1\": \"netgear10g\", \"r2\": \"netgear10g\", "
               "\"r3\": \"netgear10g\"}");
  const std::string needle =
      "\"tau1\": {\n"
      "      \"nodes\": [\"h1\", \"h2\", \"h3\", \"h4\", \"r1\"],\n"
      "      \"edges\": [[\"h1\", \"r1\", \"cat6\"], [\"h2\", \"r1\", \"cat6\"],\n"
      "                [\"h3\", \"r1\", \"cat6\"], [\"h4\", \"r1\", \"cat6\"]]\n"
      "    }";
  std::string out = text;
  out.replace(out.find(needle), needle.size(), topo_json);
  return out;
}

// exhaustive DFS over directed links, used as the path oracle
bool dfs_path(const TopologyGraph& g, int node, int target_host, std::vector<char>& seen,
              std::vector<int>& links) {
  if (node == target_host) return true;
  for (const auto& l : g.links) {
    if (l.from != node) continue;
    if (l.to < g.num_hosts() && l.to != target_host) continue;  // no transit through hosts
    if (l.to >= g.num_hosts() && seen[l.to]) continue;
    if (l.to >= g.num_hosts()) seen[l.to] = 1;
    links.push_back(l.id);
    if (dfs_path(g, l.to, target_host, seen, links)) return true;
    links.pop_back();
  }
  return false;
}

}  // namespace

TEST_CASE("smallest topology: one host, one router, two directed links") {
  const std::string text = with_topology(
      R"("tau1": {"nodes": ["h1", "r1"], "edges": [["h1", "r1", "cat6"]]})");
  const ScenarioBundle b = parse_scenario(text);
  const TopologyGraph g = build_topology(b, 0);
  CHECK(g.num_hosts() == 1);
  CHECK(g.num_routers() == 1);
  CHECK(g.links.size() == 2);
  CHECK(g.links[0].latency == 420'000);
}

TEST_CASE("star topology link census and capacities") {
  const ScenarioBundle b = parse_scenario(fixtures::table3_scenario_json());
  const TopologyGraph g = build_topology(b, 0);
  CHECK(g.num_hosts() == 4);
  CHECK(g.num_routers() == 1);
  CHECK(g.links.size() == 8);  // 4 bidirectional host connections, no router links

  // host->router capacity is the NIC egress (1 Gbps), router ingress is 10x
  for (int h = 0; h < 4; ++h) {
    CHECK(g.links[g.host_uplink_[h]].capacity == doctest::Approx(1.25e8));
    CHECK(g.links[g.host_downlink_[h]].capacity == doctest::Approx(1.25e8));
  }

  SUBCASE("single-router path") {
    const HostPath& p = g.path_between(0, 1);
    REQUIRE(p.routers.size() == 1);
    CHECK(g.router_name(p.routers[0]) == "r1");
    REQUIRE(p.links.size() == 2);
    CHECK(g.links[p.links[0]].from == 0);
    CHECK(g.links[p.links[1]].to == 1);
    CHECK(path_latency(g, p) == 730'000 + 2 * 420'000);
  }

  SUBCASE("identical hosts are the caller's short-circuit") {
    CHECK_THROWS_AS(g.path_between(2, 2), NoPathError);
  }
}

TEST_CASE("two-router tree path matches the DFS oracle") {
  const std::string text = with_topology(
      R"("tau1": {"nodes": ["h1", "h2", "h3", "h4", "r1", "r2"],
                  "edges": [["h1", "r1", "cat6"], ["h2", "r1", "cat6"],
                            ["h3", "r2", "cat6"], ["h4", "r2", "cat6"],
                            ["r1", "r2", "cat6"]]})");
  const ScenarioBundle b = parse_scenario(text);
  const TopologyGraph g = build_topology(b, 0);

  const HostPath& p = g.path_between(0, 2);  // h1 on r1 -> h3 on r2
  CHECK(p.routers.size() == 2);
  CHECK(p.links.size() == 3);

  for (int a = 0; a < g.num_hosts(); ++a) {
    for (int c = 0; c < g.num_hosts(); ++c) {
      if (a == c) continue;
      std::vector<char> seen(g.num_hosts() + g.num_routers(), 0);
      std::vector<int> oracle_links;
      REQUIRE(dfs_path(g, a, c, seen, oracle_links));
      CHECK(g.path_between(a, c).links == oracle_links);
    }
  }
}

TEST_CASE("reverse path property: same routers, opposite links") {
  const std::string text = with_topology(
      R"("tau1": {"nodes": ["h1", "h2", "h3", "h4", "r1", "r2", "r3"],
                  "edges": [["h1", "r1", "cat6"], ["h2", "r2", "cat6"],
                            ["h3", "r3", "cat6"], ["h4", "r3", "cat6"],
                            ["r1", "r2", "cat6"], ["r2", "r3", "cat6"]]})");
  const ScenarioBundle b = parse_scenario(text);
  const TopologyGraph g = build_topology(b, 0);
  for (int a = 0; a < g.num_hosts(); ++a) {
    for (int c = 0; c < g.num_hosts(); ++c) {
      if (a == c) continue;
      auto fwd = g.path_between(a, c).routers;
      auto rev = g.path_between(c, a).routers;
      std::reverse(rev.begin(), rev.end());
      CHECK(fwd == rev);
    }
  }
}

TEST_CASE("malformed topologies") {
  SUBCASE("router cycle") {
    const std::string text = with_topology(
        R"("tau1": {"nodes": ["h1", "h2", "h3", "h4", "r1", "r2", "r3"],
                    "edges": [["h1", "r1"], ["h2", "r2"], ["h3", "r3"], ["h4", "r1"],
                              ["r1", "r2"], ["r2", "r3"], ["r3", "r1"]]})");
    CHECK_THROWS_AS(build_topology(parse_scenario(text), 0), TopologyError);
  }
  SUBCASE("host with two routers") {
    const std::string text = with_topology(
        R"("tau1": {"nodes": ["h1", "h2", "h3", "h4", "r1", "r2"],
                    "edges": [["h1", "r1"], ["h1", "r2"], ["h2", "r1"],
                              ["h3", "r1"], ["h4", "r1"]]})");
    CHECK_THROWS_AS(build_topology(parse_scenario(text), 0), TopologyError);
  }
  SUBCASE("host without a router") {
    const std::string text = with_topology(
        R"("tau1": {"nodes": ["h1", "h2", "h3", "h4", "r1"],
                    "edges": [["h1", "r1"], ["h2", "r1"], ["h3", "r1"]]})");
    CHECK_THROWS_AS(build_topology(parse_scenario(text), 0), TopologyError);
  }
  SUBCASE("host to host connection") {
    const std::string text = with_topology(
        R"("tau1": {"nodes": ["h1", "h2", "h3", "h4", "r1"],
                    "edges": [["h1", "h2"], ["h1", "r1"], ["h2", "r1"],
                              ["h3", "r1"], ["h4", "r1"]]})");
    CHECK_THROWS_AS(build_topology(parse_scenario(text), 0), TopologyError);
  }
}

TEST_CASE("large clusters derive paths lazily with identical results") {
  // 300 hosts on two routers: beyond the precompute threshold
  ojson hosts = ojson::object();
  ojson nodes = ojson::array();
  ojson edges = ojson::array();
  for (int i = 0; i < 300; ++i) {
    const std::string n = "h" + std::to_string(i);
    hosts[n] = "box";
    nodes.push_back(n);
    edges.push_back(ojson::array({n, i < 150 ? "ra" : "rb"}));
  }
  nodes.push_back("ra");
  nodes.push_back("rb");
  edges.push_back(ojson::array({"ra", "rb"}));
  const ojson root = {
      {"prototypes",
       {{"microservices", {{"s", {{"f", {{1, 1.0, 0, 0, 0, 0, 0}}}}}}},
        {"hosts", {{"box", ojson::array({1, 1e9, ojson::object()})}}},
        {"routers", {{"r", ojson::array({0, 1e9, 1e9})}}},
        {"traffics", {{"t", ojson::array({1, 1, 1})}}}}},
      {"equipments", {{"hosts", hosts}, {"routers", {{"ra", "r"}, {"rb", "r"}}}}},
      {"topologies", {{"wide", {{"nodes", nodes}, {"edges", edges}}}}},
      {"sfcs", {{"c", {{"nodes", {{"n", "s.f"}}}, {"edges", ojson::array()}}}}},
      {"placement_scenarios",
       {{"p", {{"algorithm", "least_allocated"}, {"options", {{"millicores", 1}}}}}}},
      {"cluster_scenarios",
       {{"cs",
         {{"service_chains",
           {{"c", {{"traffic_type", "t"}, {"nodes_settings", ojson::object()}}}}},
          {"placement_scenario", "p"},
          {"topology", "wide"}}}}}};
  const ScenarioBundle b = parse_scenario(ojson(root).dump());
  const TopologyGraph g = build_topology(b, 0);
  CHECK(g.lazy_);
  const HostPath& cross = g.path_between(0, 200);  // crosses both routers
  CHECK(cross.routers.size() == 2);
  CHECK(cross.links.size() == 3);
  const HostPath& again = g.path_between(0, 200);
  CHECK(&cross == &again);  // memoized
  CHECK(g.path_between(10, 20).routers.size() == 1);
}

TEST_CASE("disconnected routers raise NoPathError on query") {
  const std::string text = with_topology(
      R"("tau1": {"nodes": ["h1", "h2", "h3", "h4", "r1", "r2"],
                  "edges": [["h1", "r1"], ["h2", "r1"], ["h3", "r2"], ["h4", "r2"]]})");
  const ScenarioBundle b = parse_scenario(text);
  const TopologyGraph g = build_topology(b, 0);
  CHECK_NOTHROW(g.path_between(0, 1));   // same island
  CHECK_THROWS_AS(g.path_between(0, 2), NoPathError);
}
