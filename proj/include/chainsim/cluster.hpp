// Runtime cluster state for one cluster scenario: hosts with live capacity
// vectors, the replica set in placement-queue order, and the active policies.
#pragma once

#include <string>
#include <vector>

#include "chainsim/scenario.hpp"
#include "chainsim/topology.hpp"

namespace chainsim {

struct HostState {
  int equipment = -1;  // bundle host instance
  int proto = -1;
  std::string name;
  ResourceVector initial;
  ResourceVector current;   // decremented as replicas land
};

struct ReplicaInfo {
  int service = -1;
  int ordinal = 0;        // index within its service
  int res_scenario = -1;  // -1: Best Effort
};

// Binary placement matrix kept as replica -> host with a matrix view for
// checks. Row sums are 0 while queued and exactly 1 once scheduled.
struct PlacementMatrix {
  std::vector<int> replica_host;

  int host_of(int replica) const { return replica_host[replica]; }
  int row_sum(int replica) const { return replica_host[replica] >= 0 ? 1 : 0; }
};

struct ClusterState {
  const ScenarioBundle* bundle = nullptr;
  int scenario = -1;
  TopologyGraph topo;
  std::vector<HostState> hosts;
  std::vector<ReplicaInfo> replicas;               // placement queue order
  std::vector<std::vector<int>> service_replicas;  // global service -> replica ids
  std::vector<ServiceSetting> service_settings;    // global service -> effective setting
  PlacementScenario placement;
  const AffinityRuleset* ruleset = nullptr;  // null: no rules
  PlacementMatrix pi;

  const ResourceAllocScenario* res_scenario_of(int replica) const {
    int rs = replicas[replica].res_scenario;
    return rs >= 0 ? &bundle->res_scenarios[rs] : nullptr;
  }
  ResourceVector replica_requests(int replica) const {
    const auto* rs = res_scenario_of(replica);
    return rs ? rs->requests() : ResourceVector{};
  }
  const HostPrototype& host_proto(int host) const {
    return bundle->host_protos[hosts[host].proto];
  }
};

// Builds hosts from the scenario's topology, collects services in
// first-mention order across the scenario's chains (replicas of a service are
// contiguous in the queue), and snapshots the active policies.
inline ClusterState materialize_cluster(const ScenarioBundle& b, int scenario_idx) {
  const ClusterScenario& cs = b.cluster_scenarios.at(scenario_idx);
  ClusterState c;
  c.bundle = &b;
  c.scenario = scenario_idx;
  c.topo = build_topology(b, cs.topology);

  for (int h = 0; h < c.topo.num_hosts(); ++h) {
    HostState hs;
    hs.equipment = c.topo.host_equipment[h];
    hs.proto = b.hosts[hs.equipment].proto;
    hs.name = c.topo.host_name(h);
    hs.initial = b.host_protos[hs.proto].capacities;
    hs.current = hs.initial;
    c.hosts.push_back(std::move(hs));
  }

  c.service_settings.assign(b.services.size(), ServiceSetting{});
  std::vector<char> configured(b.services.size(), 0);
  std::vector<int> order;
  auto touch = [&](int svc, const ServiceSetting& st, const std::string& where) {
    if (!configured[svc]) {
      configured[svc] = 1;
      c.service_settings[svc] = st;
      order.push_back(svc);
      return;
    }
    const ServiceSetting& prev = c.service_settings[svc];
    if (prev.replica_count != st.replica_count || prev.res_scenario != st.res_scenario)
      throw ValidationError(where + ": conflicting settings for service '" +
                            b.services[svc].name + "' across chains");
  };
  for (const auto& cb : cs.chains) {
    const ChainSpec& chain = b.chains[cb.chain];
    std::vector<char> has_setting(b.services.size(), 0);
    for (const auto& st : cb.settings) {
      has_setting[st.service] = 1;
      touch(st.service, st,
            "cluster_scenarios." + cs.name + ".service_chains." + chain.name);
    }
    // services referenced by chain nodes but left unconfigured default to one
    // Best Effort replica
    for (const auto& n : chain.nodes) {
      if (!has_setting[n.service] && !configured[n.service]) {
        ServiceSetting st;
        st.service = n.service;
        touch(n.service, st, "cluster_scenarios." + cs.name);
      }
    }
  }

  c.service_replicas.assign(b.services.size(), {});
  for (int svc : order) {
    const ServiceSetting& st = c.service_settings[svc];
    for (int k = 0; k < st.replica_count; ++k) {
      c.service_replicas[svc].push_back(static_cast<int>(c.replicas.size()));
      c.replicas.push_back({svc, k, st.res_scenario});
    }
  }
  c.pi.replica_host.assign(c.replicas.size(), -1);

  c.placement = b.placements[cs.placement_scenario];
  if (cs.affinity_ruleset >= 0) c.ruleset = &b.rulesets[cs.affinity_ruleset];
  return c;
}

}  // namespace chainsim
