// Results documents: a versioned JSON file per completed scenario run plus a
// CSV view of the per-request records. Serialization is deterministic: key
// order is fixed, times are integer nanoseconds, aggregates are printed with
// exactly three decimal places.
#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainsim/engine.hpp"

namespace chainsim {

inline std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

struct ChainAggregate {
  std::string chain;
  std::int64_t requests = 0;
  double mean_ns = 0.0;
  double median_ns = 0.0;
  double p95_ns = 0.0;
};

inline std::vector<ChainAggregate> aggregate_by_chain(const RunResult& r) {
  std::vector<std::vector<Ns>> per_binding(r.bindings.size());
  for (const auto& req : r.requests) per_binding[req.binding].push_back(req.exe_time);

  std::vector<ChainAggregate> out;
  for (std::size_t b = 0; b < r.bindings.size(); ++b) {
    ChainAggregate agg;
    agg.chain = r.bindings[b].chain;
    auto& v = per_binding[b];
    agg.requests = static_cast<std::int64_t>(v.size());
    if (!v.empty()) {
      std::sort(v.begin(), v.end());
      double sum = 0.0;
      for (Ns t : v) sum += static_cast<double>(t);
      agg.mean_ns = sum / static_cast<double>(v.size());
      const std::size_t n = v.size();
      agg.median_ns = n % 2 ? static_cast<double>(v[n / 2])
                            : (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
      // nearest-rank percentile
      const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
      agg.p95_ns = static_cast<double>(v[std::max<std::size_t>(rank, 1) - 1]);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

// The serialized document deliberately omits wall-clock timing so identical
// invocations produce byte-identical files; timing goes to the log instead.
inline ojson build_results_document(const ScenarioBundle& bundle, const RunResult& r) {
  ojson doc = ojson::object();
  doc["schema_version"] = 1;
  doc["scenario"] = r.scenario;

  const int cs_idx = bundle.cluster_scenario_index(r.scenario);
  const ClusterScenario& cs = bundle.cluster_scenarios.at(cs_idx);
  ojson config = ojson::object();
  config["placement_scenario"] = bundle.placements[cs.placement_scenario].name;
  config["placement_algorithm"] = bundle.placements[cs.placement_scenario].algorithm;
  ojson weights = ojson::object();
  for (Resource res : all_resources())
    weights[resource_name(res)] = bundle.placements[cs.placement_scenario].weights[res];
  config["weights"] = std::move(weights);
  config["topology"] = bundle.topologies[cs.topology].name;
  config["tie_break"] = "lowest-host-id";
  doc["config"] = std::move(config);

  const auto aggs = aggregate_by_chain(r);
  ojson chains = ojson::object();
  for (std::size_t b = 0; b < r.bindings.size(); ++b) {
    const auto& agg = aggs[b];
    ojson c = ojson::object();
    c["requests"] = agg.requests;
    c["mean_exe_time_ns"] = fixed3(agg.mean_ns);
    c["median_exe_time_ns"] = fixed3(agg.median_ns);
    c["p95_exe_time_ns"] = fixed3(agg.p95_ns);
    c["alt_graph_nodes"] = r.bindings[b].alt_nodes;
    c["subchains"] = r.bindings[b].subchains;
    chains[r.bindings[b].chain] = std::move(c);
  }
  doc["chains"] = std::move(chains);

  ojson requests = ojson::array();
  for (const auto& req : r.requests) {
    ojson o = ojson::object();
    o["id"] = req.id;
    o["chain"] = r.bindings[req.binding].chain;
    o["arrival_ns"] = req.arrival;
    o["exe_time_ns"] = req.exe_time;
    requests.push_back(std::move(o));
  }
  doc["requests"] = std::move(requests);

  ojson engine = ojson::object();
  engine["events_total"] = r.events_total;
  engine["events_request_generation"] =
      r.events_by_class[static_cast<int>(EventClass::RequestGeneration)];
  engine["events_threads_generation"] =
      r.events_by_class[static_cast<int>(EventClass::ThreadsGeneration)];
  engine["events_execution_time_estimation"] =
      r.events_by_class[static_cast<int>(EventClass::ThreadsExecutionTimeEstimation)];
  engine["events_threads_execution"] =
      r.events_by_class[static_cast<int>(EventClass::ThreadsExecution)];
  engine["events_network_transmission"] =
      r.events_by_class[static_cast<int>(EventClass::NetworkTransmission)];
  engine["threads_spawned"] = r.threads_spawned;
  engine["peak_live_threads"] = r.peak_live_threads;
  engine["horizon_ns"] = r.horizon;
  engine["sim_end_ns"] = r.sim_end;
  doc["engine"] = std::move(engine);
  return doc;
}

inline std::string results_json(const ScenarioBundle& bundle, const RunResult& r) {
  return build_results_document(bundle, r).dump(1) + "\n";
}

// One row per request, stable column order. 60 requests make 61 lines.
inline std::string export_csv(const RunResult& r) {
  std::string out = "request_index,chain,arrival_ns,exe_time_ns\n";
  for (const auto& req : r.requests) {
    out += std::to_string(req.id);
    out += ',';
    out += r.bindings[req.binding].chain;
    out += ',';
    out += std::to_string(req.arrival);
    out += ',';
    out += std::to_string(req.exe_time);
    out += '\n';
  }
  return out;
}

}  // namespace chainsim
