// Scenario model: typed prototypes, equipment, topologies, chains, policies
// and the cluster scenarios that tie them together, plus the JSON
// parser/serializer and the bundle validator.
//
// A scenario file is a single UTF-8 JSON object with the top-level sections
// "prototypes", "equipments", "topologies", "sfcs", "res_alloc_scenarios",
// "placement_scenarios", "affinity_rulesets" and "cluster_scenarios".
// Units are raw SI: clocks in Hz, latencies in nanoseconds, bandwidths in
// bytes/second, sizes/payloads in bytes, CPU in millicores, traffic rate in
// requests/second, traffic duration in seconds.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainsim/core.hpp"

namespace chainsim {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Prototypes

// Static per-thread performance parameters, as measured on the reference
// machine. Thread JSON rows are arrays:
//   [instructions, cpi, mem_accesses, cache_refs, cache_misses, miss_penalty,
//    blkio_rw, idle_ns?, cmc_a?, cmc_b?, cmt_a?, cmt_b?]
// The five trailing entries default to 0 (no idle time, no excess cache-miss
// correction).
struct ThreadPrototype {
  std::int64_t instructions = 0;
  double cpi = 1.0;
  std::int64_t mem_accesses = 0;
  std::int64_t cache_refs = 0;
  std::int64_t cache_misses_ref = 0;
  double cache_miss_penalty = 0.0;
  std::int64_t blkio_rw = 0;   // bytes
  Ns idle_time = 0;
  double cmc_a = 0.0, cmc_b = 0.0;
  double cmt_a = 0.0, cmt_b = 0.0;

  double baseline_miss_rate() const {
    return cache_refs > 0 ? static_cast<double>(cache_misses_ref) / static_cast<double>(cache_refs)
                          : 0.0;
  }
};

struct EndpointFunctionProto {
  std::string name;
  std::vector<ThreadPrototype> threads;
};

struct ServiceProto {
  std::string name;
  std::vector<EndpointFunctionProto> functions;

  int function_index(const std::string& fn) const {
    for (std::size_t i = 0; i < functions.size(); ++i)
      if (functions[i].name == fn) return static_cast<int>(i);
    return -1;
  }
};

struct HostPrototype {
  std::string name;
  int cores = 1;
  double clock_hz = 1.0;
  ResourceVector capacities;  // millicores always == cores * 1000
};

struct RouterPrototype {
  std::string name;
  Ns latency = 0;
  double in_bw = 0.0;   // bytes/s
  double out_bw = 0.0;  // bytes/s
};

struct LinkPrototype {
  std::string name;
  Ns latency = 0;
};

struct TrafficPrototype {
  std::string name;
  double rate = 1.0;        // requests/s
  double duration_s = 0.0;  // generation window
  int batch = 1;

  Ns interval_ns() const { return static_cast<Ns>(std::llround(1e9 / rate)); }
  Ns duration_ns() const { return seconds_to_ns(duration_s); }
  // |U| = duration * rate * batch, with a small epsilon so 600 * 0.1 is 60.
  std::int64_t arrival_count() const {
    return static_cast<std::int64_t>(std::floor(duration_s * rate + 1e-9));
  }
};

// ---------------------------------------------------------------------------
// Policies

// Per-replica resource requests/limits. Absent fields mean Best Effort: no
// reservation, no usage cap. cpu.shares follows the Kubernetes mapping of
// 1024 shares per 1000 requested millicores; the CFS period is fixed at
// 100 ms.
struct ResourceAllocScenario {
  std::string name;
  std::optional<double> cpu_requests_mc;
  std::optional<double> cpu_limits_mc;
  std::optional<double> mem_requests;
  std::optional<double> mem_limits;
  std::optional<double> in_bw;
  std::optional<double> out_bw;
  std::optional<double> blkio_bw;
  std::optional<double> blkio_size;

  static constexpr std::int64_t kCpuPeriodUs = 100'000;  // 100 ms, fixed

  double cpu_share() const {
    return cpu_requests_mc ? *cpu_requests_mc * 1024.0 / 1000.0 : 1024.0;
  }
  std::int64_t cpu_quota_us() const {
    return cpu_limits_mc ? static_cast<std::int64_t>(
                               std::llround(*cpu_limits_mc / 1000.0 * kCpuPeriodUs))
                         : 0;
  }
  bool guaranteed() const { return cpu_limits_mc.has_value(); }

  // Requested capacity per replica, for filtering/scoring/booking.
  ResourceVector requests() const {
    ResourceVector r;
    r[Resource::Millicores] = cpu_requests_mc.value_or(0.0);
    r[Resource::Mem] = mem_requests.value_or(0.0);
    r[Resource::InBw] = in_bw.value_or(0.0);
    r[Resource::OutBw] = out_bw.value_or(0.0);
    r[Resource::BlkioBw] = blkio_bw.value_or(0.0);
    r[Resource::BlkioSize] = blkio_size.value_or(0.0);
    return r;
  }
};

struct PlacementScenario {
  std::string name;
  std::string algorithm = "least_allocated";
  ResourceVector weights;
};

// Pairwise affinity/anti-affinity over all declared services.
struct AffinityRuleset {
  std::string name;
  std::vector<std::vector<std::uint8_t>> affinity;  // |S| x |S|
  std::vector<std::vector<std::uint8_t>> anti;
};

// ---------------------------------------------------------------------------
// Equipment, topology, chains

struct HostInstance {
  std::string name;
  int proto = -1;
};

struct RouterInstance {
  std::string name;
  int proto = -1;
};

struct TopologyEdgeSpec {
  // node names reference equipment hosts/routers; each entry is one physical
  // connection materialized as two opposite directed links
  std::string a, b;
  int link_proto = -1;  // -1: zero-latency default link
};

struct TopologySpec {
  std::string name;
  std::vector<std::string> nodes;
  std::vector<TopologyEdgeSpec> edges;
};

struct ChainNodeSpec {
  std::string name;
  int service = -1;
  int function = -1;
};

struct ChainEdgeSpec {
  int from = -1, to = -1;
  std::int64_t payload = 0;  // bytes
};

// Directed flow network G(C_l). Edge order is the declaration order and is
// authoritative for the alternative-graph transformation.
struct ChainSpec {
  std::string name;
  std::vector<ChainNodeSpec> nodes;
  std::vector<ChainEdgeSpec> edges;
  int source = -1;  // unique node with no incoming edges
};

// ---------------------------------------------------------------------------
// Cluster scenarios

struct ServiceSetting {
  int service = -1;
  int replica_count = 1;
  int res_scenario = -1;  // -1: Best Effort defaults
};

struct ChainBinding {
  int chain = -1;
  int traffic = -1;
  std::vector<ServiceSetting> settings;  // declaration order
};

struct ClusterScenario {
  std::string name;
  std::vector<ChainBinding> chains;
  int placement_scenario = -1;
  int topology = -1;
  int affinity_ruleset = -1;  // optional
};

// The fully parsed, cross-referenced scenario. Immutable after construction;
// all references are dense indices into the vectors below.
struct ScenarioBundle {
  std::vector<ServiceProto> services;
  std::vector<HostPrototype> host_protos;
  std::vector<RouterPrototype> router_protos;
  std::vector<LinkPrototype> link_protos;
  std::vector<TrafficPrototype> traffic_protos;
  std::vector<HostInstance> hosts;
  std::vector<RouterInstance> routers;
  std::vector<TopologySpec> topologies;
  std::vector<ChainSpec> chains;
  std::vector<ResourceAllocScenario> res_scenarios;
  std::vector<PlacementScenario> placements;
  std::vector<AffinityRuleset> rulesets;
  std::vector<ClusterScenario> cluster_scenarios;

  int service_index(const std::string& n) const { return find_by_name(services, n); }
  int cluster_scenario_index(const std::string& n) const {
    return find_by_name(cluster_scenarios, n);
  }

  template <class V>
  static int find_by_name(const V& vec, const std::string& n) {
    for (std::size_t i = 0; i < vec.size(); ++i)
      if (vec[i].name == n) return static_cast<int>(i);
    return -1;
  }
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void check(std::vector<Diagnostic>& out, bool ok, const std::string& path,
                  const std::string& msg, Severity sev = Severity::Error) {
  if (!ok) out.push_back({sev, path, msg});
}

}  // namespace detail

// Checks every type invariant on an already materialized bundle. Reference
// resolution happens at parse time; this validates values and cross-field
// constraints. Returns an empty list iff the bundle is sound.
inline std::vector<Diagnostic> validate_bundle(const ScenarioBundle& b) {
  using detail::check;
  std::vector<Diagnostic> out;

  for (const auto& svc : b.services) {
    for (const auto& fn : svc.functions) {
      const std::string base = "prototypes.microservices." + svc.name + "." + fn.name;
      check(out, !fn.threads.empty(), base, "endpoint function has no threads");
      for (std::size_t t = 0; t < fn.threads.size(); ++t) {
        const auto& th = fn.threads[t];
        const std::string p = base + "[" + std::to_string(t) + "]";
        check(out, th.instructions >= 0, p, "instructions must be >= 0");
        check(out, th.cpi > 0.0, p, "cpi must be > 0");
        check(out, th.mem_accesses >= 0, p, "mem_accesses must be >= 0");
        check(out, th.cache_refs >= 0, p, "cache_refs must be >= 0");
        check(out, th.cache_misses_ref >= 0 && th.cache_misses_ref <= th.cache_refs, p,
              "cache misses must lie in [0, cache_refs]");
        // more accesses than instructions happens in measured models of
        // memory-bound workloads, so this is advisory only
        check(out, th.mem_accesses <= th.instructions, p,
              "mem_accesses exceeds instructions", Severity::Warning);
        check(out, th.cache_miss_penalty >= 0.0, p, "cache_miss_penalty must be >= 0");
        check(out, th.blkio_rw >= 0, p, "blkio_rw must be >= 0");
        check(out, th.idle_time >= 0, p, "idle_time must be >= 0");
      }
    }
  }

  for (const auto& h : b.host_protos) {
    const std::string p = "prototypes.hosts." + h.name;
    check(out, h.cores >= 1, p, "cores must be >= 1");
    check(out, h.clock_hz > 0.0, p, "clock must be > 0");
    for (Resource r : all_resources())
      check(out, h.capacities[r] >= 0.0, p,
            std::string(resource_name(r)) + " capacity must be >= 0");
    check(out, h.capacities[Resource::Millicores] == h.cores * 1000.0, p,
          "millicores capacity must equal cores * 1000");
  }

  for (const auto& r : b.router_protos) {
    const std::string p = "prototypes.routers." + r.name;
    check(out, r.latency >= 0, p, "latency must be >= 0");
    check(out, r.in_bw >= 0.0 && r.out_bw >= 0.0, p, "bandwidth must be >= 0");
  }
  for (const auto& l : b.link_protos)
    check(out, l.latency >= 0, "prototypes.links." + l.name, "latency must be >= 0");

  for (const auto& t : b.traffic_protos) {
    const std::string p = "prototypes.traffics." + t.name;
    check(out, t.rate > 0.0, p, "rate must be > 0");
    check(out, t.duration_s > 0.0, p, "duration must be > 0");
    check(out, t.batch >= 1, p, "batch must be >= 1");
  }

  for (const auto& rs : b.res_scenarios) {
    const std::string p = "res_alloc_scenarios." + rs.name;
    auto nonneg = [&](const std::optional<double>& v, const char* what) {
      check(out, !v || *v >= 0.0, p, std::string(what) + " must be >= 0");
    };
    nonneg(rs.cpu_requests_mc, "cpu_requests");
    nonneg(rs.cpu_limits_mc, "cpu_limits");
    nonneg(rs.mem_requests, "mem_requests");
    nonneg(rs.mem_limits, "mem_limits");
    nonneg(rs.in_bw, "in_bw");
    nonneg(rs.out_bw, "out_bw");
    nonneg(rs.blkio_bw, "blkio_bw");
    nonneg(rs.blkio_size, "blkio_size");
    if (rs.cpu_limits_mc && rs.cpu_requests_mc)
      check(out, *rs.cpu_limits_mc >= *rs.cpu_requests_mc, p,
            "cpu_limits must be >= cpu_requests");
  }

  for (const auto& ps : b.placements) {
    const std::string p = "placement_scenarios." + ps.name;
    check(out, ps.algorithm == "least_allocated", p,
          "unknown placement algorithm '" + ps.algorithm + "'");
    bool any_positive = false;
    for (Resource r : all_resources()) {
      check(out, ps.weights[r] >= 0.0, p,
            std::string("weight for ") + resource_name(r) + " must be >= 0");
      any_positive = any_positive || ps.weights[r] > 0.0;
    }
    check(out, any_positive, p, "at least one resource weight must be > 0");
  }

  for (const auto& ar : b.rulesets) {
    const std::string p = "affinity_rulesets." + ar.name;
    const std::size_t n = b.services.size();
    bool shaped = ar.affinity.size() == n && ar.anti.size() == n;
    for (std::size_t i = 0; shaped && i < n; ++i)
      shaped = ar.affinity[i].size() == n && ar.anti[i].size() == n;
    if (!shaped) {
      check(out, false, p, "rule vectors must have one entry per declared service");
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const bool aff = ar.affinity[i][j] || ar.affinity[j][i];
        const bool anti = ar.anti[i][j] || ar.anti[j][i];
        if (aff && anti && i <= j)
          check(out, false, p,
                "contradictory rules: services '" + b.services[i].name + "' and '" +
                    b.services[j].name + "' are both affine and anti-affine");
      }
    }
  }

  for (const auto& c : b.chains) {
    const std::string p = "sfcs." + c.name;
    check(out, !c.nodes.empty(), p, "chain has no nodes");
    std::vector<int> indeg(c.nodes.size(), 0);
    for (std::size_t e = 0; e < c.edges.size(); ++e) {
      check(out, c.edges[e].payload >= 0, p + ".edges[" + std::to_string(e) + "]",
            "payload must be >= 0");
      if (c.edges[e].to >= 0) indeg[c.edges[e].to]++;
    }
    int sources = 0;
    for (std::size_t i = 0; i < c.nodes.size(); ++i)
      if (indeg[i] == 0) sources++;
    check(out, sources == 1, p, "chain must have exactly one source node (found " +
                                    std::to_string(sources) + ")");
    if (sources == 1 && c.source >= 0) {
      // reachability from the source
      std::vector<char> seen(c.nodes.size(), 0);
      std::vector<int> stack = {c.source};
      seen[c.source] = 1;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& e : c.edges)
          if (e.from == v && !seen[e.to]) {
            seen[e.to] = 1;
            stack.push_back(e.to);
          }
      }
      for (std::size_t i = 0; i < c.nodes.size(); ++i)
        check(out, seen[i] != 0, p + ".nodes." + c.nodes[i].name,
              "node is not reachable from the source");
    }
  }

  check(out, !b.cluster_scenarios.empty(), "cluster_scenarios", "no cluster scenario");
  for (const auto& cs : b.cluster_scenarios) {
    const std::string p = "cluster_scenarios." + cs.name;
    for (const auto& cb : cs.chains)
      for (const auto& st : cb.settings)
        check(out, st.replica_count >= 1,
              p + ".service_chains." + b.chains[cb.chain].name + ".nodes_settings." +
                  b.services[st.service].name,
              "replica_count must be >= 1");
  }

  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline const ojson& member(const ojson& o, const char* key, const std::string& path,
                           bool required = true) {
  static const ojson empty = ojson::object();
  if (!o.is_object())
    throw SyntaxError(path + ": expected a JSON object");
  auto it = o.find(key);
  if (it == o.end()) {
    if (required) throw SyntaxError(path + "." + key + ": missing required key");
    return empty;
  }
  return *it;
}

inline double number_at(const ojson& v, const std::string& path) {
  if (!v.is_number()) throw SyntaxError(path + ": expected a number");
  return v.get<double>();
}

inline std::int64_t int_at(const ojson& v, const std::string& path) {
  double d = number_at(v, path);
  double r = std::round(d);
  if (std::abs(d - r) > 1e-6 * std::max(1.0, std::abs(d)))
    throw ValidationError(path + ": expected an integral value, got " + v.dump());
  return static_cast<std::int64_t>(std::llround(r));
}

inline std::string string_at(const ojson& v, const std::string& path) {
  if (!v.is_string()) throw SyntaxError(path + ": expected a string");
  return v.get<std::string>();
}

template <class V>
int resolve(const V& vec, const std::string& name, const std::string& path,
            const char* what) {
  int idx = ScenarioBundle::find_by_name(vec, name);
  if (idx < 0)
    throw ReferenceError(path + ": unknown " + std::string(what) + " '" + name + "'");
  return idx;
}

inline ThreadPrototype parse_thread_row(const ojson& row, const std::string& path) {
  if (!row.is_array() || row.size() < 7 || row.size() > 12)
    throw SyntaxError(path +
                      ": thread row must be an array of 7 to 12 numbers "
                      "[inst, cpi, maccs, crefs, cmiss, cpenalty, blk_rw, idle?, "
                      "cmc_a?, cmc_b?, cmt_a?, cmt_b?]");
  auto num = [&](std::size_t i) { return number_at(row[i], path + "[" + std::to_string(i) + "]"); };
  ThreadPrototype t;
  t.instructions = static_cast<std::int64_t>(std::llround(num(0)));
  t.cpi = num(1);
  t.mem_accesses = static_cast<std::int64_t>(std::llround(num(2)));
  t.cache_refs = static_cast<std::int64_t>(std::llround(num(3)));
  t.cache_misses_ref = static_cast<std::int64_t>(std::llround(num(4)));
  t.cache_miss_penalty = num(5);
  t.blkio_rw = static_cast<std::int64_t>(std::llround(num(6)));
  if (row.size() > 7) t.idle_time = static_cast<Ns>(std::llround(num(7)));
  if (row.size() > 8) t.cmc_a = num(8);
  if (row.size() > 9) t.cmc_b = num(9);
  if (row.size() > 10) t.cmt_a = num(10);
  if (row.size() > 11) t.cmt_b = num(11);
  return t;
}

inline ScenarioBundle parse_bundle(const ojson& root) {
  ScenarioBundle b;

  const ojson& protos = member(root, "prototypes", "$");

  // microservices: { service: { function: [ thread rows ] } }
  for (auto& [svc_name, fns] : member(protos, "microservices", "prototypes").items()) {
    ServiceProto svc;
    svc.name = svc_name;
    const std::string sp = "prototypes.microservices." + svc_name;
    if (!fns.is_object()) throw SyntaxError(sp + ": expected an object of endpoint functions");
    for (auto& [fn_name, rows] : fns.items()) {
      EndpointFunctionProto fn;
      fn.name = fn_name;
      const std::string fp = sp + "." + fn_name;
      if (!rows.is_array()) throw SyntaxError(fp + ": expected an array of thread rows");
      for (std::size_t i = 0; i < rows.size(); ++i)
        fn.threads.push_back(parse_thread_row(rows[i], fp + "[" + std::to_string(i) + "]"));
      svc.functions.push_back(std::move(fn));
    }
    b.services.push_back(std::move(svc));
  }

  // hosts: { type: [cores, clock_hz, {capacities}] }
  for (auto& [name, arr] : member(protos, "hosts", "prototypes").items()) {
    const std::string p = "prototypes.hosts." + name;
    if (!arr.is_array() || arr.size() != 3)
      throw SyntaxError(p + ": expected [cores, clock_hz, {capacities}]");
    HostPrototype h;
    h.name = name;
    h.cores = static_cast<int>(int_at(arr[0], p + "[0]"));
    h.clock_hz = number_at(arr[1], p + "[1]");
    const ojson& caps = arr[2];
    if (!caps.is_object()) throw SyntaxError(p + "[2]: expected a capacities object");
    h.capacities[Resource::Millicores] = h.cores * 1000.0;  // Eq. cores x 1000
    for (auto& [k, v] : caps.items()) {
      bool known = false;
      for (Resource r : all_resources())
        if (k == resource_name(r)) {
          double val = number_at(v, p + "[2]." + k);
          if (r == Resource::Millicores && val != h.cores * 1000.0)
            throw ValidationError(p + "[2].millicores: must equal cores * 1000 (" +
                                  std::to_string(h.cores * 1000) + ")");
          h.capacities[r] = val;
          known = true;
          break;
        }
      if (!known) throw SyntaxError(p + "[2]." + k + ": unknown host resource");
    }
    b.host_protos.push_back(std::move(h));
  }

  for (auto& [name, arr] : member(protos, "routers", "prototypes", false).items()) {
    const std::string p = "prototypes.routers." + name;
    if (!arr.is_array() || arr.size() != 3)
      throw SyntaxError(p + ": expected [latency_ns, in_bw, out_bw]");
    RouterPrototype r;
    r.name = name;
    r.latency = static_cast<Ns>(std::llround(number_at(arr[0], p + "[0]")));
    r.in_bw = number_at(arr[1], p + "[1]");
    r.out_bw = number_at(arr[2], p + "[2]");
    b.router_protos.push_back(std::move(r));
  }

  for (auto& [name, arr] : member(protos, "links", "prototypes", false).items()) {
    const std::string p = "prototypes.links." + name;
    if (!arr.is_array() || arr.size() != 1)
      throw SyntaxError(p + ": expected [latency_ns]");
    LinkPrototype l;
    l.name = name;
    l.latency = static_cast<Ns>(std::llround(number_at(arr[0], p + "[0]")));
    b.link_protos.push_back(std::move(l));
  }

  for (auto& [name, arr] : member(protos, "traffics", "prototypes", false).items()) {
    const std::string p = "prototypes.traffics." + name;
    if (!arr.is_array() || arr.size() != 3)
      throw SyntaxError(p + ": expected [rate, duration_s, batch]");
    TrafficPrototype t;
    t.name = name;
    t.rate = number_at(arr[0], p + "[0]");
    t.duration_s = number_at(arr[1], p + "[1]");
    t.batch = static_cast<int>(int_at(arr[2], p + "[2]"));
    b.traffic_protos.push_back(std::move(t));
  }

  const ojson& equip = member(root, "equipments", "$");
  for (auto& [name, type] : member(equip, "hosts", "equipments").items()) {
    const std::string p = "equipments.hosts." + name;
    b.hosts.push_back(
        {name, resolve(b.host_protos, string_at(type, p), p, "host prototype")});
  }
  for (auto& [name, type] : member(equip, "routers", "equipments", false).items()) {
    const std::string p = "equipments.routers." + name;
    b.routers.push_back(
        {name, resolve(b.router_protos, string_at(type, p), p, "router prototype")});
  }

  for (auto& [name, topo] : member(root, "topologies", "$").items()) {
    const std::string p = "topologies." + name;
    TopologySpec t;
    t.name = name;
    const ojson& nodes = member(topo, "nodes", p);
    if (!nodes.is_array()) throw SyntaxError(p + ".nodes: expected an array of equipment names");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      std::string n = string_at(nodes[i], p + ".nodes[" + std::to_string(i) + "]");
      if (ScenarioBundle::find_by_name(b.hosts, n) < 0 &&
          ScenarioBundle::find_by_name(b.routers, n) < 0)
        throw ReferenceError(p + ".nodes[" + std::to_string(i) + "]: unknown equipment '" +
                             n + "'");
      t.nodes.push_back(std::move(n));
    }
    const ojson& edges = member(topo, "edges", p);
    if (!edges.is_array()) throw SyntaxError(p + ".edges: expected an array of [a, b, link_type?]");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string ep = p + ".edges[" + std::to_string(i) + "]";
      const ojson& e = edges[i];
      if (!e.is_array() || e.size() < 2 || e.size() > 3)
        throw SyntaxError(ep + ": expected [a, b] or [a, b, link_type]");
      TopologyEdgeSpec es;
      es.a = string_at(e[0], ep + "[0]");
      es.b = string_at(e[1], ep + "[1]");
      if (e.size() == 3)
        es.link_proto = resolve(b.link_protos, string_at(e[2], ep + "[2]"), ep + "[2]",
                                "link prototype");
      for (const std::string* n : {&es.a, &es.b})
        if (std::find(t.nodes.begin(), t.nodes.end(), *n) == t.nodes.end())
          throw ReferenceError(ep + ": node '" + *n + "' is not declared in " + p + ".nodes");
      t.edges.push_back(std::move(es));
    }
    b.topologies.push_back(std::move(t));
  }

  // sfcs: { chain: { nodes: {node: "svc.fn"}, edges: [[from, to, payload], ...] } }
  for (auto& [name, sfc] : member(root, "sfcs", "$", false).items()) {
    const std::string p = "sfcs." + name;
    ChainSpec c;
    c.name = name;
    for (auto& [node_name, ref] : member(sfc, "nodes", p).items()) {
      const std::string np = p + ".nodes." + node_name;
      std::string r = string_at(ref, np);
      auto dot = r.find('.');
      if (dot == std::string::npos)
        throw SyntaxError(np + ": expected \"service.function\", got '" + r + "'");
      ChainNodeSpec n;
      n.name = node_name;
      n.service = resolve(b.services, r.substr(0, dot), np, "service");
      n.function = b.services[n.service].function_index(r.substr(dot + 1));
      if (n.function < 0)
        throw ReferenceError(np + ": service '" + r.substr(0, dot) +
                             "' has no endpoint function '" + r.substr(dot + 1) + "'");
      c.nodes.push_back(std::move(n));
    }
    auto node_index = [&](const std::string& n, const std::string& at) {
      for (std::size_t i = 0; i < c.nodes.size(); ++i)
        if (c.nodes[i].name == n) return static_cast<int>(i);
      throw ReferenceError(at + ": unknown chain node '" + n + "'");
    };
    const ojson& edges = member(sfc, "edges", p);
    if (!edges.is_array()) throw SyntaxError(p + ".edges: expected an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string ep = p + ".edges[" + std::to_string(i) + "]";
      const ojson& e = edges[i];
      if (!e.is_array() || e.size() != 3)
        throw SyntaxError(ep + ": expected [from, to, payload_bytes]");
      ChainEdgeSpec es;
      es.from = node_index(string_at(e[0], ep + "[0]"), ep + "[0]");
      es.to = node_index(string_at(e[1], ep + "[1]"), ep + "[1]");
      es.payload = static_cast<std::int64_t>(std::llround(number_at(e[2], ep + "[2]")));
      c.edges.push_back(es);
    }
    std::vector<int> indeg(c.nodes.size(), 0);
    for (const auto& e : c.edges) indeg[e.to]++;
    for (std::size_t i = 0; i < c.nodes.size(); ++i)
      if (indeg[i] == 0 && c.source < 0) c.source = static_cast<int>(i);
    b.chains.push_back(std::move(c));
  }

  for (auto& [name, rs] : member(root, "res_alloc_scenarios", "$", false).items()) {
    const std::string p = "res_alloc_scenarios." + name;
    if (!rs.is_object()) throw SyntaxError(p + ": expected an object");
    ResourceAllocScenario r;
    r.name = name;
    for (auto& [k, v] : rs.items()) {
      const std::string kp = p + "." + k;
      double val = number_at(v, kp);
      if (k == "cpu_requests") r.cpu_requests_mc = val;
      else if (k == "cpu_limits") r.cpu_limits_mc = val;
      else if (k == "mem_requests") r.mem_requests = val;
      else if (k == "mem_limits") r.mem_limits = val;
      else if (k == "in_bw") r.in_bw = val;
      else if (k == "out_bw") r.out_bw = val;
      else if (k == "blkio_bw") r.blkio_bw = val;
      else if (k == "blkio_size") r.blkio_size = val;
      else throw SyntaxError(kp + ": unknown resource control parameter");
    }
    // Guaranteed class in Kubernetes: limits without requests imply requests.
    if (r.cpu_limits_mc && !r.cpu_requests_mc) r.cpu_requests_mc = r.cpu_limits_mc;
    b.res_scenarios.push_back(std::move(r));
  }

  for (auto& [name, ps] : member(root, "placement_scenarios", "$").items()) {
    const std::string p = "placement_scenarios." + name;
    PlacementScenario s;
    s.name = name;
    s.algorithm = string_at(member(ps, "algorithm", p), p + ".algorithm");
    for (auto& [k, v] : member(ps, "options", p, false).items()) {
      bool known = false;
      for (Resource r : all_resources())
        if (k == resource_name(r)) {
          s.weights[r] = number_at(v, p + ".options." + k);
          known = true;
          break;
        }
      if (!known) throw SyntaxError(p + ".options." + k + ": unknown resource weight");
    }
    b.placements.push_back(std::move(s));
  }

  for (auto& [name, ar] : member(root, "affinity_rulesets", "$", false).items()) {
    const std::string p = "affinity_rulesets." + name;
    AffinityRuleset rs;
    rs.name = name;
    const std::size_t n = b.services.size();
    rs.affinity.assign(n, std::vector<std::uint8_t>(n, 0));
    rs.anti.assign(n, std::vector<std::uint8_t>(n, 0));
    auto fill = [&](const ojson& rules, std::vector<std::vector<std::uint8_t>>& m,
                    const std::string& rp) {
      for (auto& [svc, partners] : rules.items()) {
        int i = resolve(b.services, svc, rp + "." + svc, "service");
        if (!partners.is_array())
          throw SyntaxError(rp + "." + svc + ": expected an array of service names");
        for (std::size_t k = 0; k < partners.size(); ++k) {
          const std::string pp = rp + "." + svc + "[" + std::to_string(k) + "]";
          int j = resolve(b.services, string_at(partners[k], pp), pp, "service");
          m[i][j] = 1;
        }
      }
    };
    fill(member(ar, "affinity", p, false), rs.affinity, p + ".affinity");
    fill(member(ar, "anti-affinity", p, false), rs.anti, p + ".anti-affinity");
    b.rulesets.push_back(std::move(rs));
  }

  for (auto& [name, cs] : member(root, "cluster_scenarios", "$").items()) {
    const std::string p = "cluster_scenarios." + name;
    ClusterScenario s;
    s.name = name;
    for (auto& [chain_name, cfg] : member(cs, "service_chains", p).items()) {
      const std::string cp = p + ".service_chains." + chain_name;
      ChainBinding cb;
      cb.chain = resolve(b.chains, chain_name, cp, "service chain");
      cb.traffic = resolve(b.traffic_protos,
                           string_at(member(cfg, "traffic_type", cp), cp + ".traffic_type"),
                           cp + ".traffic_type", "traffic prototype");
      for (auto& [svc, st] : member(cfg, "nodes_settings", cp, false).items()) {
        const std::string sp = cp + ".nodes_settings." + svc;
        ServiceSetting setting;
        setting.service = resolve(b.services, svc, sp, "service");
        if (st.contains("replica_count"))
          setting.replica_count =
              static_cast<int>(int_at(st["replica_count"], sp + ".replica_count"));
        if (st.contains("res_scenario"))
          setting.res_scenario =
              resolve(b.res_scenarios, string_at(st["res_scenario"], sp + ".res_scenario"),
                      sp + ".res_scenario", "resource scenario");
        cb.settings.push_back(setting);
      }
      s.chains.push_back(std::move(cb));
    }
    s.placement_scenario = resolve(
        b.placements, string_at(member(cs, "placement_scenario", p), p + ".placement_scenario"),
        p + ".placement_scenario", "placement scenario");
    s.topology = resolve(b.topologies, string_at(member(cs, "topology", p), p + ".topology"),
                         p + ".topology", "topology");
    if (cs.contains("affinity_ruleset"))
      s.affinity_ruleset =
          resolve(b.rulesets, string_at(cs["affinity_ruleset"], p + ".affinity_ruleset"),
                  p + ".affinity_ruleset", "affinity ruleset");
    b.cluster_scenarios.push_back(std::move(s));
  }

  return b;
}

}  // namespace detail

struct ParseResult {
  ScenarioBundle bundle;
  std::vector<Diagnostic> diagnostics;
};

// Structural and reference errors always throw; invariant violations are
// returned as diagnostics.
inline ParseResult parse_scenario_lenient(const std::string& json_text) {
  ojson root;
  try {
    root = ojson::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SyntaxError(std::string("invalid JSON: ") + e.what());
  }
  ParseResult r;
  r.bundle = detail::parse_bundle(root);
  r.diagnostics = validate_bundle(r.bundle);
  return r;
}

inline ScenarioBundle parse_scenario(const std::string& json_text) {
  ParseResult r = parse_scenario_lenient(json_text);
  for (const auto& d : r.diagnostics)
    if (d.severity == Severity::Error) throw ValidationError(d.str());
  return std::move(r.bundle);
}

// ---------------------------------------------------------------------------
// Serialization (canonical: declaration order preserved, minimal rows)

inline std::string serialize_scenario(const ScenarioBundle& b) {
  ojson root = ojson::object();

  ojson protos = ojson::object();
  ojson micro = ojson::object();
  for (const auto& svc : b.services) {
    ojson fns = ojson::object();
    for (const auto& fn : svc.functions) {
      ojson rows = ojson::array();
      for (const auto& t : fn.threads) {
        ojson row = ojson::array({t.instructions, t.cpi, t.mem_accesses, t.cache_refs,
                                  t.cache_misses_ref, t.cache_miss_penalty, t.blkio_rw});
        if (t.idle_time != 0 || t.cmc_a != 0 || t.cmc_b != 0 || t.cmt_a != 0 || t.cmt_b != 0) {
          row.push_back(t.idle_time);
          row.push_back(t.cmc_a);
          row.push_back(t.cmc_b);
          row.push_back(t.cmt_a);
          row.push_back(t.cmt_b);
        }
        rows.push_back(std::move(row));
      }
      fns[fn.name] = std::move(rows);
    }
    micro[svc.name] = std::move(fns);
  }
  protos["microservices"] = std::move(micro);

  ojson hp = ojson::object();
  for (const auto& h : b.host_protos) {
    ojson caps = ojson::object();
    for (Resource r : all_resources()) caps[resource_name(r)] = h.capacities[r];
    hp[h.name] = ojson::array({h.cores, h.clock_hz, std::move(caps)});
  }
  protos["hosts"] = std::move(hp);

  ojson rp = ojson::object();
  for (const auto& r : b.router_protos)
    rp[r.name] = ojson::array({r.latency, r.in_bw, r.out_bw});
  protos["routers"] = std::move(rp);

  ojson lp = ojson::object();
  for (const auto& l : b.link_protos) lp[l.name] = ojson::array({l.latency});
  protos["links"] = std::move(lp);

  ojson tp = ojson::object();
  for (const auto& t : b.traffic_protos)
    tp[t.name] = ojson::array({t.rate, t.duration_s, t.batch});
  protos["traffics"] = std::move(tp);
  root["prototypes"] = std::move(protos);

  ojson equip = ojson::object();
  ojson eh = ojson::object();
  for (const auto& h : b.hosts) eh[h.name] = b.host_protos[h.proto].name;
  equip["hosts"] = std::move(eh);
  ojson er = ojson::object();
  for (const auto& r : b.routers) er[r.name] = b.router_protos[r.proto].name;
  equip["routers"] = std::move(er);
  root["equipments"] = std::move(equip);

  ojson topos = ojson::object();
  for (const auto& t : b.topologies) {
    ojson edges = ojson::array();
    for (const auto& e : t.edges) {
      ojson row = ojson::array({e.a, e.b});
      if (e.link_proto >= 0) row.push_back(b.link_protos[e.link_proto].name);
      edges.push_back(std::move(row));
    }
    topos[t.name] = ojson{{"nodes", t.nodes}, {"edges", std::move(edges)}};
  }
  root["topologies"] = std::move(topos);

  ojson sfcs = ojson::object();
  for (const auto& c : b.chains) {
    ojson nodes = ojson::object();
    for (const auto& n : c.nodes)
      nodes[n.name] =
          b.services[n.service].name + "." + b.services[n.service].functions[n.function].name;
    ojson edges = ojson::array();
    for (const auto& e : c.edges)
      edges.push_back(ojson::array({c.nodes[e.from].name, c.nodes[e.to].name, e.payload}));
    sfcs[c.name] = ojson{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  }
  root["sfcs"] = std::move(sfcs);

  ojson res = ojson::object();
  for (const auto& r : b.res_scenarios) {
    ojson o = ojson::object();
    if (r.cpu_requests_mc) o["cpu_requests"] = *r.cpu_requests_mc;
    if (r.cpu_limits_mc) o["cpu_limits"] = *r.cpu_limits_mc;
    if (r.mem_requests) o["mem_requests"] = *r.mem_requests;
    if (r.mem_limits) o["mem_limits"] = *r.mem_limits;
    if (r.in_bw) o["in_bw"] = *r.in_bw;
    if (r.out_bw) o["out_bw"] = *r.out_bw;
    if (r.blkio_bw) o["blkio_bw"] = *r.blkio_bw;
    if (r.blkio_size) o["blkio_size"] = *r.blkio_size;
    res[r.name] = std::move(o);
  }
  root["res_alloc_scenarios"] = std::move(res);

  ojson pls = ojson::object();
  for (const auto& p : b.placements) {
    ojson w = ojson::object();
    for (Resource r : all_resources())
      if (p.weights[r] != 0.0) w[resource_name(r)] = p.weights[r];
    pls[p.name] = ojson{{"algorithm", p.algorithm}, {"options", std::move(w)}};
  }
  root["placement_scenarios"] = std::move(pls);

  ojson ars = ojson::object();
  for (const auto& a : b.rulesets) {
    auto rules = [&](const std::vector<std::vector<std::uint8_t>>& m) {
      ojson o = ojson::object();
      for (std::size_t i = 0; i < m.size(); ++i) {
        ojson partners = ojson::array();
        for (std::size_t j = 0; j < m[i].size(); ++j)
          if (m[i][j]) partners.push_back(b.services[j].name);
        if (!partners.empty()) o[b.services[i].name] = std::move(partners);
      }
      return o;
    };
    ars[a.name] = ojson{{"affinity", rules(a.affinity)}, {"anti-affinity", rules(a.anti)}};
  }
  root["affinity_rulesets"] = std::move(ars);

  ojson css = ojson::object();
  for (const auto& cs : b.cluster_scenarios) {
    ojson chains = ojson::object();
    for (const auto& cb : cs.chains) {
      ojson settings = ojson::object();
      for (const auto& st : cb.settings) {
        ojson o = ojson{{"replica_count", st.replica_count}};
        if (st.res_scenario >= 0) o["res_scenario"] = b.res_scenarios[st.res_scenario].name;
        settings[b.services[st.service].name] = std::move(o);
      }
      chains[b.chains[cb.chain].name] =
          ojson{{"traffic_type", b.traffic_protos[cb.traffic].name},
                {"nodes_settings", std::move(settings)}};
    }
    ojson o = ojson{{"service_chains", std::move(chains)},
                    {"placement_scenario", b.placements[cs.placement_scenario].name},
                    {"topology", b.topologies[cs.topology].name}};
    if (cs.affinity_ruleset >= 0)
      o["affinity_ruleset"] = b.rulesets[cs.affinity_ruleset].name;
    css[cs.name] = std::move(o);
  }
  root["cluster_scenarios"] = std::move(css);

  return root.dump(1);
}

}  // namespace chainsim
