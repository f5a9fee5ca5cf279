// chainsim command line entry point: load a scenario file, validate it, run
// the selected cluster scenarios and write JSON/CSV results.
//
// Exit codes: 0 success, 2 usage error, 3 scenario error, 4 simulation error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chainsim/chainsim.hpp"

namespace fs = std::filesystem;

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("CHAINSIM_LOG");
  if (!env) return LogLevel::Info;
  const std::string v = env;
  if (v == "quiet") return LogLevel::Quiet;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw chainsim::ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw chainsim::ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

void dump_graphs(const chainsim::ScenarioBundle& bundle, const chainsim::ClusterScenario& cs,
                 const fs::path& dir) {
  for (const auto& cb : cs.chains) {
    const auto& chain = bundle.chains[cb.chain];
    const auto alt = chainsim::build_alternative_graph(chain);
    const auto plan = chainsim::extract_subchains(alt);
    const std::string base = cs.name + "_" + chain.name;
    write_file(dir / (base + "_g.dot"), chainsim::to_dot(chain));
    write_file(dir / (base + "_gprime.dot"), chainsim::to_dot(chain, alt));
    write_file(dir / (base + "_subchains.dot"), chainsim::to_dot(chain, alt, plan));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chainsim - discrete-event latency simulator for microservice chains"};
  app.get_formatter()->column_width(34);

  std::string scenario_path;
  std::string run_name = "all";
  std::string out_dir = "results";
  std::string format = "json";
  bool validate_only = false;
  bool graphs = false;
  int repeat = 1;
  double drain_factor = 10.0;

  app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  app.add_option("--run", run_name, "Cluster scenario name, or 'all'");
  app.add_option("--out", out_dir, "Output directory for result files");
  app.add_option("--format", format, "Result format: json, csv or both")
      ->check(CLI::IsMember({"json", "csv", "both"}));
  app.add_flag("--validate-only", validate_only, "Parse and validate, run nothing");
  app.add_option("--repeat", repeat, "Run each scenario N times")->check(CLI::PositiveNumber);
  app.add_flag("--dump-graphs", graphs, "Write chain graphs (G, G', subchains) as dot files");
  app.add_option("--max-drain-factor", drain_factor,
                 "Abort when in-flight work exceeds this multiple of the horizon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  const LogLevel lvl = log_level();

  std::string text;
  try {
    text = read_file(scenario_path);
  } catch (const chainsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  if (validate_only) {
    try {
      const auto parsed = chainsim::parse_scenario_lenient(text);
      for (const auto& d : parsed.diagnostics) std::cerr << d.str() << "\n";
      return chainsim::has_errors(parsed.diagnostics) ? 3 : 0;
    } catch (const chainsim::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    }
  }

  chainsim::ScenarioBundle bundle;
  std::vector<int> selected;
  try {
    bundle = chainsim::parse_scenario(text);
    if (run_name == "all") {
      for (std::size_t i = 0; i < bundle.cluster_scenarios.size(); ++i)
        selected.push_back(static_cast<int>(i));
    } else {
      const int idx = bundle.cluster_scenario_index(run_name);
      if (idx < 0)
        throw chainsim::ReferenceError("unknown cluster scenario '" + run_name + "'");
      selected.push_back(idx);
    }
  } catch (const chainsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);

  chainsim::EngineOptions opts;
  opts.max_drain_factor = drain_factor;

  for (int idx : selected) {
    const auto& cs = bundle.cluster_scenarios[idx];
    try {
      if (graphs) dump_graphs(bundle, cs, out_dir);
      for (int rep = 1; rep <= repeat; ++rep) {
        const auto result = chainsim::run_simulation(bundle, idx, opts);
        const std::string stem =
            repeat > 1 ? cs.name + ".run" + std::to_string(rep) : cs.name;
        if (format == "json" || format == "both")
          write_file(fs::path(out_dir) / (stem + ".json"),
                     chainsim::results_json(bundle, result));
        if (format == "csv" || format == "both")
          write_file(fs::path(out_dir) / (stem + ".csv"), chainsim::export_csv(result));
        if (lvl >= LogLevel::Info) {
          std::cerr << "scenario " << cs.name << ": " << result.requests.size()
                    << " requests, " << result.events_total << " events, sim end "
                    << chainsim::ns_to_seconds(result.sim_end) << "s, wall "
                    << result.wall_seconds << "s\n";
        }
        if (lvl >= LogLevel::Debug) {
          for (const auto& agg : chainsim::aggregate_by_chain(result))
            std::cerr << "  chain " << agg.chain << ": mean "
                      << chainsim::fixed3(agg.mean_ns) << "ns over " << agg.requests
                      << " requests\n";
        }
      }
    } catch (const chainsim::Error& e) {
      std::cerr << "error: scenario " << cs.name << ": " << e.what() << "\n";
      return 4;
    }
  }
  return 0;
}
