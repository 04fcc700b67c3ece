#include "apcsim/runner.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace apcsim {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

std::string arm_name(const ArmSpec& arm) {
  std::string name = arm.cooperation ? "coop" : "nocoop";
  name += arm.leaks ? "_leaks" : "_noleaks";
  return name;
}

RunResult run_arm(const ScenarioConfig& base, const ArmSpec& arm) {
  ScenarioConfig config = base;
  config.cooperation = arm.cooperation;
  config.leaks = arm.leaks;
  Engine engine(config);
  return engine.run();
}

std::vector<ArmResult> run_matrix(const ScenarioConfig& base,
                                  const std::vector<ArmSpec>& arms) {
  if (arms.empty()) throw std::invalid_argument("run_matrix: no arms given");
  std::vector<ArmResult> results;
  results.reserve(arms.size());
  for (const ArmSpec& arm : arms) {
    results.push_back({arm, run_arm(base, arm)});
  }
  return results;
}

std::vector<ArmSpec> default_arms() {
  return {{true, true}, {true, false}, {false, true}, {false, false}};
}

void write_csv(const RunResult& result, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "step,hours,species,aggregate_ugm3,forecast_ugm3,coop_fraction,aqi\n";
  for (const StepRecord& r : result.records) {
    for (int s = 0; s < kNumSpecies; ++s) {
      out << r.step << ',' << r.hours << ',' << kSpeciesNames[s] << ','
          << fmt(r.aggregate[s]) << ',' << fmt(r.forecast[s]) << ','
          << fmt(r.coop_fraction[s]) << ',' << r.aqi << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_agent_trace_csv(const RunResult& result, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "step,species,agent_id,decision,P,Q,reward\n";
  for (const AgentTraceRow& row : result.trace) {
    out << row.step << ',' << to_string(row.species) << ',' << row.agent_id
        << ',' << row.decision << ',' << fmt(row.p) << ',' << fmt(row.q) << ','
        << fmt(row.reward) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string comparison_table(const std::vector<ArmResult>& arms) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %-6s %12s %12s %16s\n", "arm",
                "species", "mean_ugm3", "max_ugm3", "steps_above_goal");
  out << line;
  for (const ArmResult& arm : arms) {
    for (int s = 0; s < kNumSpecies; ++s) {
      const SpeciesSummary& sum = arm.result.summary[s];
      std::snprintf(line, sizeof(line), "%-16s %-6s %12.3f %12.3f %15.2f%%\n",
                    arm_name(arm.arm).c_str(),
                    std::string(kSpeciesNames[s]).c_str(), sum.mean_aggregate,
                    sum.max_aggregate, 100.0 * sum.frac_steps_above_goal);
      out << line;
    }
  }
  return out.str();
}

}  // namespace apcsim
