#pragma once

#include <string>
#include <vector>

#include "apcsim/config.hpp"
#include "apcsim/engine.hpp"

namespace apcsim {

struct ArmSpec {
  bool cooperation = true;
  bool leaks = true;
};

// coop_leaks, coop_noleaks, nocoop_leaks, nocoop_noleaks
std::string arm_name(const ArmSpec& arm);

struct ArmResult {
  ArmSpec arm;
  RunResult result;
};

// Applies the arm flags on top of the base config and runs the engine.
// All arms share base.seed (common random numbers).
RunResult run_arm(const ScenarioConfig& base, const ArmSpec& arm);

std::vector<ArmResult> run_matrix(const ScenarioConfig& base,
                                  const std::vector<ArmSpec>& arms);

// The full cooperation x leaks experiment.
std::vector<ArmSpec> default_arms();

// Long format, one row per step and species:
// step,hours,species,aggregate_ugm3,forecast_ugm3,coop_fraction,aqi
void write_csv(const RunResult& result, const std::string& path);

// step,species,agent_id,decision,P,Q,reward
void write_agent_trace_csv(const RunResult& result, const std::string& path);

// Per-arm, per-species mean / max / %-steps-above-goal.
std::string comparison_table(const std::vector<ArmResult>& arms);

}  // namespace apcsim
