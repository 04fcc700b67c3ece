#pragma once

#include <optional>
#include <vector>

#include "apcsim/agents.hpp"
#include "apcsim/config.hpp"
#include "apcsim/dispersion.hpp"
#include "apcsim/predictor.hpp"
#include "apcsim/weather.hpp"

namespace apcsim {

struct StepRecord {
  long step = 0;
  long hours = 0;  // step * hours_per_step
  PerSpecies<double> aggregate{};      // realized, µg/m³
  PerSpecies<double> forecast{};       // one step ahead, µg/m³
  PerSpecies<double> coop_fraction{};  // fraction of agents reducing
  int aqi = 1;
};

struct AgentTraceRow {
  long step = 0;
  Species species = Species::PM10;
  int agent_id = 0;
  int decision = 0;
  double p = 0.0;
  double q = 0.0;
  double reward = 0.0;
};

struct SpeciesSummary {
  double mean_aggregate = 0.0;
  double max_aggregate = 0.0;
  double frac_steps_above_goal = 0.0;
};

struct RunResult {
  std::vector<StepRecord> records;
  std::vector<WeatherState> weather;  // weather used at each step
  PerSpecies<SpeciesSummary> summary{};
  std::vector<AgentTraceRow> trace;  // empty unless tracing was enabled
};

// Worst-species banding of aggregate/goal ratios:
// < 0.5 -> 1, < 1.0 -> 2, < 1.5 -> 3, < 2.0 -> 4, otherwise 5.
int air_quality_index(const ConcentrationField& field,
                      const PerSpecies<double>& goals);

class Engine {
 public:
  // Builds the scenario: sources placed uniformly from seeded layout
  // streams, equal-width box chain along the wind axis, agents initialized
  // with P = Q = 0.5 and a shuffled exact-count cooperating fraction.
  explicit Engine(const ScenarioConfig& config);

  // Injects forecasters; entries left empty fall back to the persistence
  // forecast. Disables the automatic training pass in run().
  void set_forecasters(PerSpecies<std::optional<NetworkParameters>> nets);

  // Fits one network per species on open-loop pairs (see
  // generate_training_pairs); falls back to persistence when fewer than 50
  // pairs are available.
  void train_forecasters();

  void enable_trace(bool on) { trace_enabled_ = on; }

  // One simulation step: choices, actuation, dispersion, weather advance,
  // forecast, rewards, probability updates.
  void step();

  // Trains forecasters unless they were injected, then steps to
  // total_steps and summarizes.
  RunResult run();

  long current_step() const { return t_; }
  const ScenarioConfig& config() const { return cfg_; }
  const std::vector<EmissionSource>& sources() const { return sources_; }
  const ConcentrationField& field() const { return field_; }
  const WeatherState& weather() const { return weather_; }
  const PerSpecies<std::vector<AgentState>>& agents() const { return agents_; }
  const std::vector<double>& box_centers() const { return box_centers_; }
  const PerSpecies<std::optional<NetworkParameters>>& forecasters() const {
    return forecasters_;
  }

  // Runs the config open-loop (adaptation off, seed derived with
  // "traindata") and pairs each step's (aggregate, weather) with the next
  // step's aggregate.
  static PerSpecies<std::vector<TrainingPair>> generate_training_pairs(
      const ScenarioConfig& config);

 private:
  void apply_rates();
  void compute_field();

  ScenarioConfig cfg_;
  long t_ = 0;
  std::vector<double> box_centers_;
  std::vector<EmissionSource> sources_;
  PerSpecies<std::vector<AgentState>> agents_;  // agent i controls source agents_[s][i].source_id
  PerSpecies<std::vector<std::vector<double>>> unit_coef_;  // [species][agent][box], per g/h at U = 1
  PerSpecies<std::vector<double>> leak_unit_box_;  // [species][box], uncontrolled sum per U = 1
  WeatherState weather_;
  WeatherStatsTarget targets_;
  std::vector<WeatherState> file_series_;
  Rng weather_rng_;
  Rng choices_rng_;
  ConcentrationField field_;
  PerSpecies<double> forecast_{};
  PerSpecies<std::optional<NetworkParameters>> forecasters_;
  bool forecasters_set_ = false;
  bool trace_enabled_ = false;
  std::vector<StepRecord> records_;
  std::vector<WeatherState> weather_log_;
  std::vector<AgentTraceRow> trace_;
};

}  // namespace apcsim
