#pragma once

#include <cstdint>
#include <string>

#include "apcsim/predictor.hpp"
#include "apcsim/species.hpp"

namespace apcsim {

// Flat key = value scenario description. Defaults reproduce the shipped
// default scenario; see scenarios/default.cfg for the key reference.
struct ScenarioConfig {
  // polluting activities and policy
  int controlled_per_species = 80;
  double max_emission_rate_gh = 2000.0;
  int uncontrolled_per_species = 5;
  double uncontrolled_rate_gh = 5000.0;
  double goal_pm10 = 70.0;
  double goal_nox = 50.0;
  double goal_sox = 60.0;
  int memory_steps = 4;  // K
  double initial_coop_fraction = 0.5;
  double reduced_rate_fraction = 0.25;  // reduce command = fraction of max rate

  // environment
  int num_boxes = 20;
  double temperature_t0 = 12.7;   // °C
  double humidity_t0 = 71.0;      // %
  double wind_speed_t0 = 2.4;     // m/s
  double background_pm10 = 13.0;  // µg/m³, the t=0 PM10 level
  double background_nox = 0.0;
  double background_sox = 0.0;
  long total_hours = 4900;
  int hours_per_step = 2;
  int prediction_horizon_hours = 2;  // must equal hours_per_step

  // domain geometry (tuned so the shipped scenario reproduces both the
  // under-goal cooperative regime and the leak-driven exceedance regime)
  double domain_length_m = 10000.0;
  double domain_width_m = 80.0;
  double stack_height_controlled_m = 350.0;
  double stack_height_uncontrolled_m = 8.0;

  // forecaster training
  TrainingConfig training;

  // run control
  std::uint64_t seed = 1;
  bool cooperation = true;
  bool leaks = true;
  std::string output_dir = "out";
  std::string weather_series_path;  // optional; empty = synthetic generator

  long total_steps() const { return total_hours / hours_per_step; }
  PerSpecies<double> goals() const { return {goal_pm10, goal_nox, goal_sox}; }
  PerSpecies<double> backgrounds() const {
    return {background_pm10, background_nox, background_sox};
  }

  bool operator==(const ScenarioConfig&) const = default;
};

// Throws std::invalid_argument naming the offending field.
void validate_config(const ScenarioConfig& config);

// key = value lines, '#' starts a comment, unknown or duplicate keys are
// rejected with the key name, parse errors carry the 1-based line number.
// An empty file yields the defaults. The result is validated.
ScenarioConfig parse_scenario(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& text,
                                   const std::string& origin = "<string>");

// Writes every key; parse_scenario_text(write_scenario_text(c)) == c.
std::string write_scenario_text(const ScenarioConfig& config);
void write_scenario(const ScenarioConfig& config, const std::string& path);

}  // namespace apcsim
