#pragma once

#include <string>
#include <vector>

#include "apcsim/rng.hpp"

namespace apcsim {

struct WeatherState {
  double wind_speed = 0.0;   // m/s, clamped to [0.1, 9.6]
  double temperature = 0.0;  // °C
  double humidity = 0.0;     // %, in [0, 100]
  double rainfall = 0.0;     // mm, >= 0
};

struct StatTarget {
  double mean = 0.0;
  double stddev = 0.0;
  double max = 0.0;
};

struct WeatherStatsTarget {
  StatTarget wind_speed;
  StatTarget temperature;
  StatTarget humidity;
  StatTarget rainfall;
};

inline constexpr double kWindFloor = 0.1;

struct ScenarioConfig;

// Observed-station statistics used to calibrate the synthetic generator.
WeatherStatsTarget default_weather_targets();

// The configured t=0 values (rainfall starts dry).
WeatherState initial_state(const ScenarioConfig& config);

// Throws std::domain_error naming the offending field.
void validate_weather(const WeatherState& s);

// One mean-reverting AR(1) step per continuous variable (reversion 0.9,
// innovation scaled for a stationary std equal to the target), clamped to
// the state invariants; rainfall is a zero-inflated exponential draw
// calibrated to the target mean and std. A zero target std pins the
// variable to its mean.
WeatherState next_state(const WeatherState& current,
                        const WeatherStatsTarget& target, Rng& rng);

// Delimited text, header `wind_speed,temperature,humidity,rainfall`.
// Errors report 1-based line numbers.
std::vector<WeatherState> load_weather_series(const std::string& path);

}  // namespace apcsim
