#include "apcsim/weather.hpp"

#include "apcsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace apcsim {

namespace {

constexpr double kReversion = 0.9;

double ar1_step(double current, const StatTarget& t, Rng& rng) {
  if (t.stddev <= 0.0) return t.mean;
  const double innovation_sd = t.stddev * std::sqrt(1.0 - kReversion * kReversion);
  return t.mean + kReversion * (current - t.mean) + rng.normal(0.0, innovation_sd);
}

// Wet-step probability and wet-mean chosen so that a zero-inflated
// exponential matches the target mean and std:
//   mean = p*m,  var = p*(2 - p)*m^2  =>  m = (var + mean^2) / (2*mean).
double rainfall_step(const StatTarget& t, Rng& rng) {
  if (t.stddev <= 0.0 || t.mean <= 0.0) return std::max(t.mean, 0.0);
  const double wet_mean =
      (t.stddev * t.stddev + t.mean * t.mean) / (2.0 * t.mean);
  const double p_wet = t.mean / wet_mean;
  double r = 0.0;
  if (rng.uniform() < p_wet) r = rng.exponential(wet_mean);
  return std::min(r, t.max);
}

[[noreturn]] void series_error(const std::string& path, std::size_t line,
                               const std::string& what) {
  throw std::runtime_error("weather series " + path + ":" +
                           std::to_string(line) + ": " + what);
}

}  // namespace

WeatherStatsTarget default_weather_targets() {
  return {
      .wind_speed = {2.12, 1.27, 9.6},
      .temperature = {16.82, 6.30, 42.1},
      .humidity = {71.92, 14.33, 93.0},
      .rainfall = {2.96, 9.27, 73.9},
  };
}

WeatherState initial_state(const ScenarioConfig& config) {
  const WeatherState state{.wind_speed = config.wind_speed_t0,
                           .temperature = config.temperature_t0,
                           .humidity = config.humidity_t0,
                           .rainfall = 0.0};
  validate_weather(state);
  return state;
}

void validate_weather(const WeatherState& s) {
  if (!(s.wind_speed > 0.0)) {
    throw std::domain_error("weather: wind_speed must be > 0");
  }
  if (s.humidity < 0.0 || s.humidity > 100.0) {
    throw std::domain_error("weather: humidity must be in [0, 100]");
  }
  if (s.rainfall < 0.0) {
    throw std::domain_error("weather: rainfall must be >= 0");
  }
  if (!std::isfinite(s.wind_speed) || !std::isfinite(s.temperature) ||
      !std::isfinite(s.humidity) || !std::isfinite(s.rainfall)) {
    throw std::domain_error("weather: all fields must be finite");
  }
}

WeatherState next_state(const WeatherState& current,
                        const WeatherStatsTarget& target, Rng& rng) {
  WeatherState next;
  next.wind_speed = std::clamp(ar1_step(current.wind_speed, target.wind_speed, rng),
                               kWindFloor, target.wind_speed.max);
  next.temperature =
      std::min(ar1_step(current.temperature, target.temperature, rng),
               target.temperature.max);
  next.humidity =
      std::clamp(ar1_step(current.humidity, target.humidity, rng), 0.0,
                 std::min(100.0, target.humidity.max));
  next.rainfall = rainfall_step(target.rainfall, rng);
  return next;
}

std::vector<WeatherState> load_weather_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("weather series " + path + ": cannot open file");
  }
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) series_error(path, 1, "missing header");
  ++lineno;
  if (line != "wind_speed,temperature,humidity,rainfall") {
    series_error(path, lineno,
                 "bad header, expected wind_speed,temperature,humidity,rainfall");
  }
  std::vector<WeatherState> series;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    WeatherState s;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> s.wind_speed >> c1 >> s.temperature >> c2 >> s.humidity >>
          c3 >> s.rainfall) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
      series_error(path, lineno, "malformed row");
    }
    std::string trailing;
    if (row >> trailing) series_error(path, lineno, "trailing fields");
    try {
      validate_weather(s);
    } catch (const std::exception& e) {
      series_error(path, lineno, e.what());
    }
    series.push_back(s);
  }
  return series;
}

}  // namespace apcsim
