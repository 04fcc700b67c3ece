#include "apcsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace apcsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Field {
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, const std::string&)> set;
};

template <typename T>
T parse_number(const std::string& text) {
  const std::string v = trim(text);
  if (v.empty()) throw std::invalid_argument("empty value");
  char* end = nullptr;
  errno = 0;
  T out;
  if constexpr (std::is_same_v<T, double>) {
    out = std::strtod(v.c_str(), &end);
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    out = std::strtoull(v.c_str(), &end, 10);
  } else {
    const long long wide = std::strtoll(v.c_str(), &end, 10);
    out = static_cast<T>(wide);
    if (static_cast<long long>(out) != wide) throw std::invalid_argument("out of range");
  }
  if (end != v.c_str() + v.size() || errno == ERANGE) {
    throw std::invalid_argument("not a valid number: '" + v + "'");
  }
  if constexpr (std::is_same_v<T, double>) {
    if (!std::isfinite(out)) throw std::invalid_argument("not finite");
  }
  return out;
}

bool parse_on_off(const std::string& text) {
  const std::string v = trim(text);
  if (v == "on") return true;
  if (v == "off") return false;
  throw std::invalid_argument("expected on or off, got '" + v + "'");
}

template <typename T>
Field numeric_field(T ScenarioConfig::* member) {
  return {[member](const ScenarioConfig& c) {
            if constexpr (std::is_same_v<T, double>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          },
          [member](ScenarioConfig& c, const std::string& v) {
            c.*member = parse_number<T>(v);
          }};
}

template <typename T>
Field training_field(T TrainingConfig::* member) {
  return {[member](const ScenarioConfig& c) {
            if constexpr (std::is_same_v<T, double>) {
              return format_double(c.training.*member);
            } else {
              return std::to_string(c.training.*member);
            }
          },
          [member](ScenarioConfig& c, const std::string& v) {
            c.training.*member = parse_number<T>(v);
          }};
}

Field flag_field(bool ScenarioConfig::* member) {
  return {[member](const ScenarioConfig& c) {
            return std::string(c.*member ? "on" : "off");
          },
          [member](ScenarioConfig& c, const std::string& v) {
            c.*member = parse_on_off(v);
          }};
}

Field string_field(std::string ScenarioConfig::* member) {
  return {[member](const ScenarioConfig& c) { return c.*member; },
          [member](ScenarioConfig& c, const std::string& v) { c.*member = trim(v); }};
}

// Order doubles as the write order of write_scenario_text.
const std::vector<std::pair<std::string, Field>>& field_table() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"controlled_per_species", numeric_field(&ScenarioConfig::controlled_per_species)},
      {"max_emission_rate_gh", numeric_field(&ScenarioConfig::max_emission_rate_gh)},
      {"uncontrolled_per_species", numeric_field(&ScenarioConfig::uncontrolled_per_species)},
      {"uncontrolled_rate_gh", numeric_field(&ScenarioConfig::uncontrolled_rate_gh)},
      {"goal_pm10", numeric_field(&ScenarioConfig::goal_pm10)},
      {"goal_nox", numeric_field(&ScenarioConfig::goal_nox)},
      {"goal_sox", numeric_field(&ScenarioConfig::goal_sox)},
      {"memory_steps", numeric_field(&ScenarioConfig::memory_steps)},
      {"initial_coop_fraction", numeric_field(&ScenarioConfig::initial_coop_fraction)},
      {"reduced_rate_fraction", numeric_field(&ScenarioConfig::reduced_rate_fraction)},
      {"num_boxes", numeric_field(&ScenarioConfig::num_boxes)},
      {"temperature_t0", numeric_field(&ScenarioConfig::temperature_t0)},
      {"humidity_t0", numeric_field(&ScenarioConfig::humidity_t0)},
      {"wind_speed_t0", numeric_field(&ScenarioConfig::wind_speed_t0)},
      {"background_pm10", numeric_field(&ScenarioConfig::background_pm10)},
      {"background_nox", numeric_field(&ScenarioConfig::background_nox)},
      {"background_sox", numeric_field(&ScenarioConfig::background_sox)},
      {"total_hours", numeric_field(&ScenarioConfig::total_hours)},
      {"hours_per_step", numeric_field(&ScenarioConfig::hours_per_step)},
      {"prediction_horizon_hours", numeric_field(&ScenarioConfig::prediction_horizon_hours)},
      {"domain_length_m", numeric_field(&ScenarioConfig::domain_length_m)},
      {"domain_width_m", numeric_field(&ScenarioConfig::domain_width_m)},
      {"stack_height_controlled_m", numeric_field(&ScenarioConfig::stack_height_controlled_m)},
      {"stack_height_uncontrolled_m", numeric_field(&ScenarioConfig::stack_height_uncontrolled_m)},
      {"train_learning_rate", training_field(&TrainingConfig::learning_rate)},
      {"train_epochs", training_field(&TrainingConfig::epochs)},
      {"train_batch_size", training_field(&TrainingConfig::batch_size)},
      {"seed", numeric_field(&ScenarioConfig::seed)},
      {"cooperation", flag_field(&ScenarioConfig::cooperation)},
      {"leaks", flag_field(&ScenarioConfig::leaks)},
      {"output_dir", string_field(&ScenarioConfig::output_dir)},
      {"weather_series_path", string_field(&ScenarioConfig::weather_series_path)},
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [name, field] : field_table()) {
    if (name == key) return &field;
  }
  return nullptr;
}

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw std::invalid_argument("config: " + field + ": " + what);
}

}  // namespace

void validate_config(const ScenarioConfig& c) {
  if (c.controlled_per_species < 0) config_error("controlled_per_species", "must be >= 0");
  if (c.uncontrolled_per_species < 0) config_error("uncontrolled_per_species", "must be >= 0");
  if (c.max_emission_rate_gh < 0.0) config_error("max_emission_rate_gh", "must be >= 0");
  if (c.uncontrolled_rate_gh < 0.0) config_error("uncontrolled_rate_gh", "must be >= 0");
  if (!(c.goal_pm10 > 0.0)) config_error("goal_pm10", "must be > 0");
  if (!(c.goal_nox > 0.0)) config_error("goal_nox", "must be > 0");
  if (!(c.goal_sox > 0.0)) config_error("goal_sox", "must be > 0");
  if (c.memory_steps < 1) config_error("memory_steps", "must be >= 1");
  if (c.initial_coop_fraction < 0.0 || c.initial_coop_fraction > 1.0) {
    config_error("initial_coop_fraction", "must be in [0, 1]");
  }
  if (c.reduced_rate_fraction < 0.0 || c.reduced_rate_fraction > 1.0) {
    config_error("reduced_rate_fraction", "must be in [0, 1]");
  }
  if (c.num_boxes < 1) config_error("num_boxes", "must be >= 1");
  if (c.humidity_t0 < 0.0 || c.humidity_t0 > 100.0) {
    config_error("humidity_t0", "must be in [0, 100]");
  }
  if (!(c.wind_speed_t0 > 0.0)) config_error("wind_speed_t0", "must be > 0");
  if (c.background_pm10 < 0.0) config_error("background_pm10", "must be >= 0");
  if (c.background_nox < 0.0) config_error("background_nox", "must be >= 0");
  if (c.background_sox < 0.0) config_error("background_sox", "must be >= 0");
  if (c.total_hours < 1) config_error("total_hours", "must be >= 1");
  if (c.hours_per_step < 1) config_error("hours_per_step", "must be >= 1");
  if (c.total_hours % c.hours_per_step != 0) {
    config_error("total_hours",
                 "must be divisible by hours_per_step (" +
                     std::to_string(c.total_hours) + " % " +
                     std::to_string(c.hours_per_step) + " != 0)");
  }
  if (c.prediction_horizon_hours != c.hours_per_step) {
    config_error("prediction_horizon_hours",
                 "must equal hours_per_step (one-step-ahead forecaster)");
  }
  if (!(c.domain_length_m > 0.0)) config_error("domain_length_m", "must be > 0");
  if (!(c.domain_width_m > 0.0)) config_error("domain_width_m", "must be > 0");
  if (c.stack_height_controlled_m < 0.0) {
    config_error("stack_height_controlled_m", "must be >= 0");
  }
  if (c.stack_height_uncontrolled_m < 0.0) {
    config_error("stack_height_uncontrolled_m", "must be >= 0");
  }
  if (!(c.training.learning_rate > 0.0)) config_error("train_learning_rate", "must be > 0");
  if (c.training.epochs < 1) config_error("train_epochs", "must be >= 1");
  if (c.training.batch_size < 1) config_error("train_batch_size", "must be >= 1");
}

ScenarioConfig parse_scenario_text(const std::string& text,
                                   const std::string& origin) {
  ScenarioConfig config;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    auto fail = [&](const std::string& what) -> std::invalid_argument {
      return std::invalid_argument("config " + origin + ":" +
                                   std::to_string(lineno) + ": " + what);
    };
    if (eq == std::string::npos) throw fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = line.substr(eq + 1);
    if (key.empty()) throw fail("missing key");
    const Field* field = find_field(key);
    if (field == nullptr) throw fail("unknown key '" + key + "'");
    if (seen[key]++) throw fail("duplicate key '" + key + "'");
    try {
      field->set(config, value);
    } catch (const std::exception& e) {
      throw fail(key + ": " + e.what());
    }
  }
  validate_config(config);
  return config;
}

ScenarioConfig parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

std::string write_scenario_text(const ScenarioConfig& config) {
  std::ostringstream out;
  for (const auto& [name, field] : field_table()) {
    out << name << " = " << field.get(config) << '\n';
  }
  return out.str();
}

void write_scenario(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << write_scenario_text(config);
}

}  // namespace apcsim
