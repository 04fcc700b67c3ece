#include "apcsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace apcsim {

namespace {

constexpr double kMinDownwind = 1.0;

// Contribution of one source to one receptor per g/h of emission at
// U = 1 m/s; scales exactly linearly in rate and 1/U.
double unit_coefficient(const EmissionSource& src, double box_x) {
  const double dx = box_x - src.x;
  if (dx <= kMinDownwind) return 0.0;
  return plume_concentration({.x = dx,
                              .y = -src.y,
                              .z = 0.0,
                              .stack_height = src.height,
                              .emission_rate = 1.0,
                              .wind_speed = 1.0});
}

}  // namespace

int air_quality_index(const ConcentrationField& field,
                      const PerSpecies<double>& goals) {
  int worst = 1;
  for (int s = 0; s < kNumSpecies; ++s) {
    const double ratio = field.aggregate[s] / goals[s];
    int band = 5;
    if (ratio < 0.5) {
      band = 1;
    } else if (ratio < 1.0) {
      band = 2;
    } else if (ratio < 1.5) {
      band = 3;
    } else if (ratio < 2.0) {
      band = 4;
    }
    worst = std::max(worst, band);
  }
  return worst;
}

Engine::Engine(const ScenarioConfig& config)
    : cfg_(config),
      weather_rng_(derived_seed(config.seed, "weather")),
      choices_rng_(derived_seed(config.seed, "choices")) {
  validate_config(cfg_);
  targets_ = default_weather_targets();

  const double box_width = cfg_.domain_length_m / cfg_.num_boxes;
  box_centers_.resize(cfg_.num_boxes);
  for (int b = 0; b < cfg_.num_boxes; ++b) {
    box_centers_[b] = (b + 0.5) * box_width;
  }

  Rng layout_controlled(derived_seed(cfg_.seed, "layout_controlled"));
  Rng layout_uncontrolled(derived_seed(cfg_.seed, "layout_uncontrolled"));
  Rng agents_init(derived_seed(cfg_.seed, "agents_init"));
  const double half_width = cfg_.domain_width_m / 2.0;

  int next_id = 0;
  for (Species sp : all_species()) {
    const int s = static_cast<int>(sp);
    for (int i = 0; i < cfg_.controlled_per_species; ++i) {
      sources_.push_back({.id = next_id++,
                          .species = sp,
                          .controlled = true,
                          .x = layout_controlled.uniform(0.0, cfg_.domain_length_m),
                          .y = layout_controlled.uniform(-half_width, half_width),
                          .height = cfg_.stack_height_controlled_m,
                          .max_rate = cfg_.max_emission_rate_gh,
                          .current_rate = cfg_.max_emission_rate_gh});
      agents_[s].push_back({.source_id = sources_.back().id});
    }
  }
  if (cfg_.leaks) {
    for (Species sp : all_species()) {
      for (int i = 0; i < cfg_.uncontrolled_per_species; ++i) {
        sources_.push_back({.id = next_id++,
                            .species = sp,
                            .controlled = false,
                            .x = layout_uncontrolled.uniform(0.0, cfg_.domain_length_m),
                            .y = layout_uncontrolled.uniform(-half_width, half_width),
                            .height = cfg_.stack_height_uncontrolled_m,
                            .max_rate = cfg_.uncontrolled_rate_gh,
                            .current_rate = cfg_.uncontrolled_rate_gh});
      }
    }
  }

  for (int s = 0; s < kNumSpecies; ++s) {
    auto& group = agents_[s];
    const int n = static_cast<int>(group.size());
    const int n_coop =
        static_cast<int>(std::llround(n * cfg_.initial_coop_fraction));
    std::vector<int> choices(n, kChoiceIncrease);
    std::fill(choices.begin(), choices.begin() + n_coop, kChoiceReduce);
    agents_init.shuffle(choices);
    for (int i = 0; i < n; ++i) {
      group[i].last_choice = choices[i];
      group[i].choice_history = {choices[i]};
    }
  }

  for (int s = 0; s < kNumSpecies; ++s) {
    unit_coef_[s].assign(agents_[s].size(),
                         std::vector<double>(box_centers_.size(), 0.0));
    leak_unit_box_[s].assign(box_centers_.size(), 0.0);
  }
  for (const EmissionSource& src : sources_) {
    const int s = static_cast<int>(src.species);
    if (src.controlled) continue;
    for (std::size_t b = 0; b < box_centers_.size(); ++b) {
      leak_unit_box_[s][b] += unit_coefficient(src, box_centers_[b]) * src.current_rate;
    }
  }
  for (int s = 0; s < kNumSpecies; ++s) {
    for (std::size_t i = 0; i < agents_[s].size(); ++i) {
      const EmissionSource& src = sources_[agents_[s][i].source_id];
      for (std::size_t b = 0; b < box_centers_.size(); ++b) {
        unit_coef_[s][i][b] = unit_coefficient(src, box_centers_[b]);
      }
    }
  }

  if (!cfg_.weather_series_path.empty()) {
    file_series_ = load_weather_series(cfg_.weather_series_path);
    if (static_cast<long>(file_series_.size()) < cfg_.total_steps()) {
      throw std::invalid_argument(
          "config: weather_series_path: series has " +
          std::to_string(file_series_.size()) + " rows, need " +
          std::to_string(cfg_.total_steps()));
    }
    weather_ = file_series_.front();
  } else {
    weather_ = initial_state(cfg_);
  }
  validate_weather(weather_);

  apply_rates();
  compute_field();
}

void Engine::set_forecasters(PerSpecies<std::optional<NetworkParameters>> nets) {
  forecasters_ = std::move(nets);
  forecasters_set_ = true;
}

void Engine::train_forecasters() {
  const PerSpecies<std::vector<TrainingPair>> pairs = generate_training_pairs(cfg_);
  for (int s = 0; s < kNumSpecies; ++s) {
    // chronological 70 % training split; the rest is held out for skill
    // evaluation by callers that need it
    const std::size_t n_train = pairs[s].size() * 7 / 10;
    if (n_train < 50) {
      forecasters_[s] = std::nullopt;  // persistence fallback for short runs
      continue;
    }
    const std::vector<TrainingPair> train_split(pairs[s].begin(),
                                                pairs[s].begin() + n_train);
    Rng rng(derived_seed(cfg_.seed,
                         "training/" + std::string(kSpeciesNames[s])));
    forecasters_[s] = train_predictor(train_split, cfg_.training, rng).params;
  }
  forecasters_set_ = true;
}

void Engine::apply_rates() {
  for (int s = 0; s < kNumSpecies; ++s) {
    for (const AgentState& agent : agents_[s]) {
      EmissionSource& src = sources_[agent.source_id];
      src.current_rate = agent.last_choice == kChoiceReduce
                             ? cfg_.reduced_rate_fraction * src.max_rate
                             : src.max_rate;
    }
  }
}

void Engine::compute_field() {
  const double inv_u = 1.0 / weather_.wind_speed;
  const auto backgrounds = cfg_.backgrounds();
  for (int s = 0; s < kNumSpecies; ++s) {
    auto& boxes = field_.boxes[s];
    boxes.assign(box_centers_.size(), backgrounds[s]);
    for (std::size_t i = 0; i < agents_[s].size(); ++i) {
      const double rate = sources_[agents_[s][i].source_id].current_rate;
      const auto& coef = unit_coef_[s][i];
      for (std::size_t b = 0; b < boxes.size(); ++b) {
        boxes[b] += coef[b] * rate * inv_u;
      }
    }
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      boxes[b] += leak_unit_box_[s][b] * inv_u;
    }
  }
  field_.recompute_aggregates();
}

void Engine::step() {
  if (t_ >= cfg_.total_steps()) {
    throw std::logic_error("engine: step past total_steps at t=" +
                           std::to_string(t_));
  }

  // (1) decisions
  if (cfg_.cooperation) {
    for (int s = 0; s < kNumSpecies; ++s) {
      auto& group = agents_[s];
      const std::size_t n = group.size();
      double last_reward_sum = 0.0;
      std::vector<double> last_reward(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!group[i].reward_history.empty()) {
          last_reward[i] = group[i].reward_history.back();
        }
        last_reward_sum += last_reward[i];
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double u = choices_rng_.uniform();
        const double rpw = weighted_reward(group[i].reward_history).rpw;
        const double pfavg =
            n > 1 ? (last_reward_sum - last_reward[i]) / static_cast<double>(n - 1)
                  : 0.0;
        choose_action(group[i], rpw, pfavg, u);
        group[i].choice_history.push_back(group[i].last_choice);
        if (group[i].choice_history.size() >
            static_cast<std::size_t>(cfg_.memory_steps)) {
          group[i].choice_history.erase(group[i].choice_history.begin());
        }
      }
    }
  }

  // (2) actuation, (3) dispersion
  apply_rates();
  compute_field();
  const WeatherState weather_used = weather_;

  // (4) weather advance
  if (!file_series_.empty()) {
    if (t_ + 1 < static_cast<long>(file_series_.size())) {
      weather_ = file_series_[t_ + 1];
    }
  } else {
    weather_ = next_state(weather_, targets_, weather_rng_);
  }

  // (5) forecast for the next horizon, from this step's state
  for (int s = 0; s < kNumSpecies; ++s) {
    const PredictorInput input{.aggregate = field_.aggregate[s],
                               .wind_speed = weather_used.wind_speed,
                               .humidity = weather_used.humidity,
                               .temperature = weather_used.temperature,
                               .rainfall = weather_used.rainfall};
    forecast_[s] = forecasters_[s] ? forecast(*forecasters_[s], input)
                                   : field_.aggregate[s];
  }

  // (6) rewards, (7) probability updates
  PerSpecies<std::vector<RewardRecord>> rewards;
  if (cfg_.cooperation) {
    const auto goals = cfg_.goals();
    for (int s = 0; s < kNumSpecies; ++s) {
      auto& group = agents_[s];
      std::vector<int> decisions(group.size());
      std::vector<double> emissions(group.size());
      for (std::size_t i = 0; i < group.size(); ++i) {
        decisions[i] = group[i].last_choice;
        emissions[i] = sources_[group[i].source_id].current_rate;
      }
      rewards[s] = compute_rewards(group, decisions, emissions,
                                   field_.aggregate[s], forecast_[s], goals[s],
                                   cfg_.memory_steps, t_);
      for (std::size_t i = 0; i < group.size(); ++i) {
        const double alpha = select_alpha(group[i].choice_history);
        update_probabilities(group[i], alpha, rewards[s][i].wp);
      }
    }
  }

  StepRecord record;
  record.step = t_;
  record.hours = t_ * cfg_.hours_per_step;
  record.aggregate = field_.aggregate;
  record.forecast = forecast_;
  for (int s = 0; s < kNumSpecies; ++s) {
    const auto& group = agents_[s];
    if (group.empty()) {
      record.coop_fraction[s] = 0.0;
    } else {
      std::size_t n_coop = 0;
      for (const AgentState& a : group) {
        if (a.last_choice == kChoiceReduce) ++n_coop;
      }
      record.coop_fraction[s] =
          static_cast<double>(n_coop) / static_cast<double>(group.size());
    }
  }
  record.aqi = air_quality_index(field_, cfg_.goals());
  records_.push_back(record);
  weather_log_.push_back(weather_used);

  if (trace_enabled_) {
    for (int s = 0; s < kNumSpecies; ++s) {
      const auto& group = agents_[s];
      for (std::size_t i = 0; i < group.size(); ++i) {
        trace_.push_back({.step = t_,
                          .species = static_cast<Species>(s),
                          .agent_id = group[i].source_id,
                          .decision = group[i].last_choice,
                          .p = group[i].p_reduce,
                          .q = group[i].q_increase,
                          .reward = cfg_.cooperation ? rewards[s][i].reward : 0.0});
      }
    }
  }

  ++t_;
}

RunResult Engine::run() {
  if (!forecasters_set_) train_forecasters();
  while (t_ < cfg_.total_steps()) step();

  RunResult result;
  result.records = std::move(records_);
  result.weather = std::move(weather_log_);
  result.trace = std::move(trace_);
  const auto goals = cfg_.goals();
  for (int s = 0; s < kNumSpecies; ++s) {
    SpeciesSummary& sum = result.summary[s];
    sum.max_aggregate = 0.0;
    double total = 0.0;
    long above = 0;
    for (const StepRecord& r : result.records) {
      total += r.aggregate[s];
      sum.max_aggregate = std::max(sum.max_aggregate, r.aggregate[s]);
      if (r.aggregate[s] > goals[s]) ++above;
    }
    const auto n = static_cast<double>(result.records.size());
    sum.mean_aggregate = result.records.empty() ? 0.0 : total / n;
    sum.frac_steps_above_goal = result.records.empty() ? 0.0 : above / n;
  }
  return result;
}

PerSpecies<std::vector<TrainingPair>> Engine::generate_training_pairs(
    const ScenarioConfig& config) {
  ScenarioConfig datagen = config;
  datagen.cooperation = false;  // open loop: decisions frozen at the initial draw
  datagen.seed = derived_seed(config.seed, "traindata");
  Engine engine(datagen);
  engine.set_forecasters({});  // persistence; forecasts do not feed back here
  const RunResult result = engine.run();

  PerSpecies<std::vector<TrainingPair>> pairs;
  if (result.records.size() < 2) return pairs;
  for (std::size_t t = 0; t + 1 < result.records.size(); ++t) {
    const StepRecord& now = result.records[t];
    const WeatherState& w = result.weather[t];
    for (int s = 0; s < kNumSpecies; ++s) {
      pairs[s].push_back({PredictorInput{.aggregate = now.aggregate[s],
                                         .wind_speed = w.wind_speed,
                                         .humidity = w.humidity,
                                         .temperature = w.temperature,
                                         .rainfall = w.rainfall},
                          result.records[t + 1].aggregate[s]});
    }
  }
  return pairs;
}

}  // namespace apcsim
