#include "apcsim/agents.hpp"

#include <algorithm>
#include <stdexcept>

namespace apcsim {

WeightedReward weighted_reward(std::span<const double> reward_history) {
  if (reward_history.empty()) return {0.0, 0.0};
  double weight = 1.0;
  double sum = 0.0;
  double norm = 0.0;
  for (auto it = reward_history.rbegin(); it != reward_history.rend(); ++it) {
    sum += weight * *it;
    norm += weight;
    weight *= kRewardMemoryGamma;
  }
  const double avg = sum / norm;
  return {avg, avg};
}

double select_alpha(std::span<const int> choice_history) {
  if (choice_history.empty()) {
    throw std::domain_error("select_alpha: empty choice history");
  }
  const std::size_t n = choice_history.size();
  std::size_t changes = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (choice_history[i] != choice_history[i - 1]) ++changes;
  }
  if (changes == 0) return 0.015;
  if (n >= 2 && changes == n - 1) return -0.015;
  return 0.010;
}

Decision choose_action(AgentState& state, double rpw, double pfavg, double u) {
  const bool dissatisfied = rpw < pfavg;
  if (state.last_choice == kChoiceReduce) {
    if (dissatisfied && state.p_reduce < state.q_increase && state.q_increase > u) {
      state.last_choice = kChoiceIncrease;
    }
  } else {
    if (dissatisfied && state.q_increase < state.p_reduce && state.p_reduce > u) {
      state.last_choice = kChoiceReduce;
    }
  }
  return {state.last_choice, state.last_choice == kChoiceReduce
                                 ? EmissionCommand::Reduce
                                 : EmissionCommand::Resume};
}

void update_probabilities(AgentState& state, double alpha, double wp) {
  auto updated = [alpha, wp](double prob) {
    const double next =
        wp > 0.0 ? prob + (1.0 - prob) * alpha : (1.0 - alpha) * prob;
    return std::clamp(next, 0.0, 1.0);
  };
  if (state.last_choice == kChoiceReduce) {
    state.p_reduce = updated(state.p_reduce);
  } else {
    state.q_increase = updated(state.q_increase);
  }
}

std::vector<RewardRecord> compute_rewards(std::span<AgentState> agents,
                                          std::span<const int> decisions,
                                          std::span<const double> emissions,
                                          double realized, double forecast,
                                          double goal, int memory_steps,
                                          long step) {
  (void)realized;
  if (agents.size() != decisions.size() || agents.size() != emissions.size()) {
    throw std::invalid_argument("compute_rewards: misaligned vectors");
  }
  if (!(goal > 0.0)) {
    throw std::invalid_argument("compute_rewards: goal must be > 0");
  }
  const std::size_t n_agents = agents.size();
  std::size_t n_coop = 0;
  for (int d : decisions) {
    if (d == kChoiceReduce) ++n_coop;
  }
  const double coop_reward =
      n_agents == 0 ? 0.0
                    : static_cast<double>(n_coop) / static_cast<double>(n_agents);

  double penalty_scale = 0.0;
  if (forecast > goal) {
    double total_emission = 0.0;
    for (double e : emissions) total_emission += e;
    if (total_emission > 0.0) {
      penalty_scale = (forecast / goal - 1.0) / total_emission;
    }
  }

  std::vector<RewardRecord> records;
  records.reserve(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) {
    double reward = decisions[i] == kChoiceReduce ? coop_reward : 0.0;
    reward -= emissions[i] * penalty_scale;
    AgentState& a = agents[i];
    a.reward_history.push_back(reward);
    if (a.reward_history.size() > static_cast<std::size_t>(memory_steps)) {
      a.reward_history.erase(a.reward_history.begin());
    }
    const WeightedReward w = weighted_reward(a.reward_history);
    records.push_back({a.source_id, step, reward, w.wp, w.rpw});
  }
  return records;
}

}  // namespace apcsim
