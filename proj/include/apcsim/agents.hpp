#pragma once

#include <span>
#include <vector>

namespace apcsim {

inline constexpr int kChoiceReduce = 0;
inline constexpr int kChoiceIncrease = 1;
inline constexpr double kRewardMemoryGamma = 0.5;

enum class EmissionCommand { Reduce, Resume };

// Histories store the most recent entry LAST and hold at most K entries.
struct AgentState {
  int source_id = 0;
  int last_choice = kChoiceReduce;       // S_i: 0 reduce, 1 increase
  std::vector<int> choice_history;       // <= K decisions
  std::vector<double> reward_history;    // <= K rewards
  double p_reduce = 0.5;                 // P, in [0, 1]
  double q_increase = 0.5;               // Q, in [0, 1]
};

struct Decision {
  int choice = kChoiceReduce;
  EmissionCommand command = EmissionCommand::Reduce;
};

struct RewardRecord {
  int agent_id = 0;
  long step = 0;
  double reward = 0.0;
  double wp = 0.0;
  double rpw = 0.0;
};

struct WeightedReward {
  double wp = 0.0;
  double rpw = 0.0;
};

// Exponentially weighted window average: weights proportional to gamma^j
// with j = 0 for the most recent reward, normalized to sum 1 over the
// available entries. Empty history yields 0. WP and RPw coincide.
WeightedReward weighted_reward(std::span<const double> reward_history);

// Step size from the number of adjacent decision changes in the window:
// 0 changes -> 0.015, a change at every step -> -0.015, anything else
// (including exactly one change) -> 0.010. Histories of size < 2 count as
// unchanged.
double select_alpha(std::span<const int> choice_history);

// The reduce/resume switching rule. Updates state.last_choice and returns
// the decision; u is a uniform draw in [0, 1).
Decision choose_action(AgentState& state, double rpw, double pfavg, double u);

// Linear reward-inaction update of P (when last_choice is 0) or Q (when 1),
// clamped to [0, 1].
void update_probabilities(AgentState& state, double alpha, double wp);

// One species group: cooperators (choice 0) earn n/N; when the forecast
// exceeds the goal every agent is additionally penalised by its emission
// share times (forecast/goal - 1). Appends each reward to the agent's
// history (trimmed to memory_steps) and returns records with the updated
// weighted averages. `realized` is recorded for context only; regulation
// compares the forecast against the goal.
std::vector<RewardRecord> compute_rewards(std::span<AgentState> agents,
                                          std::span<const int> decisions,
                                          std::span<const double> emissions,
                                          double realized, double forecast,
                                          double goal, int memory_steps,
                                          long step);

}  // namespace apcsim
