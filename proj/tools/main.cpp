#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "apcsim/engine.hpp"
#include "apcsim/runner.hpp"

namespace {

using namespace apcsim;

struct CommonFlags {
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string coop;
  std::string leaks;
  bool trace_agents = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool variant_flags) {
  cmd->add_option("--scenario", flags.scenario_path, "scenario file (key = value)");
  cmd->add_option("--seed", flags.seed, "override the scenario seed");
  cmd->add_option("--out", flags.out_dir, "override the output directory");
  if (variant_flags) {
    cmd->add_option("--coop", flags.coop, "cooperation on|off")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--leaks", flags.leaks, "uncontrolled leak sources on|off")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_flag("--trace-agents", flags.trace_agents,
                  "also write the per-agent trace CSV");
  }
}

ScenarioConfig load_config(const CommonFlags& flags) {
  ScenarioConfig config;
  if (!flags.scenario_path.empty()) {
    config = parse_scenario(flags.scenario_path);
  } else {
    validate_config(config);
  }
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;
  if (!flags.coop.empty()) config.cooperation = flags.coop == "on";
  if (!flags.leaks.empty()) config.leaks = flags.leaks == "on";
  validate_config(config);
  return config;
}

std::filesystem::path ensure_out_dir(const ScenarioConfig& config) {
  std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int cmd_run(const CommonFlags& flags) {
  const ScenarioConfig config = load_config(flags);
  const auto dir = ensure_out_dir(config);
  Engine engine(config);
  engine.enable_trace(flags.trace_agents);
  const RunResult result = engine.run();
  const auto csv_path = dir / "run.csv";
  write_csv(result, csv_path.string());
  if (flags.trace_agents) {
    write_agent_trace_csv(result, (dir / "agents_trace.csv").string());
  }
  std::cout << comparison_table({{{config.cooperation, config.leaks}, result}});
  std::cout << "wrote " << csv_path.string() << "\n";
  return 0;
}

int cmd_matrix(const CommonFlags& flags) {
  const ScenarioConfig config = load_config(flags);
  const auto dir = ensure_out_dir(config);
  const auto results = run_matrix(config, default_arms());
  for (const ArmResult& arm : results) {
    write_csv(arm.result, (dir / (arm_name(arm.arm) + ".csv")).string());
  }
  std::cout << comparison_table(results);
  std::cout << "wrote " << (dir / "<arm>.csv").string() << " for "
            << results.size() << " arms\n";
  return 0;
}

int cmd_train_predictor(const CommonFlags& flags) {
  const ScenarioConfig config = load_config(flags);
  const auto dir = ensure_out_dir(config);
  const auto pairs = Engine::generate_training_pairs(config);
  for (int s = 0; s < kNumSpecies; ++s) {
    const std::size_t n_train = pairs[s].size() * 7 / 10;
    if (n_train < 50) {
      throw std::runtime_error(
          "train-predictor: scenario too short, training split has " +
          std::to_string(n_train) + " pairs (need 50)");
    }
    const std::vector<TrainingPair> train_split(pairs[s].begin(),
                                                pairs[s].begin() + n_train);
    Rng rng(derived_seed(config.seed,
                         "training/" + std::string(kSpeciesNames[s])));
    const TrainResult trained = train_predictor(train_split, config.training, rng);

    double sq_net = 0.0, sq_persist = 0.0;
    const std::size_t n_val = pairs[s].size() - n_train;
    for (std::size_t i = n_train; i < pairs[s].size(); ++i) {
      const auto& [input, target] = pairs[s][i];
      const double err = forecast(trained.params, input) - target;
      const double base = input.aggregate - target;
      sq_net += err * err;
      sq_persist += base * base;
    }
    const double rmse_net = std::sqrt(sq_net / n_val);
    const double rmse_persist = std::sqrt(sq_persist / n_val);
    const auto net_path = dir / ("predictor_" + std::string(kSpeciesNames[s]) + ".net");
    save_network(trained.params, net_path.string());
    std::printf(
        "%-5s train pairs %zu  val pairs %zu  rmse %.4f  persistence %.4f  wrote %s\n",
        std::string(kSpeciesNames[s]).c_str(), n_train, n_val, rmse_net,
        rmse_persist, net_path.string().c_str());
  }
  return 0;
}

int cmd_validate(const CommonFlags& flags) {
  if (flags.scenario_path.empty()) {
    throw std::runtime_error("validate: --scenario is required");
  }
  parse_scenario(flags.scenario_path);
  std::cout << "ok: " << flags.scenario_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-agent air pollution crisis simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags, matrix_flags, train_flags, validate_flags;
  CLI::App* run = app.add_subcommand("run", "run one scenario and write its CSV");
  add_common(run, run_flags, true);
  CLI::App* matrix = app.add_subcommand(
      "matrix", "run the cooperation x leaks arms with a shared seed");
  add_common(matrix, matrix_flags, false);
  CLI::App* train = app.add_subcommand(
      "train-predictor", "fit the per-species forecasters on open-loop data");
  add_common(train, train_flags, false);
  CLI::App* validate =
      app.add_subcommand("validate", "parse and check a scenario file");
  validate->add_option("--scenario", validate_flags.scenario_path,
                       "scenario file to check");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_flags);
    if (matrix->parsed()) return cmd_matrix(matrix_flags);
    if (train->parsed()) return cmd_train_predictor(train_flags);
    if (validate->parsed()) return cmd_validate(validate_flags);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
