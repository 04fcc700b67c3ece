#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "apcsim/rng.hpp"

namespace apcsim {

// Feature order is fixed: aggregate, wind, humidity, temperature, rainfall.
struct PredictorInput {
  double aggregate = 0.0;    // µg/m³
  double wind_speed = 0.0;   // m/s
  double humidity = 0.0;     // %
  double temperature = 0.0;  // °C
  double rainfall = 0.0;     // mm
};

inline constexpr int kNetInputs = 5;
inline constexpr int kNetHidden = 10;

// 5 -> 10 tanh -> 1 linear regressor with per-feature z-score constants.
struct NetworkParameters {
  std::array<std::array<double, kNetInputs>, kNetHidden> w1{};
  std::array<double, kNetHidden> b1{};
  std::array<double, kNetHidden> w2{};
  double b2 = 0.0;
  std::array<double, kNetInputs> in_mean{};
  std::array<double, kNetInputs> in_std{};  // > 0
  double out_mean = 0.0;
  double out_std = 1.0;  // > 0
};

struct TrainingConfig {
  double learning_rate = 1e-2;
  int epochs = 200;
  int batch_size = 32;

  bool operator==(const TrainingConfig&) const = default;
};

struct TrainResult {
  NetworkParameters params;
  double first_epoch_loss = 0.0;
  double final_epoch_loss = 0.0;
};

using TrainingPair = std::pair<PredictorInput, double>;  // target in µg/m³

// De-normalized forecast, clamped to >= 0. Throws std::domain_error if the
// normalization constants are invalid.
double forecast(const NetworkParameters& params, const PredictorInput& input);

// Mini-batch gradient descent on 0.5*MSE over z-scored features/targets
// (constants computed from `data`, which callers pass as the training split
// only). Throws std::invalid_argument for datasets smaller than 50 samples
// and std::runtime_error with diagnostics if the loss diverges.
TrainResult train_predictor(const std::vector<TrainingPair>& data,
                            const TrainingConfig& config, Rng& rng);

// Max relative discrepancy between the analytic gradient of the one-sample
// 0.5*(prediction - target)^2 loss (normalized scale) and central finite
// differences with step 1e-5.
double gradient_check(const NetworkParameters& params,
                      const PredictorInput& input, double target);

// Versioned flat-text round trip (exact: values written with %.17g).
void save_network(const NetworkParameters& params, const std::string& path);
NetworkParameters load_network(const std::string& path);

}  // namespace apcsim
