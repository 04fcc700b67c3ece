#include "apcsim/predictor.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace apcsim {

namespace {

using Features = std::array<double, kNetInputs>;

Features to_features(const PredictorInput& in) {
  return {in.aggregate, in.wind_speed, in.humidity, in.temperature,
          in.rainfall};
}

void check_normalization(const NetworkParameters& p) {
  for (double s : p.in_std) {
    if (!(s > 0.0)) throw std::domain_error("predictor: input std must be > 0");
  }
  if (!(p.out_std > 0.0)) {
    throw std::domain_error("predictor: output std must be > 0");
  }
}

Features normalize(const NetworkParameters& p, const PredictorInput& in) {
  Features x = to_features(in);
  for (int k = 0; k < kNetInputs; ++k) x[k] = (x[k] - p.in_mean[k]) / p.in_std[k];
  return x;
}

struct Forward {
  std::array<double, kNetHidden> hidden;
  double output;  // normalized scale
};

Forward forward(const NetworkParameters& p, const Features& xn) {
  Forward f;
  f.output = p.b2;
  for (int j = 0; j < kNetHidden; ++j) {
    double a = p.b1[j];
    for (int k = 0; k < kNetInputs; ++k) a += p.w1[j][k] * xn[k];
    f.hidden[j] = std::tanh(a);
    f.output += p.w2[j] * f.hidden[j];
  }
  return f;
}

struct Gradients {
  std::array<std::array<double, kNetInputs>, kNetHidden> w1{};
  std::array<double, kNetHidden> b1{};
  std::array<double, kNetHidden> w2{};
  double b2 = 0.0;
};

// Accumulates the gradient of 0.5*(output - target)^2 / scale into g and
// returns the sample's contribution 0.5*(output - target)^2 / scale.
double accumulate_gradient(const NetworkParameters& p, const Features& xn,
                           double target_n, double scale, Gradients& g) {
  const Forward f = forward(p, xn);
  const double d = (f.output - target_n) / scale;
  g.b2 += d;
  for (int j = 0; j < kNetHidden; ++j) {
    g.w2[j] += d * f.hidden[j];
    const double dh = d * p.w2[j] * (1.0 - f.hidden[j] * f.hidden[j]);
    g.b1[j] += dh;
    for (int k = 0; k < kNetInputs; ++k) g.w1[j][k] += dh * xn[k];
  }
  const double e = f.output - target_n;
  return 0.5 * e * e / scale;
}

}  // namespace

double forecast(const NetworkParameters& params, const PredictorInput& input) {
  check_normalization(params);
  const Forward f = forward(params, normalize(params, input));
  const double value = f.output * params.out_std + params.out_mean;
  if (!std::isfinite(value)) {
    throw std::domain_error("predictor: non-finite forecast");
  }
  return value < 0.0 ? 0.0 : value;
}

TrainResult train_predictor(const std::vector<TrainingPair>& data,
                            const TrainingConfig& config, Rng& rng) {
  if (data.size() < 50) {
    throw std::invalid_argument("train_predictor: need at least 50 samples, got " +
                                std::to_string(data.size()));
  }
  if (!(config.learning_rate > 0.0) || config.epochs < 1 || config.batch_size < 1) {
    throw std::invalid_argument("train_predictor: invalid hyperparameters");
  }
  for (const auto& [in, target] : data) {
    const Features x = to_features(in);
    bool ok = std::isfinite(target);
    for (double v : x) ok = ok && std::isfinite(v);
    if (!ok) throw std::invalid_argument("train_predictor: non-finite sample");
  }

  const std::size_t n = data.size();
  NetworkParameters p;
  for (int k = 0; k < kNetInputs; ++k) {
    double m = 0.0;
    for (const auto& [in, target] : data) m += to_features(in)[k];
    m /= static_cast<double>(n);
    double v = 0.0;
    for (const auto& [in, target] : data) {
      const double d = to_features(in)[k] - m;
      v += d * d;
    }
    p.in_mean[k] = m;
    p.in_std[k] = v > 0.0 ? std::sqrt(v / static_cast<double>(n)) : 1.0;
  }
  {
    double m = 0.0;
    for (const auto& [in, target] : data) m += target;
    m /= static_cast<double>(n);
    double v = 0.0;
    for (const auto& [in, target] : data) v += (target - m) * (target - m);
    p.out_mean = m;
    p.out_std = v > 0.0 ? std::sqrt(v / static_cast<double>(n)) : 1.0;
  }

  std::vector<Features> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = normalize(p, data[i].first);
    ys[i] = (data[i].second - p.out_mean) / p.out_std;
  }

  const double s1 = std::sqrt(6.0 / (kNetInputs + kNetHidden));
  const double s2 = std::sqrt(6.0 / (kNetHidden + 1));
  for (int j = 0; j < kNetHidden; ++j) {
    for (int k = 0; k < kNetInputs; ++k) p.w1[j][k] = rng.uniform(-s1, s1);
  }
  for (int j = 0; j < kNetHidden; ++j) p.w2[j] = rng.uniform(-s2, s2);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainResult result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const double scale = static_cast<double>(end - start);
      Gradients g;
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        batch_loss += accumulate_gradient(p, xs[order[i]], ys[order[i]], scale, g);
      }
      for (int j = 0; j < kNetHidden; ++j) {
        for (int k = 0; k < kNetInputs; ++k) {
          p.w1[j][k] -= config.learning_rate * g.w1[j][k];
        }
        p.b1[j] -= config.learning_rate * g.b1[j];
        p.w2[j] -= config.learning_rate * g.w2[j];
      }
      p.b2 -= config.learning_rate * g.b2;
      epoch_loss += batch_loss;
      ++batches;
    }
    epoch_loss /= static_cast<double>(batches);
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error(
          "train_predictor: loss diverged at epoch " + std::to_string(epoch) +
          " (lr=" + std::to_string(config.learning_rate) + ")");
    }
    if (epoch == 1) result.first_epoch_loss = epoch_loss;
    result.final_epoch_loss = epoch_loss;
  }
  result.params = p;
  return result;
}

double gradient_check(const NetworkParameters& params,
                      const PredictorInput& input, double target) {
  check_normalization(params);
  const Features xn = normalize(params, input);
  const double tn = (target - params.out_mean) / params.out_std;

  Gradients analytic;
  accumulate_gradient(params, xn, tn, 1.0, analytic);

  NetworkParameters p = params;
  const double h = 1e-5;
  auto loss = [&]() {
    const double e = forward(p, xn).output - tn;
    return 0.5 * e * e;
  };
  auto fd = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double lp = loss();
    param = saved - h;
    const double lm = loss();
    param = saved;
    return (lp - lm) / (2.0 * h);
  };
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
  };

  double worst = 0.0;
  for (int j = 0; j < kNetHidden; ++j) {
    for (int k = 0; k < kNetInputs; ++k) {
      worst = std::max(worst, rel(analytic.w1[j][k], fd(p.w1[j][k])));
    }
    worst = std::max(worst, rel(analytic.b1[j], fd(p.b1[j])));
    worst = std::max(worst, rel(analytic.w2[j], fd(p.w2[j])));
  }
  worst = std::max(worst, rel(analytic.b2, fd(p.b2)));
  return worst;
}

void save_network(const NetworkParameters& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_network: cannot open " + path);
  auto put = [&out](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ' ' << buf;
  };
  out << "apcsim-net 1\n";
  out << "topology " << kNetInputs << ' ' << kNetHidden << " 1\n";
  out << "in_mean";
  for (double v : params.in_mean) put(v);
  out << "\nin_std";
  for (double v : params.in_std) put(v);
  out << "\nout_mean";
  put(params.out_mean);
  out << "\nout_std";
  put(params.out_std);
  out << "\nw1";
  for (const auto& row : params.w1) {
    for (double v : row) put(v);
  }
  out << "\nb1";
  for (double v : params.b1) put(v);
  out << "\nw2";
  for (double v : params.w2) put(v);
  out << "\nb2";
  put(params.b2);
  out << '\n';
  if (!out) throw std::runtime_error("save_network: write failed for " + path);
}

NetworkParameters load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_network: cannot open " + path);
  auto fail = [&path](const std::string& what) -> std::runtime_error {
    return std::runtime_error("load_network: " + path + ": " + what);
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "apcsim-net") {
    throw fail("not an apcsim network file");
  }
  if (version != 1) throw fail("unsupported version " + std::to_string(version));
  std::string key;
  int ni = 0, nh = 0, no = 0;
  if (!(in >> key >> ni >> nh >> no) || key != "topology") {
    throw fail("missing topology header");
  }
  if (ni != kNetInputs || nh != kNetHidden || no != 1) {
    throw fail("topology mismatch, expected 5 10 1");
  }
  NetworkParameters p;
  auto section = [&](const char* name, auto&& fill) {
    if (!(in >> key) || key != name) throw fail(std::string("expected section ") + name);
    fill();
    if (!in) throw fail(std::string("malformed section ") + name);
  };
  section("in_mean", [&] { for (double& v : p.in_mean) in >> v; });
  section("in_std", [&] { for (double& v : p.in_std) in >> v; });
  section("out_mean", [&] { in >> p.out_mean; });
  section("out_std", [&] { in >> p.out_std; });
  section("w1", [&] {
    for (auto& row : p.w1) {
      for (double& v : row) in >> v;
    }
  });
  section("b1", [&] { for (double& v : p.b1) in >> v; });
  section("w2", [&] { for (double& v : p.w2) in >> v; });
  section("b2", [&] { in >> p.b2; });
  check_normalization(p);
  return p;
}

}  // namespace apcsim
