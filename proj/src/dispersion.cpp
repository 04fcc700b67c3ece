#include "apcsim/dispersion.hpp"

#include <cmath>
#include <stdexcept>

namespace apcsim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kGhToUgs = 1.0e6 / 3600.0;  // g/h -> µg/s
constexpr double kMinDownwind = 1.0;         // m; below this a source has no effect

}  // namespace

void ConcentrationField::recompute_aggregates() {
  for (int s = 0; s < kNumSpecies; ++s) {
    double sum = 0.0;
    for (double v : boxes[s]) sum += v;
    aggregate[s] = boxes[s].empty() ? 0.0 : sum / static_cast<double>(boxes[s].size());
  }
}

SigmaPair sigma_for_distance(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("sigma_for_distance: downwind distance must be > 0");
  }
  return {0.11 * x / std::sqrt(1.0 + 0.0001 * x),
          0.08 * x / std::sqrt(1.0 + 0.0002 * x)};
}

double plume_concentration(const PlumeQuery& q) {
  if (!(q.x > 0.0)) {
    throw std::domain_error("plume_concentration: x must be > 0");
  }
  if (!(q.wind_speed > 0.0)) {
    throw std::domain_error("plume_concentration: wind_speed must be > 0");
  }
  if (q.z < 0.0 || q.stack_height < 0.0 || q.emission_rate < 0.0) {
    throw std::domain_error(
        "plume_concentration: z, stack_height and emission_rate must be >= 0");
  }
  const auto [sy, sz] = sigma_for_distance(q.x);
  const double er = q.emission_rate * kGhToUgs;
  const double cross = std::exp(-(q.y * q.y) / (2.0 * sy * sy));
  const double dzm = q.z - q.stack_height;
  const double dzp = q.z + q.stack_height;
  const double vertical = std::exp(-(dzm * dzm) / (2.0 * sz * sz)) +
                          std::exp(-(dzp * dzp) / (2.0 * sz * sz));
  return er / (kTwoPi * q.wind_speed * sy * sz) * cross * vertical;
}

ConcentrationField superpose(std::span<const EmissionSource> sources,
                             std::span<const double> box_centers_x,
                             const WeatherState& weather,
                             const PerSpecies<double>& background) {
  if (box_centers_x.empty()) {
    throw std::domain_error("superpose: receptor set is empty");
  }
  if (!(weather.wind_speed > 0.0)) {
    throw std::domain_error("superpose: wind_speed must be > 0");
  }
  ConcentrationField field;
  for (int s = 0; s < kNumSpecies; ++s) {
    field.boxes[s].assign(box_centers_x.size(), background[s]);
  }
  for (const EmissionSource& src : sources) {
    auto& boxes = field.boxes[static_cast<int>(src.species)];
    for (std::size_t b = 0; b < box_centers_x.size(); ++b) {
      const double dx = box_centers_x[b] - src.x;
      if (dx <= kMinDownwind) continue;
      boxes[b] += plume_concentration({.x = dx,
                                       .y = -src.y,
                                       .z = 0.0,
                                       .stack_height = src.height,
                                       .emission_rate = src.current_rate,
                                       .wind_speed = weather.wind_speed});
    }
  }
  field.recompute_aggregates();
  return field;
}

}  // namespace apcsim
