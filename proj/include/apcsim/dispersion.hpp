#pragma once

#include <span>
#include <vector>

#include "apcsim/species.hpp"
#include "apcsim/weather.hpp"

namespace apcsim {

// Single receptor query against one point source. Distances in meters,
// emission rate in g/h (converted to µg/s internally), wind in m/s.
struct PlumeQuery {
  double x = 0.0;              // downwind distance, > 0
  double y = 0.0;              // crosswind offset
  double z = 0.0;              // receptor height, >= 0
  double stack_height = 0.0;   // effective release height H, >= 0
  double emission_rate = 0.0;  // g/h, >= 0
  double wind_speed = 0.0;     // m/s, > 0
};

struct SigmaPair {
  double sigma_y = 0.0;
  double sigma_z = 0.0;
};

struct EmissionSource {
  int id = 0;
  Species species = Species::PM10;
  bool controlled = true;
  double x = 0.0;         // m
  double y = 0.0;         // m
  double height = 0.0;    // m
  double max_rate = 0.0;  // g/h
  double current_rate = 0.0;
};

struct ConcentrationField {
  PerSpecies<std::vector<double>> boxes{};  // µg/m³ per box
  PerSpecies<double> aggregate{};           // arithmetic mean over boxes

  void recompute_aggregates();
};

// Briggs open-country dispersion coefficients for stability class C.
// Throws std::domain_error for x <= 0.
SigmaPair sigma_for_distance(double x);

// Ground-reflecting Gaussian plume concentration in µg/m³.
// Throws std::domain_error when the query invariants are violated.
double plume_concentration(const PlumeQuery& q);

// Sums plume contributions of all sources over box-center receptors at
// (center_x, 0, 0), on top of the per-species background. Wind blows along
// +x; a source only affects receptors more than 1 m downwind of it.
// Throws std::domain_error on empty receptor set or non-positive wind.
ConcentrationField superpose(std::span<const EmissionSource> sources,
                             std::span<const double> box_centers_x,
                             const WeatherState& weather,
                             const PerSpecies<double>& background);

}  // namespace apcsim
