#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace apcsim {

enum class Species : int { PM10 = 0, NOx = 1, SOx = 2 };

inline constexpr int kNumSpecies = 3;

inline constexpr std::array<std::string_view, kNumSpecies> kSpeciesNames{
    "PM10", "NOx", "SOx"};

template <typename T>
using PerSpecies = std::array<T, kNumSpecies>;

inline constexpr std::string_view to_string(Species s) {
  return kSpeciesNames[static_cast<int>(s)];
}

inline std::optional<Species> species_from_string(std::string_view name) {
  for (int i = 0; i < kNumSpecies; ++i) {
    if (kSpeciesNames[i] == name) return static_cast<Species>(i);
  }
  return std::nullopt;
}

inline constexpr std::array<Species, kNumSpecies> all_species() {
  return {Species::PM10, Species::NOx, Species::SOx};
}

}  // namespace apcsim
