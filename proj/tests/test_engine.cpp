#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "apcsim/engine.hpp"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

using namespace apcsim;

namespace {

// Small, fast scenario used by most engine tests: 15 agents, 48 steps.
ScenarioConfig small_config() {
  ScenarioConfig c;
  c.controlled_per_species = 5;
  c.uncontrolled_per_species = 2;
  c.total_hours = 96;
  c.seed = 42;
  return c;
}

double relative_diff(double a, double b) {
  return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

ConcentrationField field_with(PerSpecies<double> aggregates) {
  ConcentrationField f;
  for (int s = 0; s < kNumSpecies; ++s) {
    f.boxes[s] = {aggregates[s]};
  }
  f.recompute_aggregates();
  return f;
}

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& text) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("apcsim_engine_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++) + ".csv");
    std::ofstream out(path);
    out << text;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("air quality bands on the worst species/goal ratio") {
  const PerSpecies<double> goals{70.0, 50.0, 60.0};
  CHECK(air_quality_index(field_with({0, 0, 0}), goals) == 1);
  CHECK(air_quality_index(field_with({34.9, 0, 0}), goals) == 1);
  CHECK(air_quality_index(field_with({35.0, 0, 0}), goals) == 2);  // ratio 0.5
  CHECK(air_quality_index(field_with({69.9, 0, 0}), goals) == 2);
  CHECK(air_quality_index(field_with({70.0, 0, 0}), goals) == 3);  // ratio 1.0
  CHECK(air_quality_index(field_with({104.9, 0, 0}), goals) == 3);
  CHECK(air_quality_index(field_with({105.0, 0, 0}), goals) == 4);
  CHECK(air_quality_index(field_with({139.9, 0, 0}), goals) == 4);
  CHECK(air_quality_index(field_with({140.0, 0, 0}), goals) == 5);
  // A clean PM10 level cannot mask a bad NOx level.
  CHECK(air_quality_index(field_with({10.0, 100.0, 0}), goals) == 5);
}

TEST_CASE("default scenario instantiates the full source inventory") {
  const ScenarioConfig cfg;  // 80 controlled + 5 uncontrolled per species
  Engine engine(cfg);
  CHECK(engine.sources().size() == 255);

  PerSpecies<int> controlled{}, uncontrolled{};
  for (const EmissionSource& s : engine.sources()) {
    const int sp = static_cast<int>(s.species);
    if (s.controlled) {
      ++controlled[sp];
      CHECK(s.height == cfg.stack_height_controlled_m);
      CHECK(s.max_rate == 2000.0);
    } else {
      ++uncontrolled[sp];
      CHECK(s.height == cfg.stack_height_uncontrolled_m);
      CHECK(s.max_rate == 5000.0);
      CHECK(s.current_rate == 5000.0);
    }
    CHECK(s.x >= 0.0);
    CHECK(s.x <= cfg.domain_length_m);
    CHECK(std::abs(s.y) <= cfg.domain_width_m / 2.0);
  }
  for (int s = 0; s < kNumSpecies; ++s) {
    CHECK(controlled[s] == 80);
    CHECK(uncontrolled[s] == 5);
    CHECK(engine.agents()[s].size() == 80);
  }
  CHECK(cfg.total_steps() == 2450);
}

TEST_CASE("disabling leaks removes only the uncontrolled sources") {
  ScenarioConfig cfg = small_config();
  cfg.leaks = false;
  Engine engine(cfg);
  CHECK(engine.sources().size() == 15);
  for (const EmissionSource& s : engine.sources()) CHECK(s.controlled);
}

TEST_CASE("controlled layout is seed-stable and leak-independent") {
  ScenarioConfig a = small_config();
  ScenarioConfig b = small_config();
  b.leaks = false;
  Engine ea(a), eb(b);
  for (std::size_t i = 0; i < eb.sources().size(); ++i) {
    REQUIRE(ea.sources()[i].x == eb.sources()[i].x);
    REQUIRE(ea.sources()[i].y == eb.sources()[i].y);
  }
  ScenarioConfig c = small_config();
  c.seed = 43;
  Engine ec(c);
  bool any_differs = false;
  for (std::size_t i = 0; i < ec.sources().size(); ++i) {
    any_differs = any_differs || ea.sources()[i].x != ec.sources()[i].x;
  }
  CHECK(any_differs);
}

TEST_CASE("box chain splits the domain into equal cells") {
  Engine engine{ScenarioConfig{}};
  const auto& centers = engine.box_centers();
  REQUIRE(centers.size() == 20);
  CHECK(centers.front() == 250.0);
  CHECK(centers.back() == 9750.0);
  for (std::size_t b = 1; b < centers.size(); ++b) {
    CHECK(centers[b] - centers[b - 1] == 500.0);
  }
}

TEST_CASE("initial cooperating fraction is matched exactly") {
  ScenarioConfig cfg;
  cfg.initial_coop_fraction = 0.375;  // 30 of 80
  Engine engine(cfg);
  for (int s = 0; s < kNumSpecies; ++s) {
    int coop = 0;
    for (const AgentState& a : engine.agents()[s]) {
      if (a.last_choice == kChoiceReduce) ++coop;
      CHECK(a.p_reduce == 0.5);
      CHECK(a.q_increase == 0.5);
      REQUIRE(a.choice_history.size() == 1);
      CHECK(a.choice_history[0] == a.last_choice);
      CHECK(a.reward_history.empty());
    }
    CHECK(coop == 30);
  }
}

TEST_CASE("actuation maps decisions to the two-level emission rates") {
  ScenarioConfig cfg = small_config();
  Engine engine(cfg);
  auto check_rates = [&] {
    for (int s = 0; s < kNumSpecies; ++s) {
      for (const AgentState& a : engine.agents()[s]) {
        const EmissionSource& src = engine.sources()[a.source_id];
        const double expected = a.last_choice == kChoiceReduce
                                    ? cfg.reduced_rate_fraction * src.max_rate
                                    : src.max_rate;
        REQUIRE(src.current_rate == expected);
      }
    }
    for (const EmissionSource& s : engine.sources()) {
      if (!s.controlled) REQUIRE(s.current_rate == s.max_rate);
    }
  };
  check_rates();
  engine.set_forecasters({});
  for (int t = 0; t < 10; ++t) {
    engine.step();
    check_rates();
  }
}

TEST_CASE("without sources the field sits at the background") {
  ScenarioConfig cfg = small_config();
  cfg.controlled_per_species = 0;
  cfg.uncontrolled_per_species = 0;
  Engine engine(cfg);
  const RunResult r = engine.run();
  REQUIRE(r.records.size() == 48);
  for (const StepRecord& rec : r.records) {
    CHECK(rec.aggregate[0] == 13.0);
    CHECK(rec.aggregate[1] == 0.0);
    CHECK(rec.aggregate[2] == 0.0);
    CHECK(rec.aqi == 1);
    CHECK(rec.coop_fraction == PerSpecies<double>{0.0, 0.0, 0.0});
  }
}

TEST_CASE("reducing everywhere never exceeds emitting everywhere") {
  ScenarioConfig lo = small_config();
  lo.cooperation = false;
  lo.leaks = false;
  lo.initial_coop_fraction = 1.0;
  ScenarioConfig hi = lo;
  hi.initial_coop_fraction = 0.0;
  Engine el(lo), eh(hi);
  el.set_forecasters({});
  eh.set_forecasters({});
  const RunResult rl = el.run();
  const RunResult rh = eh.run();
  REQUIRE(rl.records.size() == rh.records.size());
  for (std::size_t t = 0; t < rl.records.size(); ++t) {
    // identical seeds give identical weather, so the comparison is paired
    REQUIRE(rl.weather[t].wind_speed == rh.weather[t].wind_speed);
    for (int s = 0; s < kNumSpecies; ++s) {
      REQUIRE(rl.records[t].aggregate[s] <= rh.records[t].aggregate[s]);
    }
  }
}

TEST_CASE("the constructed field equals a direct superposition") {
  ScenarioConfig cfg = small_config();
  cfg.initial_coop_fraction = 0.4;  // 2 of 5 per species reduced
  Engine engine(cfg);
  const ConcentrationField direct =
      superpose(engine.sources(), engine.box_centers(), engine.weather(),
                cfg.backgrounds());
  for (int s = 0; s < kNumSpecies; ++s) {
    REQUIRE(engine.field().boxes[s].size() == direct.boxes[s].size());
    for (std::size_t b = 0; b < direct.boxes[s].size(); ++b) {
      REQUIRE(relative_diff(engine.field().boxes[s][b], direct.boxes[s][b]) <
              1e-12);
    }
    REQUIRE(relative_diff(engine.field().aggregate[s], direct.aggregate[s]) <
            1e-12);
  }
}

TEST_CASE("aggregates are the arithmetic mean of the boxes") {
  Engine engine(small_config());
  for (int s = 0; s < kNumSpecies; ++s) {
    const auto& boxes = engine.field().boxes[s];
    const double mean =
        std::accumulate(boxes.begin(), boxes.end(), 0.0) / boxes.size();
    CHECK(engine.field().aggregate[s] == mean);
  }
}

TEST_CASE("records carry step, hours and non-negative levels") {
  ScenarioConfig cfg = small_config();
  Engine engine(cfg);
  const RunResult r = engine.run();
  REQUIRE(r.records.size() == 48);
  REQUIRE(r.weather.size() == 48);
  for (std::size_t t = 0; t < r.records.size(); ++t) {
    const StepRecord& rec = r.records[t];
    REQUIRE(rec.step == static_cast<long>(t));
    REQUIRE(rec.hours == rec.step * cfg.hours_per_step);
    for (int s = 0; s < kNumSpecies; ++s) {
      REQUIRE(rec.aggregate[s] >= 0.0);
      REQUIRE(rec.forecast[s] >= 0.0);
      REQUIRE(rec.coop_fraction[s] >= 0.0);
      REQUIRE(rec.coop_fraction[s] <= 1.0);
    }
    REQUIRE(rec.aqi >= 1);
    REQUIRE(rec.aqi <= 5);
  }
}

TEST_CASE("short runs fall back to the persistence forecast") {
  ScenarioConfig cfg = small_config();  // 47 open-loop pairs -> no training
  Engine engine(cfg);
  const RunResult r = engine.run();
  for (int s = 0; s < kNumSpecies; ++s) {
    CHECK_FALSE(engine.forecasters()[s].has_value());
  }
  for (const StepRecord& rec : r.records) {
    for (int s = 0; s < kNumSpecies; ++s) {
      CHECK(rec.forecast[s] == rec.aggregate[s]);
    }
  }
}

TEST_CASE("runs are reproducible bit for bit") {
  const ScenarioConfig cfg = small_config();
  Engine a(cfg), b(cfg);
  const RunResult ra = a.run();
  const RunResult rb = b.run();
  REQUIRE(ra.records.size() == rb.records.size());
  for (std::size_t t = 0; t < ra.records.size(); ++t) {
    REQUIRE(ra.records[t].aggregate == rb.records[t].aggregate);
    REQUIRE(ra.records[t].forecast == rb.records[t].forecast);
    REQUIRE(ra.records[t].coop_fraction == rb.records[t].coop_fraction);
    REQUIRE(ra.records[t].aqi == rb.records[t].aqi);
    REQUIRE(ra.weather[t].wind_speed == rb.weather[t].wind_speed);
    REQUIRE(ra.weather[t].rainfall == rb.weather[t].rainfall);
  }
  for (int s = 0; s < kNumSpecies; ++s) {
    REQUIRE(ra.summary[s].mean_aggregate == rb.summary[s].mean_aggregate);
    REQUIRE(ra.summary[s].max_aggregate == rb.summary[s].max_aggregate);
  }
}

TEST_CASE("frozen decisions keep the cooperating fraction constant") {
  ScenarioConfig cfg = small_config();
  cfg.cooperation = false;
  cfg.initial_coop_fraction = 0.4;  // exactly 2 of 5
  Engine engine(cfg);
  const RunResult r = engine.run();
  for (const StepRecord& rec : r.records) {
    for (int s = 0; s < kNumSpecies; ++s) {
      REQUIRE(rec.coop_fraction[s] == 0.4);
    }
  }
}

TEST_CASE("summaries aggregate the records") {
  ScenarioConfig cfg = small_config();
  Engine engine(cfg);
  const RunResult r = engine.run();
  const auto goals = cfg.goals();
  for (int s = 0; s < kNumSpecies; ++s) {
    double total = 0.0, mx = 0.0;
    long above = 0;
    for (const StepRecord& rec : r.records) {
      total += rec.aggregate[s];
      mx = std::max(mx, rec.aggregate[s]);
      if (rec.aggregate[s] > goals[s]) ++above;
    }
    CHECK(r.summary[s].mean_aggregate ==
          doctest::Approx(total / r.records.size()).epsilon(1e-15));
    CHECK(r.summary[s].max_aggregate == mx);
    CHECK(r.summary[s].frac_steps_above_goal ==
          doctest::Approx(static_cast<double>(above) / r.records.size())
              .epsilon(1e-15));
  }
}

TEST_CASE("agent tracing emits one row per agent per step") {
  ScenarioConfig cfg = small_config();
  Engine engine(cfg);
  engine.enable_trace(true);
  const RunResult r = engine.run();
  REQUIRE(r.trace.size() == 48u * 15u);
  for (const AgentTraceRow& row : r.trace) {
    REQUIRE(row.step >= 0);
    REQUIRE(row.step < 48);
    REQUIRE((row.decision == 0 || row.decision == 1));
    REQUIRE(row.p >= 0.0);
    REQUIRE(row.p <= 1.0);
    REQUIRE(row.q >= 0.0);
    REQUIRE(row.q <= 1.0);
  }
}

TEST_CASE("stepping past the configured horizon is an error") {
  ScenarioConfig cfg = small_config();
  Engine engine(cfg);
  const RunResult r = engine.run();
  REQUIRE(r.records.size() == 48);
  CHECK(engine.current_step() == 48);
  CHECK_THROWS_AS(engine.step(), std::logic_error);
}

TEST_CASE("a weather file drives the run verbatim") {
  std::ostringstream series;
  series << "wind_speed,temperature,humidity,rainfall\n";
  for (int i = 0; i < 48; ++i) {
    series << 1.5 + 0.05 * i << ",10,50,0\n";
  }
  TempFile f(series.str());
  ScenarioConfig cfg = small_config();
  cfg.weather_series_path = f.path.string();
  Engine engine(cfg);
  CHECK(engine.weather().wind_speed == 1.5);
  const RunResult r = engine.run();
  REQUIRE(r.weather.size() == 48);
  for (int t = 0; t < 48; ++t) {
    REQUIRE(r.weather[t].wind_speed == doctest::Approx(1.5 + 0.05 * t));
    REQUIRE(r.weather[t].temperature == 10.0);
  }
  // Stronger wind dilutes: compare the first and last step of a frozen run.
  ScenarioConfig frozen = cfg;
  frozen.cooperation = false;
  Engine ef(frozen);
  const RunResult rf = ef.run();
  CHECK(rf.records.back().aggregate[1] < rf.records.front().aggregate[1]);
}

TEST_CASE("a too-short weather file is rejected up front") {
  std::ostringstream series;
  series << "wind_speed,temperature,humidity,rainfall\n";
  for (int i = 0; i < 10; ++i) series << "2.0,10,50,0\n";
  TempFile f(series.str());
  ScenarioConfig cfg = small_config();  // needs 48 rows
  cfg.weather_series_path = f.path.string();
  CHECK_THROWS_WITH_AS(Engine{cfg}, doctest::Contains("need 48"),
                       std::invalid_argument);
}

TEST_CASE("open-loop training pairs chain consecutive aggregates") {
  const ScenarioConfig cfg = small_config();
  const auto pairs = Engine::generate_training_pairs(cfg);
  for (int s = 0; s < kNumSpecies; ++s) {
    REQUIRE(pairs[s].size() == 47);
    for (std::size_t t = 0; t + 1 < pairs[s].size(); ++t) {
      REQUIRE(pairs[s][t].second == pairs[s][t + 1].first.aggregate);
    }
    for (const auto& [in, target] : pairs[s]) {
      REQUIRE(in.aggregate >= 0.0);
      REQUIRE(target >= 0.0);
      REQUIRE(in.wind_speed >= kWindFloor);
    }
  }
  // Regenerating gives the same dataset (derived datagen seed).
  const auto again = Engine::generate_training_pairs(cfg);
  for (int s = 0; s < kNumSpecies; ++s) {
    REQUIRE(again[s].size() == pairs[s].size());
    for (std::size_t t = 0; t < pairs[s].size(); ++t) {
      REQUIRE(again[s][t].second == pairs[s][t].second);
      REQUIRE(again[s][t].first.aggregate == pairs[s][t].first.aggregate);
    }
  }
}

TEST_CASE("cooperation with clean air converges toward full reduction") {
  // With no leaks the penalty never fires at these scales, so cooperation
  // is reinforced until the reducing fraction saturates.
  ScenarioConfig cfg = small_config();
  cfg.controlled_per_species = 20;
  cfg.leaks = false;
  cfg.total_hours = 400;  // 200 steps
  Engine engine(cfg);
  const RunResult r = engine.run();
  for (int s = 0; s < kNumSpecies; ++s) {
    CHECK(r.records.back().coop_fraction[s] > 0.9);
  }
}
