#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "ratekit/bench.hpp"
#include "ratekit/plant_model.hpp"
#include "ratekit/regulator_sim.hpp"

namespace ratekit {

namespace fs = std::filesystem;

/// Plant from {"A": [[...]], "B": ..., "C": ..., "D": ..., "Rc": ..., "R2": ..., "Qxu": ...}.
/// D defaults to zeros, Rc to B·Bᵀ and Qxu to the identity.
PlantModel plant_from_json(const nlohmann::json& j);
PlantModel load_plant(const fs::path& path);

NoiseScenario scenario_from_json(const nlohmann::json& j);
NoiseScenario load_scenario(const fs::path& path);

struct ToolConfig {
  fs::path source;
  PlantModel plant;
  RateSet rates;
  LevelSpec levels;
  double peak_power_mw = 100.0;
  double hyper_period_s = 100.0;
  std::optional<std::vector<double>> pattern;
  BudgetPolicy budget;
  std::optional<NoiseScenario> scenario;
  std::uint64_t seed = 1;
  Strategy strategy;
  double rve_lambda = 0.05;
  SimOptions sim;
};

/// Relative paths inside the file resolve against its directory.
ToolConfig load_tool_config(const fs::path& path);

std::vector<BenchCase> load_bench_cases(const fs::path& path);

/// Reads a whole JSON file; ConfigError names the path on failure.
nlohmann::json read_json_file(const fs::path& path);

}  // namespace ratekit
