#include "ratekit/config.hpp"

#include <fstream>

#include "ratekit/error.hpp"

namespace ratekit {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) field_error(field, "expected a number");
  return j.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& prefix = "") {
  return obj.contains(key) ? number(obj.at(key), prefix + key) : fallback;
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) field_error(field, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, field));
  return out;
}

MatrixXd matrix(const json& j, const std::string& field) {
  // A bare number is a 1×1 matrix; a flat array is a column vector.
  if (j.is_number()) return MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) field_error(field, "expected a matrix (array of rows)");
  if (!j.front().is_array()) {
    std::vector<double> v = number_list(j, field);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  const std::size_t cols = j.front().size();
  MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) field_error(field, "rows have unequal length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], field);
    }
  }
  return m;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<double> rates_from_json(const json& j) {
  if (j.is_object()) {
    const double from = number(j.value("from", json()), "rates_ms.from");
    const double to = number(j.value("to", json()), "rates_ms.to");
    const double step = number(j.value("step", json()), "rates_ms.step");
    if (!(step > 0.0) || to < from) field_error("rates_ms", "need from <= to and step > 0");
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
      const double v = from + step * static_cast<double>(i);
      if (v > to * (1.0 + 1e-12)) break;
      out.push_back(v);
    }
    return out;
  }
  return number_list(j, "rates_ms");
}

Algorithm algo_field(const json& j, const std::string& field) {
  if (!j.is_string()) field_error(field, "expected an algorithm name");
  try {
    return parse_algorithm(j.get<std::string>());
  } catch (const ConfigError& e) {
    field_error(field, e.what());
  }
}

}  // namespace

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

PlantModel plant_from_json(const json& j) {
  if (!j.is_object()) field_error("plant", "expected an object");
  for (const char* key : {"A", "B", "C"}) {
    if (!j.contains(key)) field_error(std::string("plant.") + key, "missing");
  }
  MatrixXd A = matrix(j.at("A"), "plant.A");
  MatrixXd B = matrix(j.at("B"), "plant.B");
  MatrixXd C = matrix(j.at("C"), "plant.C");
  MatrixXd D = j.contains("D") ? matrix(j.at("D"), "plant.D") : MatrixXd::Zero(C.rows(), B.cols());
  MatrixXd Rc = j.contains("Rc") ? matrix(j.at("Rc"), "plant.Rc") : MatrixXd(B * B.transpose());
  MatrixXd R2 = j.contains("R2") ? matrix(j.at("R2"), "plant.R2") : MatrixXd::Identity(C.rows(), C.rows());
  MatrixXd Qxu = j.contains("Qxu") ? matrix(j.at("Qxu"), "plant.Qxu")
                                   : MatrixXd::Identity(A.rows() + B.cols(), A.rows() + B.cols());
  try {
    return PlantModel(A, B, C, D, Rc, R2, Qxu);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config field 'plant': ") + e.what());
  }
}

PlantModel load_plant(const fs::path& path) {
  std::ifstream probe(path);
  if (!probe) throw ConfigError("plant file not found: " + path.string());
  return plant_from_json(read_json_file(path));
}

NoiseScenario scenario_from_json(const json& j) {
  if (!j.is_object()) field_error("scenario", "expected an object");
  const auto segments = [](const json& arr, const std::string& field) {
    if (!arr.is_array() || arr.empty()) field_error(field, "expected a non-empty array");
    std::vector<NoiseSegment> out;
    for (const auto& s : arr) {
      if (!s.is_object() || !s.contains("duration_s") || !s.contains("r")) {
        field_error(field, "each segment needs duration_s and r");
      }
      out.push_back({number(s.at("duration_s"), field + ".duration_s"),
                     number(s.at("r"), field + ".r")});
    }
    return out;
  };
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  NoiseScenario sc;
  if (j.contains("cycle")) {
    const double repeat = number_or(j, "repeat", 1.0, "scenario.");
    if (repeat < 1.0 || repeat != static_cast<double>(static_cast<std::size_t>(repeat))) {
      field_error("scenario.repeat", "expected a positive integer");
    }
    sc = NoiseScenario::repeated(segments(j.at("cycle"), "scenario.cycle"),
                                 static_cast<std::size_t>(repeat), seed);
  } else if (j.contains("segments")) {
    sc.segments = segments(j.at("segments"), "scenario.segments");
    sc.seed = seed;
  } else {
    field_error("scenario", "needs 'cycle' or 'segments'");
  }
  try {
    sc.validate();
  } catch (const std::exception& e) {
    field_error("scenario", e.what());
  }
  return sc;
}

NoiseScenario load_scenario(const fs::path& path) { return scenario_from_json(read_json_file(path)); }

ToolConfig load_tool_config(const fs::path& path) {
  const json j = read_json_file(path);
  if (!j.is_object()) field_error("<root>", "expected an object");
  const fs::path base = path.parent_path();

  if (!j.contains("plant")) field_error("plant", "missing");
  PlantModel plant = j.at("plant").is_string()
                         ? load_plant(resolve(base, j.at("plant").get<std::string>()))
                         : plant_from_json(j.at("plant"));

  if (!j.contains("rates_ms")) field_error("rates_ms", "missing");
  std::optional<RateSet> rates;
  try {
    rates.emplace(rates_from_json(j.at("rates_ms")));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    field_error("rates_ms", e.what());
  }

  if (!j.contains("levels") || !j.at("levels").is_object()) field_error("levels", "missing");
  const json& lv = j.at("levels");
  if (!lv.contains("thresholds")) field_error("levels.thresholds", "missing");
  std::vector<double> th = number_list(lv.at("thresholds"), "levels.thresholds");
  std::optional<LevelSpec> levels;
  try {
    if (lv.contains("representative_r")) {
      levels.emplace(th, number_list(lv.at("representative_r"), "levels.representative_r"));
    } else {
      levels.emplace(LevelSpec::with_midpoints(th));
    }
  } catch (const ConfigError& e) {
    field_error("levels", e.what());
  }

  ToolConfig cfg{path, std::move(plant), *rates, *levels, 100.0, 100.0, {}, {}, {}, 1, {}, 0.05, {}};
  cfg.peak_power_mw = number_or(j, "peak_power_mw", cfg.peak_power_mw);
  if (!(cfg.peak_power_mw > 0.0)) field_error("peak_power_mw", "must be positive");
  cfg.hyper_period_s = number_or(j, "hyper_period_s", cfg.hyper_period_s);
  if (!(cfg.hyper_period_s > 0.0)) field_error("hyper_period_s", "must be positive");

  if (j.contains("pattern")) {
    std::vector<double> p = number_list(j.at("pattern"), "pattern");
    if (p.size() != cfg.levels.size()) field_error("pattern", "needs one share per level");
    try {
      DisturbancePattern check(p);
    } catch (const std::exception& e) {
      field_error("pattern", e.what());
    }
    cfg.pattern = p;
  }

  if (j.contains("budget")) {
    const json& b = j.at("budget");
    if (!b.is_object()) field_error("budget", "expected an object");
    const std::string mode = b.value("mode", std::string("fixed"));
    if (mode == "fixed") {
      cfg.budget = BudgetPolicy::fixed(number(b.value("energy_j", json()), "budget.energy_j"));
      if (!(cfg.budget.energy_j >= 0.0)) field_error("budget.energy_j", "must be non-negative");
    } else if (mode == "match_reference") {
      cfg.budget = BudgetPolicy::match_reference(
          number(b.value("reference_period_ms", json()), "budget.reference_period_ms"));
      if (cfg.rates.find_seconds(cfg.budget.reference_period_ms / 1000.0) < 0) {
        field_error("budget.reference_period_ms", "not in rates_ms");
      }
    } else {
      field_error("budget.mode", "expected 'fixed' or 'match_reference'");
    }
    if (b.contains("window_s") &&
        std::abs(number(b.at("window_s"), "budget.window_s") - cfg.hyper_period_s) >
            1e-9 * cfg.hyper_period_s) {
      field_error("budget.window_s", "must equal hyper_period_s");
    }
  } else {
    cfg.budget = BudgetPolicy::match_reference(cfg.rates.ms(cfg.rates.size() / 2));
  }

  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    cfg.scenario = s.is_string() ? load_scenario(resolve(base, s.get<std::string>()))
                                 : scenario_from_json(s);
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) field_error("seed", "expected a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }

  if (j.contains("strategy")) {
    const json& s = j.at("strategy");
    if (!s.is_object()) field_error("strategy", "expected an object");
    const std::string kind = s.value("kind", std::string("adaptive"));
    if (kind == "fixed") {
      cfg.strategy = Strategy::fixed(number(s.value("period_ms", json()), "strategy.period_ms"));
      if (cfg.rates.find_seconds(cfg.strategy.fixed_period_ms / 1000.0) < 0) {
        field_error("strategy.period_ms", "not in rates_ms");
      }
    } else if (kind == "adaptive") {
      cfg.strategy = Strategy::adaptive(
          s.contains("algo") ? algo_field(s.at("algo"), "strategy.algo") : Algorithm::kApproach1);
    } else {
      field_error("strategy.kind", "expected 'fixed' or 'adaptive'");
    }
  }

  cfg.rve_lambda = number_or(j, "rve_lambda", cfg.rve_lambda);
  if (!(cfg.rve_lambda > 0.0 && cfg.rve_lambda <= 1.0)) field_error("rve_lambda", "must be in (0, 1]");

  if (j.contains("battery")) {
    const json& b = j.at("battery");
    cfg.sim.battery_capacity_mah = number_or(b, "capacity_mah", cfg.sim.battery_capacity_mah, "battery.");
    cfg.sim.battery_voltage_v = number_or(b, "voltage_v", cfg.sim.battery_voltage_v, "battery.");
    if (!(cfg.sim.battery_capacity_mah > 0.0 && cfg.sim.battery_voltage_v > 0.0)) {
      field_error("battery", "capacity_mah and voltage_v must be positive");
    }
  }
  if (j.contains("trace_every")) {
    const double every = number(j.at("trace_every"), "trace_every");
    if (every < 1.0) field_error("trace_every", "must be >= 1");
    cfg.sim.trace_every = static_cast<std::size_t>(every);
  }
  return cfg;
}

std::vector<BenchCase> load_bench_cases(const fs::path& path) {
  const json j = read_json_file(path);
  const json& arr = j.is_object() && j.contains("cases") ? j.at("cases") : j;
  if (!arr.is_array() || arr.empty()) field_error("cases", "expected a non-empty array");

  const json defaults = j.is_object() ? j.value("defaults", json::object()) : json::object();
  std::vector<BenchCase> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    json c = defaults;
    c.update(arr[i]);
    const std::string f = "cases[" + std::to_string(i) + "].";
    BenchCase bc;
    const auto count = [&](const char* key, std::size_t fallback) {
      if (!c.contains(key)) return fallback;
      if (!c.at(key).is_number_unsigned() || c.at(key).get<std::size_t>() < 1) {
        field_error(f + key, "expected a positive integer");
      }
      return c.at(key).get<std::size_t>();
    };
    bc.n = count("n", bc.n);
    bc.k = count("k", bc.k);
    bc.repetitions = count("repetitions", bc.repetitions);
    if (c.contains("seed")) bc.seed = c.at("seed").get<std::uint64_t>();
    const std::string source = c.value("source", std::string("synthetic"));
    if (source == "synthetic") {
      bc.source = BenchCase::Source::kSynthetic;
    } else if (source == "plant") {
      bc.source = BenchCase::Source::kPlant;
    } else {
      field_error(f + "source", "expected 'synthetic' or 'plant'");
    }
    const std::string shape = c.value("shape", std::string("affine"));
    if (shape == "affine") {
      bc.shape = BenchCase::Shape::kAffine;
    } else if (shape == "power") {
      bc.shape = BenchCase::Shape::kPower;
    } else {
      field_error(f + "shape", "expected 'affine' or 'power'");
    }
    bc.exponent = number_or(c, "exponent", bc.exponent, f);
    bc.budget_fraction = number_or(c, "budget_fraction", bc.budget_fraction, f);
    bc.window_s = number_or(c, "window_s", bc.window_s, f);
    if (c.contains("pattern")) bc.pattern = number_list(c.at("pattern"), f + "pattern");
    if (c.contains("representative_r")) {
      bc.representative_r = number_list(c.at("representative_r"), f + "representative_r");
    }
    if (!c.contains("pattern") && bc.k != 3) bc.pattern.assign(bc.k, 1.0 / static_cast<double>(bc.k));
    if (!c.contains("representative_r") && bc.k != 3) {
      bc.representative_r.clear();
      for (std::size_t l = 0; l < bc.k; ++l) bc.representative_r.push_back(5.0 + 10.0 * static_cast<double>(l));
    }
    try {
      bc.validate();
    } catch (const ConfigError& e) {
      field_error(f.substr(0, f.size() - 1), e.what());
    }
    out.push_back(bc);
  }
  return out;
}

}  // namespace ratekit
