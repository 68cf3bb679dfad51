#include "ratekit/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ratekit/bench.hpp"
#include "ratekit/config.hpp"
#include "ratekit/energy.hpp"
#include "ratekit/error.hpp"
#include "ratekit/regulator_sim.hpp"

namespace ratekit {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(ss.str());
  return hex.str();
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_double(item));
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

double parse_with_unit(std::string text, const std::string& unit, const std::string& what) {
  if (text.size() > unit.size() &&
      text.compare(text.size() - unit.size(), unit.size(), unit) == 0) {
    text.resize(text.size() - unit.size());
  }
  try {
    const double v = parse_double(text);
    if (!(v > 0.0)) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected a positive number, got '" + text + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

json choice_ms(const RateSet& rates, const MultiRateController& m) {
  json arr = json::array();
  for (std::size_t c : m.choice) arr.push_back(rates.ms(c));
  return arr;
}

json result_json(const SynthesisResult& r, const RateSet& rates, Algorithm algo, bool timing) {
  json j = {{"algo", algorithm_name(algo)},
            {"feasible", r.feasible},
            {"choice_ms", choice_ms(rates, r.controller)},
            {"choice_index", r.controller.choice},
            {"predicted_cost", r.predicted_cost},
            {"predicted_energy_j", r.predicted_energy},
            {"explored", r.explored},
            {"warnings", r.warnings}};
  if (timing) j["elapsed_s"] = r.elapsed_s;
  return j;
}

struct Tables {
  RateSet rates;
  CostTable costs;
  PowerTable power;
};

Tables load_tables(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("tables directory not found: " + dir.string());
  auto [rates, power] = read_power_table(dir / "pt.csv");
  CostTable costs = read_cost_table(dir / "ct.csv", rates);
  return {rates, std::move(costs), power};
}

// ---------------------------------------------------------------------------

void cmd_precompute(const fs::path& config_path, const fs::path& out_dir,
                    const std::string& pattern_text, std::ostream& out) {
  const ToolConfig cfg = load_tool_config(config_path);
  const std::vector<double> pattern = pattern_text.empty()
                                          ? cfg.pattern.value_or(std::vector<double>{})
                                          : parse_list(pattern_text, "--pattern");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create " + out_dir.string() + ": " + ec.message());

  const CostTable ct = build_cost_table(cfg.plant, cfg.rates, cfg.levels);
  const PowerTable pt = build_power_table(cfg.rates, cfg.peak_power_mw);
  write_cost_table(out_dir / "ct.csv", ct);
  write_power_table(out_dir / "pt.csv", cfg.rates, pt);

  std::size_t profit_files = 0;
  if (!pattern.empty()) {
    if (pattern.size() != cfg.levels.size()) throw ConfigError("--pattern: needs one share per level");
    const WindowTotals totals =
        totals_over_window(ct, pt, DisturbancePattern(pattern), cfg.hyper_period_s);
    const ProfitTables profit = build_profit_tables(totals);
    for (std::size_t j = 0; j < profit.levels.size(); ++j) {
      write_profit_table(out_dir / ("profit_l" + std::to_string(j + 1) + ".csv"), cfg.rates,
                         profit.levels[j]);
      ++profit_files;
    }
  }

  // Inline plants are covered by the config hash.
  std::string plant_hash = file_hash(config_path);
  const json raw = read_json_file(config_path);
  if (raw.at("plant").is_string()) {
    plant_hash = file_hash(config_path.parent_path() / raw.at("plant").get<std::string>());
  }
  const auto now = std::chrono::system_clock::now();
  const json meta = {
      {"generator", version_string()},
      {"built_at_unix_s", std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()},
      {"config", config_path.string()},
      {"config_hash", file_hash(config_path)},
      {"plant_hash", plant_hash},
      {"rates_ms", cfg.rates.periods_ms()},
      {"levels", {{"thresholds", cfg.levels.thresholds()},
                  {"representative_r", cfg.levels.representative_r()}}},
      {"peak_power_mw", cfg.peak_power_mw},
      {"hyper_period_s", cfg.hyper_period_s},
      {"pattern", pattern.empty() ? json() : json(pattern)},
      {"monotonicity_violations", ct.monotonicity_violations.size()}};
  write_text(out_dir / "meta.json", meta.dump(2) + "\n");

  out << "wrote " << ct.periods() << "x" << ct.levels() << " cost table, power table and "
      << profit_files << " profit tables to " << out_dir.string() << "\n";
  if (!ct.monotonicity_violations.empty()) {
    out << "warning: " << ct.monotonicity_violations.size()
        << " cost entries decrease with the period\n";
  }
}

int cmd_synthesize(const fs::path& dir, const std::string& pattern_text, double energy,
                   double window, const std::string& algo_name, bool strict, bool timing,
                   std::ostream& out) {
  const Tables t = load_tables(dir);
  const Algorithm algo = parse_algorithm(algo_name);
  const std::vector<double> shares = parse_list(pattern_text, "--pattern");
  if (shares.size() != t.costs.levels()) {
    throw ConfigError("--pattern: tables have " + std::to_string(t.costs.levels()) + " levels");
  }
  const WindowTotals totals =
      totals_over_window(t.costs, t.power, DisturbancePattern(shares), window);
  const SynthesisResult r = synthesize(algo, totals, EnergyBudget(energy, window));
  out << result_json(r, t.rates, algo, timing).dump(2) << "\n";
  return (strict && !r.feasible) ? 2 : 0;
}

void cmd_simulate(const fs::path& config_path, std::optional<std::uint64_t> seed,
                  const fs::path& trace_path, const std::string& plot_path,
                  const std::string& strategy_text, std::ostream& out) {
  ToolConfig cfg = load_tool_config(config_path);
  if (!cfg.scenario) throw ConfigError("config field 'scenario': missing");
  NoiseScenario scenario = *cfg.scenario;
  scenario.seed = seed.value_or(cfg.seed);
  if (!strategy_text.empty()) {
    const auto colon = strategy_text.find(':');
    const std::string kind = strategy_text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : strategy_text.substr(colon + 1);
    if (kind == "fixed") {
      cfg.strategy = Strategy::fixed(parse_with_unit(arg, "ms", "--strategy"));
      if (cfg.rates.find_seconds(cfg.strategy.fixed_period_ms / 1000.0) < 0) {
        throw ConfigError("--strategy: period not in the rate set");
      }
    } else if (kind == "adaptive") {
      cfg.strategy = Strategy::adaptive(arg.empty() ? Algorithm::kApproach1 : parse_algorithm(arg));
    } else {
      throw ConfigError("--strategy: expected fixed:<ms> or adaptive:<algo>");
    }
  }

  const SimModel model =
      SimModel::build(cfg.plant, cfg.rates, cfg.levels, cfg.peak_power_mw, cfg.hyper_period_s);
  SimOptions opts = cfg.sim;
  opts.record_events = true;
  const SimulationTrace tr =
      simulate(model, scenario, cfg.budget, cfg.strategy, cfg.rve_lambda, opts);

  std::ofstream trace(trace_path, std::ios::binary);
  if (!trace) throw ConfigError("cannot write " + trace_path.string());
  for (const auto& line : tr.events) trace << line << '\n';

  if (!plot_path.empty()) {
    std::ostringstream csv;
    csv << "t_s,average_cost,energy_j,battery_j\n";
    for (const auto& p : tr.plot) {
      csv << format_double(p.t_s) << ',' << format_double(p.average_cost) << ','
          << format_double(p.energy_j) << ',' << format_double(p.battery_j) << '\n';
    }
    write_text(plot_path, csv.str());
  }

  const json summary = {{"strategy", cfg.strategy.describe()},
                        {"seed", scenario.seed},
                        {"duration_s", tr.duration_s},
                        {"samples", tr.samples},
                        {"energy_j", tr.energy_j},
                        {"average_power_mw", tr.average_power_mw()},
                        {"average_cost", tr.average_cost()},
                        {"windows", tr.windows.size()},
                        {"fallback_windows", tr.fallback_windows}};
  out << summary.dump() << "\n";
}

void cmd_bench(const fs::path& cases_path, const fs::path& out_path, bool parallel,
               double cap, const std::string& plant_path, std::ostream& out) {
  const std::vector<BenchCase> cases = load_bench_cases(cases_path);
  std::optional<PlantModel> plant;
  for (const auto& c : cases) {
    if (c.source == BenchCase::Source::kPlant && !plant) {
      if (plant_path.empty()) throw ConfigError("bench: plant-sourced cases need --plant");
      plant.emplace(load_plant(plant_path));
    }
  }
  BenchOptions opt;
  opt.parallel = parallel;
  opt.enumeration_cap = static_cast<std::uint64_t>(cap);
  opt.plant = plant ? &*plant : nullptr;
  const BenchReport report = run_bench(cases, opt);
  std::ofstream csv(out_path, std::ios::binary);
  if (!csv) throw ConfigError("cannot write " + out_path.string());
  write_bench_csv(csv, report);
  out << format_bench_table(report);
}

void cmd_battery(const fs::path& dir, const fs::path& pattern_path, const std::string& capacity,
                 const std::string& voltage, const std::string& out_path, std::ostream& out) {
  const Tables t = load_tables(dir);
  const json doc = read_json_file(pattern_path);
  if (!doc.contains("pattern")) throw ConfigError("config field 'pattern': missing in " + pattern_path.string());
  std::vector<double> shares;
  for (const auto& v : doc.at("pattern")) shares.push_back(v.get<double>());
  if (shares.size() != t.costs.levels()) throw ConfigError("config field 'pattern': level count mismatch");
  const DisturbancePattern pattern(shares);
  const double window = doc.value("window_s", 100.0);
  const double reference_ms = doc.value("reference_period_ms", 50.0);
  const int ref = t.rates.find_seconds(reference_ms / 1000.0);
  if (ref < 0) throw ConfigError("config field 'reference_period_ms': not in the tables");
  const Algorithm algo = parse_algorithm(doc.value("algo", std::string("approach1")));
  BudgetPolicy policy = BudgetPolicy::match_reference(reference_ms);
  if (doc.contains("budget_energy_j")) policy = BudgetPolicy::fixed(doc.at("budget_energy_j").get<double>());

  const Battery battery = Battery::full(parse_with_unit(capacity, "mAh", "--capacity"),
                                        parse_with_unit(voltage, "V", "--voltage"));

  const WindowTotals totals = totals_over_window(t.costs, t.power, pattern, window);
  const MultiRateController fixed{std::vector<std::size_t>(shares.size(), static_cast<std::size_t>(ref))};
  const CostEnergy fixed_ce = candidate_cost_energy(fixed, totals);
  const WindowPlan plan = plan_window(t.costs, t.power, window, pattern, policy, algo);
  const CostEnergy adaptive_ce = candidate_cost_energy(plan.controller, totals);

  struct Row {
    std::string name;
    double power_mw;
    double cost;
  };
  const std::vector<Row> rows{
      {"fixed_" + format_double(reference_ms) + "ms", 1000.0 * fixed_ce.energy / window, fixed_ce.cost},
      {"multirate_" + std::string(algorithm_name(algo)), 1000.0 * adaptive_ce.energy / window,
       adaptive_ce.cost}};

  double horizon = doc.value("horizon_s", 0.0);
  if (!(horizon > 0.0)) {
    for (const auto& r : rows) horizon = std::max(horizon, battery.capacity_j() / (r.power_mw / 1000.0));
  }
  std::ostringstream csv;
  csv << "strategy,avg_power_mw,time_s,level_j\n";
  std::vector<DischargeTrace> traces;
  for (const auto& r : rows) {
    traces.push_back(battery_discharge(battery, r.power_mw, horizon));
    const auto& d = traces.back();
    for (std::size_t i = 0; i < d.time_s.size(); ++i) {
      csv << r.name << ',' << format_double(r.power_mw) << ',' << format_double(d.time_s[i]) << ','
          << format_double(d.level_j[i]) << '\n';
    }
  }
  if (out_path.empty()) {
    out << csv.str();
    return;
  }
  write_text(out_path, csv.str());
  const double saving = 100.0 * (1.0 - rows[1].power_mw / rows[0].power_mw);
  const double extension = 100.0 * (traces[1].depletion_s / traces[0].depletion_s - 1.0);
  out << std::fixed << std::setprecision(3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i].name << ": " << rows[i].power_mw << " mW, cost " << rows[i].cost
        << ", battery empty after " << traces[i].depletion_s / 86400.0 << " days\n";
  }
  out << "power saving " << saving << " %, battery life extended " << extension << " %\n";
}

}  // namespace

std::string version_string() {
  std::string v = std::string("ratekit ") + RATEKIT_VERSION;
#if defined(__clang__)
  v += " (clang " __clang_version__ ")";
#elif defined(__GNUC__)
  v += " (gcc " __VERSION__ ")";
#endif
#ifdef NDEBUG
  v += " release";
#else
  v += " debug";
#endif
  return v;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-rate LQG controller synthesis under an energy budget", "ratekit"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print build information");

  std::string config, out_dir, pattern, tables, algo = "approach1", trace_out, plot_out,
      strategy, cases, report, plant, capacity = "1000mAh", voltage = "3.7", battery_out,
      precompute_pattern;
  double energy = 0.0, window = 100.0, cap = 5e7;
  bool strict = false, timing = false, parallel = false;
  std::optional<std::uint64_t> seed;

  auto* pre = app.add_subcommand("precompute", "Build cost, power and profit tables");
  pre->add_option("--config", config, "Tool config (JSON)")->required();
  pre->add_option("--out", out_dir, "Output directory")->required();
  pre->add_option("--pattern", precompute_pattern, "Level shares for the profit tables, e.g. 0.7,0.1,0.2");

  auto* syn = app.add_subcommand("synthesize", "Choose a multi-rate controller for one window");
  syn->add_option("--tables", tables, "Directory written by precompute")->required();
  syn->add_option("--pattern", pattern, "Level shares, e.g. 0.7,0.1,0.2")->required();
  syn->add_option("--budget-energy", energy, "Energy budget (J)")->required();
  syn->add_option("--budget-window", window, "Window length (s)")->required();
  syn->add_option("--algo", algo, "exhaustive | approach1 | approach2");
  syn->add_flag("--strict", strict, "Exit 2 when no controller fits the budget");
  syn->add_flag("--timing", timing, "Include wall time in the output");

  auto* sim = app.add_subcommand("simulate", "Run the on-line regulator");
  sim->add_option("--config", config, "Tool config (JSON)")->required();
  sim->add_option("--seed", seed, "Noise seed (overrides the config)");
  sim->add_option("--out", trace_out, "JSONL event trace")->required();
  sim->add_option("--emit-plotdata", plot_out, "CSV of time, cost and battery level");
  sim->add_option("--strategy", strategy, "fixed:<ms> or adaptive:<algo>");

  auto* ben = app.add_subcommand("bench", "Compare the synthesis algorithms");
  ben->add_option("--cases", cases, "Bench cases (JSON)")->required();
  ben->add_option("--out", report, "CSV report")->required();
  ben->add_option("--plant", plant, "Plant file for plant-sourced cases");
  ben->add_option("--cap", cap, "Skip exhaustive and approach1 above this many candidates");
  ben->add_flag("--parallel", parallel, "Run cases concurrently");

  auto* bat = app.add_subcommand("battery", "Battery discharge of fixed and multi-rate strategies");
  bat->add_option("--tables", tables, "Directory written by precompute")->required();
  bat->add_option("--pattern", pattern, "Pattern file (JSON with 'pattern')")->required();
  bat->add_option("--capacity", capacity, "Capacity, e.g. 1000mAh");
  bat->add_option("--voltage", voltage, "Voltage, e.g. 3.7");
  bat->add_option("--out", battery_out, "CSV output (default stdout)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  if (show_version) {
    out << version_string() << "\n";
    return 0;
  }
  try {
    if (*pre) {
      cmd_precompute(config, out_dir, precompute_pattern, out);
    } else if (*syn) {
      return cmd_synthesize(tables, pattern, energy, window, algo, strict, timing, out);
    } else if (*sim) {
      cmd_simulate(config, seed, trace_out, plot_out, strategy, out);
    } else if (*ben) {
      cmd_bench(cases, report, parallel, cap, plant, out);
    } else if (*bat) {
      cmd_battery(tables, pattern, capacity, voltage, battery_out, out);
    } else {
      err << app.help();
      return 1;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ratekit
