#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ratekit/cost_tables.hpp"
#include "ratekit/energy.hpp"
#include "ratekit/lqg.hpp"
#include "ratekit/synthesis.hpp"

namespace ratekit {

struct NoiseSegment {
  double duration_s = 0.0;
  double r = 0.0;
};

/// True process-noise intensity as a piecewise-constant schedule.
struct NoiseScenario {
  std::vector<NoiseSegment> segments;
  std::uint64_t seed = 0;

  /// `cycle` repeated `repeat` times.
  static NoiseScenario repeated(const std::vector<NoiseSegment>& cycle, std::size_t repeat,
                                std::uint64_t seed);
  double duration_s() const;
  void validate() const;
};

/// Exponentially weighted residual-variance estimate of the noise intensity.
struct RveState {
  double r_hat = 0.0;
  double lambda = 0.05;
  double sigma_nom_sq = 1.0;  // innovation variance at r = 1 for the active rate
};

/// r̂ ← (1−λ)·r̂ + λ·ε²/σ²_nom
RveState rve_update(const RveState& state, double innovation);

/// Same update with an already normalized squared innovation.
RveState rve_update_normalized(const RveState& state, double normalized_sq);

/// 0-based level of r̂. Intervals are right-closed; r̂ ≤ first boundary maps
/// to the first level and r̂ above the last boundary to the last level.
std::size_t classify(double r_hat, const LevelSpec& levels);

/// Time spent at each level over the current hyper-period.
class HistoryWindow {
 public:
  HistoryWindow(double duration_s, std::size_t levels);

  void add(std::size_t level, double dt) { level_time_.at(level) += dt; }
  double elapsed() const;
  const std::vector<double>& level_time() const { return level_time_; }
  DisturbancePattern normalize() const { return DisturbancePattern::from_times(level_time_); }
  void reset() { std::fill(level_time_.begin(), level_time_.end(), 0.0); }
  double duration_s() const { return duration_; }

 private:
  double duration_;
  std::vector<double> level_time_;
};

struct Strategy {
  enum class Kind { kFixed, kAdaptive };
  Kind kind = Kind::kAdaptive;
  double fixed_period_ms = 0.0;
  Algorithm algo = Algorithm::kApproach1;

  static Strategy fixed(double period_ms) { return {Kind::kFixed, period_ms, Algorithm::kApproach1}; }
  static Strategy adaptive(Algorithm a) { return {Kind::kAdaptive, 0.0, a}; }
  std::string describe() const;
};

/// How the per-window energy budget is chosen.
///   kFixed:          `energy_j` every window.
///   kMatchReference: the smallest budget whose synthesized controller is
///                    predicted to do no worse than running the reference
///                    period for the whole window.
struct BudgetPolicy {
  enum class Mode { kFixed, kMatchReference };
  Mode mode = Mode::kFixed;
  double energy_j = 0.0;
  double reference_period_ms = 0.0;

  static BudgetPolicy fixed(double e) { return {Mode::kFixed, e, 0.0}; }
  static BudgetPolicy match_reference(double ms) { return {Mode::kMatchReference, 0.0, ms}; }
};

/// Per-rate closed-loop data shared by all simulations of one plant.
struct RateData {
  LqgController lqg;
  MatrixXd process_sqrt;      // L with L Lᵀ = R1d(h)
  MatrixXd innovation_inv;    // (C P Cᵀ + R2)⁻¹ at r = 1
  double sigma_nom_sq = 1.0;  // innovation variance at r = 1 (single output)
};

/// Immutable inputs of the on-line loop.
struct SimModel {
  PlantModel plant;
  RateSet rates;
  LevelSpec levels;
  CostTable costs;
  PowerTable power;
  double hyper_period_s = 100.0;
  std::vector<RateData> per_rate;

  static SimModel build(const PlantModel& plant, const RateSet& rates, const LevelSpec& levels,
                        double peak_power_mw, double hyper_period_s);
};

struct WindowPlan {
  MultiRateController controller;
  SynthesisResult result;
  double budget_j = 0.0;
  bool fallback = false;  // synthesis infeasible, all-longest deployed
};

/// Synthesis step at a window boundary. Levels with zero share are removed
/// from the search and assigned the longest period.
WindowPlan plan_window(const CostTable& costs, const PowerTable& power, double hyper_period_s,
                       const DisturbancePattern& pattern, const BudgetPolicy& policy,
                       Algorithm algo);
WindowPlan plan_window(const SimModel& model, const DisturbancePattern& pattern,
                       const BudgetPolicy& policy, Algorithm algo);

struct WindowRecord {
  std::size_t index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<double> observed_pattern;  // normalized level times at close
  MultiRateController deployed;          // controller active during this window
  std::optional<WindowPlan> plan;        // plan made at this window's close
  double energy_j = 0.0;
  double cost_integral = 0.0;
};

struct PlotPoint {
  double t_s, average_cost, energy_j, battery_j;
};

struct SimOptions {
  bool record_events = false;
  std::size_t trace_every = 1;  // sample events: one per this many samples
  double battery_capacity_mah = 1000.0;
  double battery_voltage_v = 3.7;
};

struct SimulationTrace {
  std::vector<std::string> events;  // JSONL lines
  std::vector<WindowRecord> windows;
  std::vector<Segment> realized;  // maximal uniform-rate intervals
  std::vector<PlotPoint> plot;
  std::vector<std::size_t> samples_per_rate;
  double duration_s = 0.0;
  double energy_j = 0.0;
  double cost_integral = 0.0;
  std::size_t samples = 0;
  std::size_t fallback_windows = 0;

  double average_power_mw() const { return duration_s > 0 ? 1000.0 * energy_j / duration_s : 0.0; }
  double average_cost() const { return duration_s > 0 ? cost_integral / duration_s : 0.0; }
};

SimulationTrace simulate(const SimModel& model, const NoiseScenario& scenario,
                         const BudgetPolicy& policy, const Strategy& strategy,
                         double rve_lambda = 0.05, const SimOptions& options = {});

}  // namespace ratekit
