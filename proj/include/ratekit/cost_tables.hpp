#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ratekit/plant_model.hpp"
#include "ratekit/types.hpp"

namespace ratekit {

/// Admissible sampling periods, strictly increasing. Milliseconds are the
/// stored representation so that files round-trip exactly.
class RateSet {
 public:
  explicit RateSet(std::vector<double> periods_ms);

  std::size_t size() const { return ms_.size(); }
  double ms(std::size_t i) const { return ms_[i]; }
  double seconds(std::size_t i) const { return ms_[i] / 1000.0; }
  const std::vector<double>& periods_ms() const { return ms_; }

  /// Index of the period equal to `period_s` (relative tolerance 1e-9), or -1.
  int find_seconds(double period_s) const;

 private:
  std::vector<double> ms_;
};

/// Disturbance levels as right-closed intervals on the noise estimate,
/// (t0, t1], (t1, t2], ..., with a representative intensity per level.
class LevelSpec {
 public:
  LevelSpec(std::vector<double> thresholds, std::vector<double> representative_r);

  /// Representative intensity at each interval midpoint.
  static LevelSpec with_midpoints(std::vector<double> thresholds);

  std::size_t size() const { return representative_.size(); }
  const std::vector<double>& thresholds() const { return thresholds_; }
  const std::vector<double>& representative_r() const { return representative_; }

 private:
  std::vector<double> thresholds_;
  std::vector<double> representative_;
};

struct CostTable {
  RateSet rates;
  Eigen::MatrixXd J;  // n × k, cost per second
  /// (i, j) with J(i, j) < J(i−1, j).
  std::vector<std::pair<std::size_t, std::size_t>> monotonicity_violations;

  std::size_t periods() const { return static_cast<std::size_t>(J.rows()); }
  std::size_t levels() const { return static_cast<std::size_t>(J.cols()); }
};

/// Recomputes the violation list from J.
std::vector<std::pair<std::size_t, std::size_t>> find_monotonicity_violations(
    const Eigen::MatrixXd& J);

struct PowerTable {
  std::vector<double> power_mw;
  double phi_mj = 0.0;  // energy per control cycle

  double phi_j() const { return phi_mj / 1000.0; }
};

/// Everything the synthesis algorithms read for one window.
struct WindowTotals {
  double window_s = 0.0;
  Eigen::MatrixXd cc_total;     // n × k: J(i, j) · T_j
  Eigen::VectorXd ec_total;     // n: ⌊𝒯/h_i⌋ · φ  (J)
  Eigen::MatrixXd ec_by_level;  // n × k: ⌊T_j/h_i⌋ · φ  (J)

  std::size_t periods() const { return static_cast<std::size_t>(cc_total.rows()); }
  std::size_t levels() const { return static_cast<std::size_t>(cc_total.cols()); }
};

struct ProfitRow {
  std::size_t period_index = 0;
  double cc_total = 0.0;
  double ec_total = 0.0;
  double profit = 0.0;
};

/// One table per level, rows in descending profit.
struct ProfitTables {
  std::vector<std::vector<ProfitRow>> levels;
};

CostTable build_cost_table(const PlantModel& plant, const RateSet& rates,
                           const LevelSpec& levels);

PowerTable build_power_table(const RateSet& rates, double peak_power_mw);

WindowTotals totals_over_window(const CostTable& ct, const PowerTable& pt,
                                const DisturbancePattern& pattern, double window_s);

ProfitTables build_profit_tables(const WindowTotals& totals);

// Persistence. Periods are written in milliseconds; all numbers use the
// shortest round-trip representation.
void write_cost_table(const std::filesystem::path& path, const CostTable& ct);
CostTable read_cost_table(const std::filesystem::path& path, const RateSet& rates);
void write_power_table(const std::filesystem::path& path, const RateSet& rates,
                       const PowerTable& pt);
std::pair<RateSet, PowerTable> read_power_table(const std::filesystem::path& path);
void write_profit_table(const std::filesystem::path& path, const RateSet& rates,
                        const std::vector<ProfitRow>& rows);
std::vector<ProfitRow> read_profit_table(const std::filesystem::path& path,
                                         const RateSet& rates);

std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace ratekit
