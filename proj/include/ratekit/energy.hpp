#pragma once

#include <cstddef>
#include <vector>

#include "ratekit/cost_tables.hpp"

namespace ratekit {

/// A maximal interval of uniform sampling period.
struct Segment {
  double duration_s = 0.0;
  double period_s = 0.0;
};

class ExecutionPattern {
 public:
  explicit ExecutionPattern(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const { return segments_; }
  double total_s() const { return total_; }

 private:
  std::vector<Segment> segments_;
  double total_ = 0.0;
};

/// Time-weighted average cost Σ J(h_j, l_j)·T_j / τ. `levels` gives the
/// disturbance level (0-based) of each segment.
double pattern_cost(const ExecutionPattern& pattern, const CostTable& ct,
                    const std::vector<std::size_t>& levels);

/// Σ ⌊T_j/h_j⌋ · φ in joules, with φ in millijoules.
double pattern_energy(const ExecutionPattern& pattern, double phi_mj);

/// Ideal linear battery.
struct Battery {
  double capacity_mah = 0.0;
  double voltage_v = 0.0;
  double level_j = 0.0;

  static Battery full(double capacity_mah, double voltage_v);
  double capacity_j() const { return capacity_mah * voltage_v * 3.6; }
};

struct DischargeTrace {
  std::vector<double> time_s;
  std::vector<double> level_j;
  double depletion_s = 0.0;  // +inf when nothing is drawn
};

/// Coulomb-counting drain at constant average power, sampled at `points`
/// evenly spaced instants over [0, horizon].
DischargeTrace battery_discharge(const Battery& battery, double avg_power_mw,
                                 double horizon_s, std::size_t points = 101);

}  // namespace ratekit
