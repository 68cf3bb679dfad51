#include "ratekit/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ratekit/error.hpp"

namespace ratekit {

ExecutionPattern::ExecutionPattern(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  for (const auto& s : segments_) {
    if (!(s.duration_s > 0.0) || !(s.period_s > 0.0)) {
      throw ConfigError("execution pattern: durations and periods must be positive");
    }
    total_ += s.duration_s;
  }
  if (!(total_ > 0.0)) throw ConfigError("execution pattern: empty");
}

double pattern_cost(const ExecutionPattern& pattern, const CostTable& ct,
                    const std::vector<std::size_t>& levels) {
  const auto& segs = pattern.segments();
  if (levels.size() != segs.size()) {
    throw ConfigError("pattern_cost: one level per segment required");
  }
  double weighted = 0.0;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const int i = ct.rates.find_seconds(segs[s].period_s);
    if (i < 0) {
      throw ConfigError("pattern_cost: period " + format_double(segs[s].period_s * 1000.0) +
                        " ms is not in the rate set");
    }
    if (levels[s] >= ct.levels()) throw ConfigError("pattern_cost: level out of range");
    weighted += ct.J(i, static_cast<Eigen::Index>(levels[s])) * segs[s].duration_s;
  }
  return weighted / pattern.total_s();
}

double pattern_energy(const ExecutionPattern& pattern, double phi_mj) {
  std::size_t samples = 0;
  for (const auto& s : pattern.segments()) samples += sample_count(s.duration_s, s.period_s);
  return static_cast<double>(samples) * phi_mj / 1000.0;
}

Battery Battery::full(double capacity_mah, double voltage_v) {
  if (!(capacity_mah > 0.0) || !(voltage_v > 0.0)) {
    throw ConfigError("battery: capacity and voltage must be positive");
  }
  Battery b{capacity_mah, voltage_v, 0.0};
  b.level_j = b.capacity_j();
  return b;
}

DischargeTrace battery_discharge(const Battery& battery, double avg_power_mw,
                                 double horizon_s, std::size_t points) {
  if (!(avg_power_mw >= 0.0)) throw ConfigError("battery: average power must be >= 0");
  if (!(horizon_s >= 0.0)) throw ConfigError("battery: horizon must be >= 0");
  points = std::max<std::size_t>(points, 2);
  const double watts = avg_power_mw / 1000.0;
  DischargeTrace tr;
  tr.depletion_s = watts > 0.0 ? battery.level_j / watts
                               : std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < points; ++p) {
    const double t = horizon_s * static_cast<double>(p) / static_cast<double>(points - 1);
    tr.time_s.push_back(t);
    tr.level_j.push_back(std::max(0.0, battery.level_j - watts * t));
  }
  return tr;
}

}  // namespace ratekit
