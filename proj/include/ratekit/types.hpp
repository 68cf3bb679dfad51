#pragma once

#include <cstddef>
#include <vector>

namespace ratekit {

/// Share of a window spent at each disturbance level.
class DisturbancePattern {
 public:
  explicit DisturbancePattern(std::vector<double> fractions);

  /// Normalizes non-negative level times into fractions.
  static DisturbancePattern from_times(const std::vector<double>& times);

  const std::vector<double>& fractions() const { return fractions_; }
  std::size_t levels() const { return fractions_.size(); }
  double operator[](std::size_t j) const { return fractions_[j]; }

 private:
  std::vector<double> fractions_;
};

/// At most `energy_j` joules over the next `window_s` seconds.
struct EnergyBudget {
  double energy_j = 0.0;
  double window_s = 0.0;

  EnergyBudget() = default;
  EnergyBudget(double energy, double window);
};

/// Number of complete control cycles of period h that fit in T. The relative
/// slack absorbs representation error when T is an exact multiple of h.
std::size_t sample_count(double duration_s, double period_s);

/// Worker count for parallel loops: RATEKIT_THREADS if set, else hardware
/// concurrency, never less than 1.
unsigned worker_count();

}  // namespace ratekit
