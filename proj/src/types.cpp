#include "ratekit/types.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

#include "ratekit/error.hpp"

namespace ratekit {

DisturbancePattern::DisturbancePattern(std::vector<double> fractions)
    : fractions_(std::move(fractions)) {
  if (fractions_.empty()) throw ConfigError("pattern: at least one level required");
  double sum = 0.0;
  for (double f : fractions_) {
    if (!std::isfinite(f) || f < 0.0) {
      throw ConfigError("pattern: fractions must be finite and non-negative");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ConfigError("pattern: fractions must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

DisturbancePattern DisturbancePattern::from_times(const std::vector<double>& times) {
  const double total = std::accumulate(times.begin(), times.end(), 0.0);
  if (!(total > 0.0)) throw ConfigError("pattern: level times sum to zero");
  std::vector<double> f(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) f[j] = times[j] / total;
  // Put the rounding residue on the largest share so the sum is 1 to 1e-12.
  const double residue = 1.0 - std::accumulate(f.begin(), f.end(), 0.0);
  auto largest = std::max_element(f.begin(), f.end());
  *largest += residue;
  return DisturbancePattern(std::move(f));
}

EnergyBudget::EnergyBudget(double energy, double window) : energy_j(energy), window_s(window) {
  if (!(energy_j >= 0.0) || !(window_s > 0.0)) {
    throw ConfigError("budget: energy must be >= 0 and the window positive");
  }
}

std::size_t sample_count(double duration_s, double period_s) {
  if (!(duration_s > 0.0)) return 0;
  const double q = duration_s / period_s;
  return static_cast<std::size_t>(std::floor(q * (1.0 + 1e-9)));
}

unsigned worker_count() {
  if (const char* env = std::getenv("RATEKIT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace ratekit
