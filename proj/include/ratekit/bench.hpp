#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ratekit/cost_tables.hpp"
#include "ratekit/synthesis.hpp"

namespace ratekit {

struct BenchCase {
  enum class Source { kSynthetic, kPlant };
  /// kAffine: J grows linearly in h from a positive intercept, with slope and
  ///          intercept fitted to the DC-servo LQG table.
  /// kPower:  J ∝ (h/h₁)^exponent with a small intercept.
  enum class Shape { kAffine, kPower };

  std::size_t n = 9;
  std::size_t k = 3;
  Source source = Source::kSynthetic;
  Shape shape = Shape::kAffine;
  double exponent = 2.0;
  double budget_fraction = 0.5;  // position of the budget in [E_min, E_max]
  std::size_t repetitions = 5;
  std::uint64_t seed = 1;
  std::vector<double> pattern{0.7, 0.1, 0.2};
  std::vector<double> representative_r{5.0, 30.0, 75.0};
  double window_s = 100.0;

  void validate() const;
};

/// n periods evenly spaced over [10, 90] ms.
RateSet bench_rates(std::size_t n);

struct BenchInstance {
  WindowTotals totals;
  EnergyBudget budget;
};

/// Synthetic monotone cost table (random positive increments) with the
/// standard power table, reduced to window totals and a budget.
BenchInstance make_bench_instance(const BenchCase& c, const PlantModel* plant = nullptr);

struct BenchRow {
  std::size_t n = 0, k = 0;
  std::string algo;
  bool skipped = false;
  double median_s = 0.0;
  std::uint64_t explored = 0;
  double cost = 0.0;
  double energy = 0.0;
  bool feasible = false;
  std::optional<double> ratio_vs_approach2;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<std::string> notes;
};

struct BenchOptions {
  std::uint64_t enumeration_cap = 50'000'000;  // skip exhaustive/approach1 above n^k
  bool parallel = false;
  const PlantModel* plant = nullptr;            // required for Source::kPlant
};

BenchReport run_bench(const std::vector<BenchCase>& cases, const BenchOptions& options = {});

void write_bench_csv(std::ostream& out, const BenchReport& report);
std::string format_bench_table(const BenchReport& report);

}  // namespace ratekit
