#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ratekit/cost_tables.hpp"
#include "ratekit/types.hpp"

namespace ratekit {

/// Level → period map, stored as 0-based period indices (one per level).
struct MultiRateController {
  std::vector<std::size_t> choice;

  bool operator==(const MultiRateController&) const = default;
};

struct SynthesisResult {
  MultiRateController controller;
  double predicted_cost = 0.0;    // window-average cost per second
  double predicted_energy = 0.0;  // J over the window
  std::uint64_t explored = 0;
  double elapsed_s = 0.0;
  bool feasible = false;
  std::vector<std::string> warnings;
};

enum class Algorithm { kExhaustive, kApproach1, kApproach2 };

Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm algo);

struct CostEnergy {
  double cost = 0.0;
  double energy = 0.0;
};

/// cost = Σ_j CCTotal[c_j][j] / 𝒯,  energy = Σ_j ECByLevel[c_j][j].
CostEnergy candidate_cost_energy(const MultiRateController& m, const WindowTotals& totals);

/// Every candidate; optimal with ties broken toward lower energy then the
/// lexicographically smallest choice.
SynthesisResult exhaustive(const WindowTotals& totals, const EnergyBudget& budget);

/// Dominance-pruned search. Same cost and feasibility as `exhaustive` when
/// costs are non-decreasing in the period; otherwise falls back to it.
SynthesisResult approach1(const WindowTotals& totals, const EnergyBudget& budget);

/// One emitted candidate of the profit-ordered search.
struct Emission {
  std::vector<std::size_t> ranks;  // 0-based rank within each level's profit table
  MultiRateController controller;
  double collective_profit = 0.0;
};

/// Best-first search over the product of the per-level profit tables, in
/// non-increasing collective (summed) profit. Returns the first emission that
/// fits the budget. When `emissions` is non-null every emission is recorded.
SynthesisResult approach2(const ProfitTables& profit, const WindowTotals& totals,
                          const EnergyBudget& budget,
                          std::vector<Emission>* emissions = nullptr);

/// Builds profit tables as needed and dispatches.
SynthesisResult synthesize(Algorithm algo, const WindowTotals& totals,
                           const EnergyBudget& budget);

}  // namespace ratekit
