#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "ratekit/error.hpp"
#include "ratekit/synthesis.hpp"

using namespace ratekit;

namespace {

WindowTotals totals_of(const oracle::Instance& in) {
  return totals_over_window(in.ct, in.pt, DisturbancePattern(in.fractions), in.window_s);
}

oracle::Brute brute_of(const oracle::Instance& in) {
  std::vector<double> periods;
  for (std::size_t i = 0; i < in.ct.rates.size(); ++i) periods.push_back(in.ct.rates.seconds(i));
  return oracle::brute_force(in.ct.J, periods, in.fractions, in.window_s, in.pt.phi_j(), in.budget_j);
}

oracle::Instance nine_by_three(double budget) {
  std::vector<double> ms;
  for (int h = 10; h <= 90; h += 10) ms.push_back(h);
  RateSet rates(ms);
  Eigen::MatrixXd J(9, 3);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 3; ++j) J(i, j) = (1.0 + 0.5 * i + 0.05 * i * i) * (j + 1);
  return {CostTable{rates, J, {}}, build_power_table(rates, 100.0), {0.7, 0.1, 0.2}, 100.0, budget, true};
}

}  // namespace

TEST_CASE("exhaustive enumerates n^k candidates") {
  const auto in = nine_by_three(5.0);
  const SynthesisResult r = exhaustive(totals_of(in), EnergyBudget(5.0, 100.0));
  CHECK(r.explored == 729);
  const auto b = brute_of(in);
  CHECK(b.count == 729);
  CHECK(r.controller.choice == b.choice);
  CHECK(r.predicted_cost == doctest::Approx(b.cost).epsilon(1e-13));
}

TEST_CASE("budget extremes") {
  const auto in = nine_by_three(0.0);
  const WindowTotals t = totals_of(in);
  for (Algorithm a : {Algorithm::kExhaustive, Algorithm::kApproach1, Algorithm::kApproach2}) {
    const SynthesisResult loose = synthesize(a, t, EnergyBudget(1e9, 100.0));
    CHECK(loose.feasible);
    if (a != Algorithm::kApproach2) CHECK(loose.controller.choice == std::vector<std::size_t>{0, 0, 0});

    // All-longest needs ⌊70/.09⌋+⌊10/.09⌋+⌊20/.09⌋ = 777+111+222 samples.
    const SynthesisResult tight = synthesize(a, t, EnergyBudget(1.1099, 100.0));
    CHECK_FALSE(tight.feasible);
    CHECK(tight.controller.choice == std::vector<std::size_t>{8, 8, 8});
    const SynthesisResult edge = synthesize(a, t, EnergyBudget(1.1100001, 100.0));
    CHECK(edge.feasible);
    CHECK(edge.controller.choice == std::vector<std::size_t>{8, 8, 8});
  }
  CHECK(synthesize(Algorithm::kApproach1, t, EnergyBudget(1e9, 100.0)).explored < 729);
}

TEST_CASE("approach1 and exhaustive match the brute-force oracle on random instances") {
  std::mt19937_64 rng(2024);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 9, k = 1 + rng() % 3;
    const bool ties = trial % 3 == 0;
    const auto in = oracle::random_instance(rng, n, k, ties);
    const WindowTotals t = totals_of(in);
    const EnergyBudget budget(in.budget_j, in.window_s);
    const auto b = brute_of(in);
    const SynthesisResult ex = exhaustive(t, budget);
    const SynthesisResult a1 = approach1(t, budget);
    INFO("trial " << trial << " n=" << n << " k=" << k);
    REQUIRE(ex.feasible == b.feasible);
    REQUIRE(a1.feasible == b.feasible);
    CHECK(a1.explored <= ex.explored);
    if (b.feasible) {
      ++feasible;
      CHECK(ex.predicted_cost == doctest::Approx(b.cost).epsilon(1e-12));
      CHECK(ex.controller.choice == b.choice);
      CHECK(a1.predicted_cost == ex.predicted_cost);
      if (!ties) {
        CHECK(a1.predicted_energy == ex.predicted_energy);
        CHECK(a1.controller.choice == ex.controller.choice);
      }
    } else {
      ++infeasible;
    }
  }
  CHECK(feasible > 50);
  CHECK(infeasible > 10);
}

TEST_CASE("approach1 falls back on non-monotone costs") {
  auto in = nine_by_three(4.0);
  in.ct.J(4, 0) = 0.1;
  const WindowTotals t = totals_of(in);
  const SynthesisResult a1 = approach1(t, EnergyBudget(4.0, 100.0));
  const SynthesisResult ex = exhaustive(t, EnergyBudget(4.0, 100.0));
  CHECK_FALSE(a1.warnings.empty());
  CHECK(a1.controller == ex.controller);
  CHECK(a1.explored == 729);
}

TEST_CASE("approach2 emission sequence") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 6, k = 1 + rng() % 3;
    const auto in = oracle::random_instance(rng, n, k);
    const WindowTotals t = totals_of(in);
    const ProfitTables pr = build_profit_tables(t);
    std::vector<Emission> em;
    const SynthesisResult r = approach2(pr, t, EnergyBudget(0.0, in.window_s), &em);
    (void)r;
    std::size_t all = 1;
    for (std::size_t j = 0; j < k; ++j) all *= n;
    REQUIRE(em.size() >= 1);
    CHECK(std::all_of(em[0].ranks.begin(), em[0].ranks.end(), [](std::size_t x) { return x == 0; }));
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t e = 0; e < em.size(); ++e) {
      CHECK(seen.insert(em[e].ranks).second);
      if (e == 0) continue;
      CHECK(em[e].collective_profit <= em[e - 1].collective_profit);
      bool neighbour = false;
      for (std::size_t p = 0; p < e && !neighbour; ++p) {
        std::size_t diff = 0;
        for (std::size_t j = 0; j < k; ++j) diff += em[p].ranks[j] != em[e].ranks[j];
        neighbour = diff == 1;
      }
      CHECK(neighbour);
    }
    // Every candidate costs energy, so a zero budget exhausts the product.
    CHECK(em.size() == all);
  }
}

TEST_CASE("approach2 finds a feasible controller whenever one exists") {
  std::mt19937_64 rng(31337);
  std::vector<double> ratio;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 8;
    const auto in = oracle::random_instance(rng, n, 3);
    const WindowTotals t = totals_of(in);
    const EnergyBudget budget(in.budget_j, in.window_s);
    const auto b = brute_of(in);
    const SynthesisResult r = synthesize(Algorithm::kApproach2, t, budget);
    CHECK(r.feasible == b.feasible);
    if (r.feasible) {
      CHECK(r.predicted_energy <= in.budget_j);
      CHECK(r.predicted_cost >= b.cost * (1 - 1e-12));
    }
    CHECK(r.explored <= n * n * n);
    ratio.push_back(static_cast<double>(r.explored) / static_cast<double>(n));
  }
  std::nth_element(ratio.begin(), ratio.begin() + ratio.size() / 2, ratio.end());
  CHECK(ratio[ratio.size() / 2] <= 3.0);
}

TEST_CASE("algorithm names") {
  CHECK(parse_algorithm("approach2") == Algorithm::kApproach2);
  CHECK(algorithm_name(Algorithm::kExhaustive) == "exhaustive");
  CHECK_THROWS_AS(parse_algorithm("greedy"), ConfigError);
}
