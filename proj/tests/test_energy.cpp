#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "ratekit/energy.hpp"
#include "ratekit/synthesis.hpp"

using namespace ratekit;

TEST_CASE("floor-sum energy") {
  CHECK(pattern_energy(ExecutionPattern({{100.0, 0.01}}), 1.0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(pattern_energy(ExecutionPattern({{0.015, 0.01}}), 1.0) == doctest::Approx(0.001).epsilon(1e-15));
  const ExecutionPattern p({{70.0, 0.01}, {10.0, 0.05}, {20.0, 0.09}});
  CHECK(pattern_energy(p, 1.0) == doctest::Approx(7.422).epsilon(1e-14));
  CHECK(p.total_s() == 100.0);
  CHECK(sample_count(0.3, 0.1) == 3);  // 0.3/0.1 is 2.9999999999999996 in binary
}

TEST_CASE("time-weighted cost") {
  const RateSet rates({10, 20});
  Eigen::MatrixXd J(2, 2);
  J << 2, 3, 4, 5;
  const CostTable ct{rates, J, {}};
  CHECK(pattern_cost(ExecutionPattern({{5.0, 0.02}}), ct, {1}) == 5.0);
  CHECK(pattern_cost(ExecutionPattern({{1.0, 0.01}, {1.0, 0.02}}), ct, {0, 0}) == doctest::Approx(3.0));
  CHECK_THROWS(pattern_cost(ExecutionPattern({{1.0, 0.03}}), ct, {0}));
}

TEST_CASE("energy monotone in period, cost invariant to splitting") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RateSet rates({10, 15, 20, 25, 30});
  Eigen::MatrixXd J = Eigen::MatrixXd::Random(5, 2).cwiseAbs();
  const CostTable ct{rates, J, {}};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Segment> segs;
    std::vector<std::size_t> lv;
    for (int s = 0; s < 4; ++s) {
      segs.push_back({0.1 + 10 * u(rng), rates.seconds(rng() % 5)});
      lv.push_back(rng() % 2);
    }
    const double e = pattern_energy(ExecutionPattern(segs), 1.0);
    auto faster = segs;
    const std::size_t pick = rng() % 4;
    const int idx = rates.find_seconds(faster[pick].period_s);
    if (idx > 0) {
      faster[pick].period_s = rates.seconds(idx - 1);
      CHECK(pattern_energy(ExecutionPattern(faster), 1.0) >= e);
    }
    auto split = segs;
    auto lv2 = lv;
    const double part = split[pick].duration_s * u(rng);
    split[pick].duration_s -= part;
    split.insert(split.begin() + static_cast<long>(pick), Segment{part, segs[pick].period_s});
    lv2.insert(lv2.begin() + static_cast<long>(pick), lv[pick]);
    CHECK(pattern_cost(ExecutionPattern(split), ct, lv2) ==
          doctest::Approx(pattern_cost(ExecutionPattern(segs), ct, lv)).epsilon(1e-12));
  }
}

TEST_CASE("budget accounting matches the floor-sum of the induced pattern") {
  const RateSet rates({10, 15, 20, 25, 30, 35, 40, 45, 50});
  Eigen::MatrixXd J = Eigen::MatrixXd::Ones(9, 3);
  const PowerTable pt = build_power_table(rates, 100.0);
  const std::vector<double> f{0.7, 0.1, 0.2};
  const WindowTotals t = totals_over_window(CostTable{rates, J, {}}, pt, DisturbancePattern(f), 100.0);
  for (std::size_t a = 0; a < 9; ++a)
    for (std::size_t b = 0; b < 9; ++b)
      for (std::size_t c = 0; c < 9; ++c) {
        const MultiRateController m{{a, b, c}};
        const ExecutionPattern p({{70.0, rates.seconds(a)}, {10.0, rates.seconds(b)}, {20.0, rates.seconds(c)}});
        CHECK(candidate_cost_energy(m, t).energy == doctest::Approx(pattern_energy(p, pt.phi_mj)).epsilon(1e-14));
      }
  CHECK(candidate_cost_energy(MultiRateController{{0, 0, 0}}, t).energy == doctest::Approx(10.0));
}

TEST_CASE("linear battery") {
  const Battery b = Battery::full(1000.0, 3.7);
  CHECK(b.capacity_j() == doctest::Approx(13320.0));
  const DischargeTrace idle = battery_discharge(b, 0.0, 1000.0);
  CHECK(std::isinf(idle.depletion_s));
  for (double level : idle.level_j) CHECK(level == b.level_j);

  const DischargeTrace d20 = battery_discharge(b, 20.0, 1e6);
  const DischargeTrace d10 = battery_discharge(b, 10.0, 1e6);
  CHECK(d20.depletion_s == doctest::Approx(13320.0 / 0.02));
  CHECK(d10.depletion_s == doctest::Approx(2.0 * d20.depletion_s));
  CHECK(d20.time_s.size() == 101);
  CHECK(d20.level_j.back() == 0.0);  // horizon exceeds depletion
  for (std::size_t i = 1; i < d20.level_j.size(); ++i) CHECK(d20.level_j[i] <= d20.level_j[i - 1]);
  CHECK_THROWS(battery_discharge(b, -1.0, 10.0));
}
