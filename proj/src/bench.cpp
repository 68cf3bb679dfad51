#include "ratekit/bench.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <random>
#include <sstream>

#include "ratekit/error.hpp"
#include "ratekit/lqg.hpp"

namespace ratekit {

namespace {

// a(h) ≈ 1.0001 + 0.784·h for the DC servo with Qxu = I, Rc = BBᵀ.
constexpr double kAffineIntercept = 1.0;
constexpr double kAffineSlope = 0.784;  // per second of period

}  // namespace

void BenchCase::validate() const {
  if (n < 1 || k < 1 || repetitions < 1) {
    throw ConfigError("bench case: n, k and repetitions must be >= 1");
  }
  if (pattern.size() != k || representative_r.size() != k) {
    throw ConfigError("bench case: pattern and representative_r need k entries");
  }
  if (!(budget_fraction >= 0.0 && budget_fraction <= 1.0)) {
    throw ConfigError("bench case: budget_fraction must be in [0, 1]");
  }
}

RateSet bench_rates(std::size_t n) {
  std::vector<double> ms(n);
  for (std::size_t i = 0; i < n; ++i) {
    ms[i] = n == 1 ? 10.0 : 10.0 + 80.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return RateSet(std::move(ms));
}

BenchInstance make_bench_instance(const BenchCase& c, const PlantModel* plant) {
  c.validate();
  const RateSet rates = bench_rates(c.n);
  Eigen::MatrixXd J(c.n, c.k);

  if (c.source == BenchCase::Source::kPlant) {
    if (!plant) throw ConfigError("bench case: plant source needs a plant model");
    const LevelSpec levels = [&] {
      std::vector<double> th{0.0};
      for (double r : c.representative_r) th.push_back(2.0 * r - th.back());
      return LevelSpec(th, c.representative_r);
    }();
    J = build_cost_table(*plant, rates, levels).J;
  } else {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> jitter(0.01, 2.0);
    std::vector<double> g(c.n);
    const auto base = [&](double h) {
      return c.shape == BenchCase::Shape::kAffine
                 ? kAffineIntercept + kAffineSlope * h
                 : 0.01 + std::pow(h / rates.seconds(0), c.exponent);
    };
    g[0] = base(rates.seconds(0));
    for (std::size_t i = 1; i < c.n; ++i) {
      g[i] = g[i - 1] + jitter(rng) * (base(rates.seconds(i)) - base(rates.seconds(i - 1)));
    }
    for (std::size_t i = 0; i < c.n; ++i)
      for (std::size_t j = 0; j < c.k; ++j) J(i, j) = c.representative_r[j] * g[i];
  }

  const CostTable ct{rates, J, find_monotonicity_violations(J)};
  const PowerTable pt = build_power_table(rates, 100.0);
  WindowTotals totals = totals_over_window(ct, pt, DisturbancePattern(c.pattern), c.window_s);
  const double e_min = totals.ec_by_level.row(static_cast<Eigen::Index>(c.n - 1)).sum();
  const double e_max = totals.ec_by_level.row(0).sum();
  double budget = e_min + c.budget_fraction * (e_max - e_min);
  if (!(budget > 0.0)) budget = std::max(e_max, 1e-12);
  return {std::move(totals), EnergyBudget(budget, c.window_s)};
}

namespace {

std::uint64_t candidates(std::size_t n, std::size_t k) {
  double v = std::pow(static_cast<double>(n), static_cast<double>(k));
  return v > 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(v);
}

std::vector<BenchRow> run_case(const BenchCase& c, const BenchOptions& opt,
                               std::vector<std::string>& notes) {
  const BenchInstance inst = make_bench_instance(c, opt.plant);
  const bool capped = candidates(c.n, c.k) > opt.enumeration_cap;

  std::vector<BenchRow> rows;
  std::optional<SynthesisResult> exh, a1;
  for (Algorithm algo : {Algorithm::kExhaustive, Algorithm::kApproach1, Algorithm::kApproach2}) {
    BenchRow row;
    row.n = c.n;
    row.k = c.k;
    row.algo = std::string(algorithm_name(algo));
    if (capped && algo != Algorithm::kApproach2) {
      row.skipped = true;
      rows.push_back(row);
      continue;
    }
    std::vector<double> times;
    SynthesisResult last;
    for (std::size_t rep = 0; rep < c.repetitions; ++rep) {
      last = synthesize(algo, inst.totals, inst.budget);
      times.push_back(last.elapsed_s);
    }
    std::sort(times.begin(), times.end());
    const std::size_t m = times.size();
    row.median_s = m % 2 ? times[m / 2] : 0.5 * (times[m / 2 - 1] + times[m / 2]);
    row.explored = last.explored;
    row.cost = last.predicted_cost;
    row.energy = last.predicted_energy;
    row.feasible = last.feasible;
    if (algo == Algorithm::kExhaustive) exh = last;
    if (algo == Algorithm::kApproach1) a1 = last;
    if (algo == Algorithm::kApproach2) {
      if ((exh && exh->feasible != last.feasible) || (a1 && a1->feasible != last.feasible)) {
        notes.push_back("n=" + std::to_string(c.n) + ": feasibility disagreement");
      }
    }
    rows.push_back(row);
  }
  if (exh && a1 && exh->predicted_cost != a1->predicted_cost) {
    notes.push_back("n=" + std::to_string(c.n) + ": approach1 cost differs from exhaustive");
  }
  const double t2 = rows.back().median_s;
  for (auto& r : rows) {
    if (!r.skipped && t2 > 0.0) r.ratio_vs_approach2 = r.median_s / t2;
  }
  if (capped) {
    notes.push_back("n=" + std::to_string(c.n) + ", k=" + std::to_string(c.k) +
                    ": exhaustive and approach1 skipped (n^k above cap)");
  }
  return rows;
}

}  // namespace

BenchReport run_bench(const std::vector<BenchCase>& cases, const BenchOptions& options) {
  BenchReport report;
  std::vector<std::vector<BenchRow>> per_case(cases.size());
  std::vector<std::vector<std::string>> per_notes(cases.size());
  if (options.parallel) {
    std::vector<std::future<void>> jobs;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, [&, i] {
        per_case[i] = run_case(cases[i], options, per_notes[i]);
      }));
    }
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      per_case[i] = run_case(cases[i], options, per_notes[i]);
    }
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    report.rows.insert(report.rows.end(), per_case[i].begin(), per_case[i].end());
    report.notes.insert(report.notes.end(), per_notes[i].begin(), per_notes[i].end());
  }
  return report;
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "n,k,algo,status,median_s,explored,cost,energy_j,feasible,ratio_vs_approach2\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << r.k << ',' << r.algo << ',' << (r.skipped ? "skipped" : "ok") << ',';
    if (r.skipped) {
      out << ",,,,,\n";
      continue;
    }
    out << format_double(r.median_s) << ',' << r.explored << ',' << format_double(r.cost) << ','
        << format_double(r.energy) << ',' << (r.feasible ? "true" : "false") << ','
        << (r.ratio_vs_approach2 ? format_double(*r.ratio_vs_approach2) : "") << '\n';
  }
}

std::string format_bench_table(const BenchReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(6) << "|H|" << std::setw(4) << "|L|" << std::setw(12) << "algo"
     << std::right << std::setw(14) << "explored" << std::setw(14) << "median s"
     << std::setw(12) << "ratio" << std::setw(14) << "cost" << '\n';
  for (const auto& r : report.rows) {
    os << std::left << std::setw(6) << r.n << std::setw(4) << r.k << std::setw(12) << r.algo
       << std::right;
    if (r.skipped) {
      os << std::setw(14) << "skipped" << '\n';
      continue;
    }
    os << std::setw(14) << r.explored << std::setw(14) << std::setprecision(6) << r.median_s
       << std::setw(12) << std::setprecision(5)
       << (r.ratio_vs_approach2 ? *r.ratio_vs_approach2 : 0.0) << std::setw(14)
       << std::setprecision(8) << r.cost << '\n';
  }
  for (const auto& note : report.notes) os << "note: " << note << '\n';
  return os.str();
}

}  // namespace ratekit
