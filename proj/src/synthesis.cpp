#include "ratekit/synthesis.hpp"

#include <chrono>
#include <cmath>
#include <queue>
#include <string>
#include <unordered_set>

#include "ratekit/error.hpp"

namespace ratekit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_window(const WindowTotals& totals, const EnergyBudget& budget) {
  if (totals.periods() == 0 || totals.levels() == 0) {
    throw ConfigError("synthesis: empty tables");
  }
  if (std::abs(totals.window_s - budget.window_s) > 1e-12 * budget.window_s) {
    throw ConfigError("synthesis: budget window differs from the totals window");
  }
}

/// Column-major views of the totals for tight loops.
struct Flat {
  std::size_t n, k;
  double window;
  std::vector<double> cc;  // [j * n + i]
  std::vector<double> ec;

  explicit Flat(const WindowTotals& t)
      : n(t.periods()), k(t.levels()), window(t.window_s), cc(n * k), ec(n * k) {
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        cc[j * n + i] = t.cc_total(i, j);
        ec[j * n + i] = t.ec_by_level(i, j);
      }
  }

  CostEnergy eval(const std::vector<std::size_t>& c) const {
    double cost = 0.0;
    double energy = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      cost += cc[j * n + c[j]];
      energy += ec[j * n + c[j]];
    }
    return {cost / window, energy};
  }
};

bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Running optimum under (cost, energy, lexicographic) order.
struct Incumbent {
  bool found = false;
  CostEnergy value;
  std::vector<std::size_t> choice;

  void offer(const CostEnergy& v, const std::vector<std::size_t>& c) {
    if (found) {
      if (v.cost > value.cost) return;
      if (v.cost == value.cost) {
        if (v.energy > value.energy) return;
        if (v.energy == value.energy && !lex_less(c, choice)) return;
      }
    }
    found = true;
    value = v;
    choice = c;
  }
};

SynthesisResult finish(const Flat& f, const Incumbent& inc, std::uint64_t explored,
                       Clock::time_point start) {
  SynthesisResult r;
  r.explored = explored;
  if (inc.found) {
    r.feasible = true;
    r.controller.choice = inc.choice;
    r.predicted_cost = inc.value.cost;
    r.predicted_energy = inc.value.energy;
  } else {
    // Report the minimum-energy candidate; callers treat it as the fallback.
    r.controller.choice.assign(f.k, f.n - 1);
    const CostEnergy v = f.eval(r.controller.choice);
    r.predicted_cost = v.cost;
    r.predicted_energy = v.energy;
  }
  r.elapsed_s = seconds_since(start);
  return r;
}

std::uint64_t power_u64(std::size_t base, std::size_t exp) {
  std::uint64_t v = 1;
  for (std::size_t e = 0; e < exp; ++e) v *= base;
  return v;
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "exhaustive") return Algorithm::kExhaustive;
  if (name == "approach1") return Algorithm::kApproach1;
  if (name == "approach2") return Algorithm::kApproach2;
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected exhaustive|approach1|approach2)");
}

std::string_view algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kExhaustive: return "exhaustive";
    case Algorithm::kApproach1: return "approach1";
    case Algorithm::kApproach2: return "approach2";
  }
  return "?";
}

CostEnergy candidate_cost_energy(const MultiRateController& m, const WindowTotals& totals) {
  if (m.choice.size() != totals.levels()) {
    throw ConfigError("candidate: choice length must equal the number of levels");
  }
  for (std::size_t c : m.choice) {
    if (c >= totals.periods()) throw ConfigError("candidate: period index out of range");
  }
  return Flat(totals).eval(m.choice);
}

// ---------------------------------------------------------------------------

SynthesisResult exhaustive(const WindowTotals& totals, const EnergyBudget& budget) {
  const auto start = Clock::now();
  check_window(totals, budget);
  const Flat f(totals);
  Incumbent inc;
  std::vector<std::size_t> c(f.k, 0);
  std::vector<double> cost_prefix(f.k + 1, 0.0), energy_prefix(f.k + 1, 0.0);
  std::uint64_t explored = 0;

  // Odometer with prefix sums; summation order matches Flat::eval.
  std::size_t depth = 0;
  while (true) {
    for (; depth < f.k; ++depth) {
      cost_prefix[depth + 1] = cost_prefix[depth] + f.cc[depth * f.n + c[depth]];
      energy_prefix[depth + 1] = energy_prefix[depth] + f.ec[depth * f.n + c[depth]];
    }
    ++explored;
    const CostEnergy v{cost_prefix[f.k] / f.window, energy_prefix[f.k]};
    if (v.energy <= budget.energy_j) inc.offer(v, c);

    std::size_t j = f.k;
    while (j > 0 && c[j - 1] + 1 == f.n) c[--j] = 0;
    if (j == 0) break;
    ++c[j - 1];
    depth = j - 1;
  }
  return finish(f, inc, explored, start);
}

// ---------------------------------------------------------------------------

namespace {

/// Lexicographic traversal with dominance pruning. Energy is non-increasing
/// and cost non-decreasing in each index, so
///   - an infeasible candidate prunes every candidate component-wise ≤ it;
///   - a feasible candidate prunes every candidate component-wise ≥ it.
/// Each subtree (fixed prefix) is bracketed by its minimal and maximal
/// completions; the last coordinate is resolved by bisection between a
/// feasible and an infeasible anchor.
class DominanceSearch {
 public:
  DominanceSearch(const Flat& f, double budget, bool strict)
      : f_(f), budget_(budget), strict_(strict), choice_(f.k), line_(f.n) {}

  void run() {
    std::fill(choice_.begin(), choice_.end(), 0);
    const Probe lo = evaluate_fill(0, 0);
    const Probe hi = f_.n == 1 ? lo : evaluate_fill(0, f_.n - 1);
    subtree(0, lo, hi);
  }

  const Incumbent& incumbent() const { return inc_; }
  std::uint64_t explored() const { return explored_; }

 private:
  struct Probe {
    CostEnergy v;
    bool feasible;
  };

  Probe evaluate() {
    ++explored_;
    const CostEnergy v = f_.eval(choice_);
    const bool ok = v.energy <= budget_;
    if (ok) inc_.offer(v, choice_);
    return {v, ok};
  }

  /// Evaluates choice_[0..d) followed by `fill` in every later coordinate.
  Probe evaluate_fill(std::size_t d, std::size_t fill) {
    for (std::size_t j = d; j < f_.k; ++j) choice_[j] = fill;
    return evaluate();
  }

  void subtree(std::size_t d, const Probe& lo, const Probe& hi) {
    if (!hi.feasible) return;             // everything here is ≤ hi
    if (lo.feasible && strict_) return;  // everything here is ≥ lo
    if (d + 1 == f_.k) {
      line(lo, hi);
      return;
    }
    for (std::size_t c = 0; c < f_.n; ++c) {
      choice_[d] = c;
      const Probe child_lo = c == 0 ? lo : evaluate_fill(d + 1, 0);
      const Probe child_hi = c + 1 == f_.n ? hi : evaluate_fill(d + 1, f_.n - 1);
      choice_[d] = c;
      subtree(d + 1, child_lo, child_hi);
      // Every later subtree is component-wise ≥ child_lo.
      if (child_lo.feasible && strict_) break;
    }
  }

  void line(const Probe& lo, const Probe& hi) {
    const std::size_t d = f_.k - 1;
    ++generation_;
    auto remember = [&](std::size_t c, const Probe& p) { line_[c] = {generation_, p}; };
    remember(0, lo);
    remember(f_.n - 1, hi);

    std::size_t first_feasible = 0;
    if (!lo.feasible) {
      std::size_t bad = 0, good = f_.n - 1;
      while (good - bad > 1) {
        const std::size_t mid = bad + (good - bad) / 2;
        choice_[d] = mid;
        const Probe p = evaluate();
        remember(mid, p);
        (p.feasible ? good : bad) = mid;
      }
      first_feasible = good;
    }
    if (strict_) return;
    // Equal-cost run after the first feasible index may hold lower energy.
    const double best = line_[first_feasible].second.v.cost;
    for (std::size_t c = first_feasible + 1; c < f_.n; ++c) {
      Probe p;
      if (line_[c].first == generation_) {
        p = line_[c].second;
      } else {
        choice_[d] = c;
        p = evaluate();
        remember(c, p);
      }
      if (p.v.cost != best) break;
    }
  }

  const Flat& f_;
  double budget_;
  bool strict_;
  std::vector<std::size_t> choice_;
  Incumbent inc_;
  std::uint64_t explored_ = 0;
  std::uint64_t generation_ = 0;
  std::vector<std::pair<std::uint64_t, Probe>> line_;
};

}  // namespace

SynthesisResult approach1(const WindowTotals& totals, const EnergyBudget& budget) {
  const auto start = Clock::now();
  check_window(totals, budget);
  const Flat f(totals);

  bool monotone = true;
  bool strict = true;
  for (std::size_t j = 0; j < f.k; ++j) {
    for (std::size_t i = 1; i < f.n; ++i) {
      const double dc = f.cc[j * f.n + i] - f.cc[j * f.n + i - 1];
      const double de = f.ec[j * f.n + i] - f.ec[j * f.n + i - 1];
      if (dc < 0.0 || de > 0.0) monotone = false;
      if (!(dc > 0.0)) strict = false;
    }
  }
  if (!monotone) {
    SynthesisResult r = exhaustive(totals, budget);
    r.warnings.push_back(
        "approach1: cost not monotone in the sampling period; dominance pruning unsound, "
        "ran exhaustive search");
    r.elapsed_s = seconds_since(start);
    return r;
  }

  DominanceSearch search(f, budget.energy_j, strict);
  search.run();
  return finish(f, search.incumbent(), search.explored(), start);
}

// ---------------------------------------------------------------------------

SynthesisResult approach2(const ProfitTables& profit, const WindowTotals& totals,
                          const EnergyBudget& budget, std::vector<Emission>* emissions) {
  const auto start = Clock::now();
  check_window(totals, budget);
  const Flat f(totals);
  if (profit.levels.size() != f.k) throw ConfigError("approach2: profit table count mismatch");
  for (const auto& t : profit.levels) {
    if (t.size() != f.n) throw ConfigError("approach2: profit table size mismatch");
    for (const auto& row : t) {
      if (!std::isfinite(row.profit)) throw ConfigError("approach2: non-finite profit");
    }
  }

  // Rank vectors are keyed in base n, most significant = first level, so key
  // order is lexicographic order.
  struct Node {
    double profit;
    std::uint64_t key;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.profit != b.profit) return a.profit < b.profit;
    return a.key > b.key;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> frontier(worse);
  std::unordered_set<std::uint64_t> seen;

  auto decode = [&](std::uint64_t key, std::vector<std::size_t>& ranks) {
    for (std::size_t j = f.k; j-- > 0;) {
      ranks[j] = static_cast<std::size_t>(key % f.n);
      key /= f.n;
    }
  };
  auto collective = [&](const std::vector<std::size_t>& ranks) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.k; ++j) s += profit.levels[j][ranks[j]].profit;
    return s;
  };
  std::vector<std::uint64_t> place(f.k);
  for (std::size_t j = 0; j < f.k; ++j) place[j] = power_u64(f.n, f.k - 1 - j);

  std::vector<std::size_t> ranks(f.k, 0);
  frontier.push({collective(ranks), 0});
  seen.insert(0);

  Incumbent inc;
  std::uint64_t explored = 0;
  std::vector<std::size_t> choice(f.k);
  while (!frontier.empty()) {
    const Node node = frontier.top();
    frontier.pop();
    decode(node.key, ranks);
    for (std::size_t j = 0; j < f.k; ++j) choice[j] = profit.levels[j][ranks[j]].period_index;
    ++explored;
    const CostEnergy v = f.eval(choice);
    if (emissions) emissions->push_back({ranks, {choice}, node.profit});
    if (v.energy <= budget.energy_j) {
      inc.offer(v, choice);
      break;
    }
    for (std::size_t j = 0; j < f.k; ++j) {
      if (ranks[j] + 1 == f.n) continue;
      const std::uint64_t next = node.key + place[j];
      if (!seen.insert(next).second) continue;
      ++ranks[j];
      frontier.push({collective(ranks), next});
      --ranks[j];
    }
  }
  return finish(f, inc, explored, start);
}

SynthesisResult synthesize(Algorithm algo, const WindowTotals& totals,
                           const EnergyBudget& budget) {
  switch (algo) {
    case Algorithm::kExhaustive: return exhaustive(totals, budget);
    case Algorithm::kApproach1: return approach1(totals, budget);
    case Algorithm::kApproach2: {
      const auto start = Clock::now();
      const ProfitTables profit = build_profit_tables(totals);
      SynthesisResult r = approach2(profit, totals, budget);
      r.elapsed_s = seconds_since(start);
      return r;
    }
  }
  throw ConfigError("synthesis: unknown algorithm");
}

}  // namespace ratekit
