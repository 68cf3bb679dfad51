#include "ratekit/regulator_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"

#include "ratekit/error.hpp"
#include "ratekit/linalg.hpp"

namespace ratekit {

using nlohmann::json;

NoiseScenario NoiseScenario::repeated(const std::vector<NoiseSegment>& cycle,
                                      std::size_t repeat, std::uint64_t seed) {
  NoiseScenario s;
  s.seed = seed;
  for (std::size_t r = 0; r < repeat; ++r) s.segments.insert(s.segments.end(), cycle.begin(), cycle.end());
  s.validate();
  return s;
}

double NoiseScenario::duration_s() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration_s;
  return t;
}

void NoiseScenario::validate() const {
  if (segments.empty()) throw ConfigError("scenario: no segments");
  for (const auto& s : segments) {
    if (!(s.duration_s > 0.0) || !std::isfinite(s.duration_s)) {
      throw ConfigError("scenario: segment durations must be positive");
    }
    if (!(s.r >= 0.0) || !std::isfinite(s.r)) throw ConfigError("scenario: r must be >= 0");
  }
}

RveState rve_update(const RveState& state, double innovation) {
  return rve_update_normalized(state, innovation * innovation / state.sigma_nom_sq);
}

RveState rve_update_normalized(const RveState& state, double normalized_sq) {
  RveState next = state;
  next.r_hat = (1.0 - state.lambda) * state.r_hat + state.lambda * normalized_sq;
  return next;
}

std::size_t classify(double r_hat, const LevelSpec& levels) {
  const auto& th = levels.thresholds();
  for (std::size_t j = 0; j + 1 < th.size(); ++j) {
    if (r_hat <= th[j + 1]) return j;
  }
  return levels.size() - 1;
}

HistoryWindow::HistoryWindow(double duration_s, std::size_t levels)
    : duration_(duration_s), level_time_(levels, 0.0) {
  if (!(duration_s > 0.0)) throw ConfigError("history window: duration must be positive");
}

double HistoryWindow::elapsed() const {
  return std::accumulate(level_time_.begin(), level_time_.end(), 0.0);
}

std::string Strategy::describe() const {
  if (kind == Kind::kFixed) return "fixed(" + format_double(fixed_period_ms) + "ms)";
  return "adaptive(" + std::string(algorithm_name(algo)) + ")";
}

namespace {

MatrixXd psd_sqrt_factor(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(linalg::symmetrize(m));
  const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal();
}

}  // namespace

SimModel SimModel::build(const PlantModel& plant, const RateSet& rates, const LevelSpec& levels,
                         double peak_power_mw, double hyper_period_s) {
  if (!(hyper_period_s >= rates.seconds(rates.size() - 1))) {
    throw ConfigError("simulation: hyper-period must be at least the longest sampling period");
  }
  SimModel m{plant,
             rates,
             levels,
             build_cost_table(plant, rates, levels),
             build_power_table(rates, peak_power_mw),
             hyper_period_s,
             {}};
  for (std::size_t i = 0; i < rates.size(); ++i) {
    RateData rd;
    rd.lqg = design(plant, rates.seconds(i));
    rd.process_sqrt = psd_sqrt_factor(rd.lqg.plant.R1d);
    rd.innovation_inv = rd.lqg.innovation_cov.inverse();
    rd.sigma_nom_sq = rd.lqg.innovation_cov(0, 0);
    m.per_rate.push_back(std::move(rd));
  }
  return m;
}

// ---------------------------------------------------------------------------

WindowPlan plan_window(const CostTable& costs, const PowerTable& power, double hyper_period_s,
                       const DisturbancePattern& pattern, const BudgetPolicy& policy,
                       Algorithm algo) {
  const std::size_t k = costs.levels();
  const std::size_t n = costs.rates.size();
  if (pattern.levels() != k) throw ConfigError("plan_window: pattern level count mismatch");

  std::vector<std::size_t> active;
  std::vector<double> shares;
  for (std::size_t j = 0; j < k; ++j) {
    if (pattern[j] > 0.0) {
      active.push_back(j);
      shares.push_back(pattern[j]);
    }
  }
  CostTable reduced{costs.rates, Eigen::MatrixXd(n, active.size()), {}};
  for (std::size_t a = 0; a < active.size(); ++a) {
    reduced.J.col(static_cast<Eigen::Index>(a)) = costs.J.col(static_cast<Eigen::Index>(active[a]));
  }
  const WindowTotals totals = totals_over_window(
      reduced, power, DisturbancePattern::from_times(shares), hyper_period_s);

  WindowPlan plan;
  if (policy.mode == BudgetPolicy::Mode::kFixed) {
    plan.budget_j = policy.energy_j;
    plan.result = synthesize(algo, totals, EnergyBudget(policy.energy_j, hyper_period_s));
  } else {
    const int ref = costs.rates.find_seconds(policy.reference_period_ms / 1000.0);
    if (ref < 0) throw ConfigError("budget: reference period is not in the rate set");
    const double phi = power.phi_j();
    const MultiRateController all_ref{std::vector<std::size_t>(active.size(), ref)};
    const MultiRateController all_longest{std::vector<std::size_t>(active.size(), n - 1)};
    const CostEnergy target = candidate_cost_energy(all_ref, totals);
    const auto samples_of = [&](const MultiRateController& m) {
      return static_cast<long long>(std::llround(candidate_cost_energy(m, totals).energy / phi));
    };
    // Candidate energies are whole multiples of φ; search the sample budget.
    const auto attempt = [&](long long m) {
      const double budget = (static_cast<double>(m) + 0.5) * phi;
      SynthesisResult r = synthesize(algo, totals, EnergyBudget(budget, hyper_period_s));
      const bool ok = r.feasible && r.predicted_cost <= target.cost * (1.0 + 1e-12);
      return std::tuple{ok, std::move(r), budget};
    };
    long long bad = samples_of(all_longest) - 1;
    long long good = samples_of(all_ref);
    auto [ok_hi, best, best_budget] = attempt(good);
    (void)ok_hi;
    while (good - bad > 1) {
      const long long mid = bad + (good - bad) / 2;
      auto [ok, r, b] = attempt(mid);
      if (ok) {
        good = mid;
        best = std::move(r);
        best_budget = b;
      } else {
        bad = mid;
      }
    }
    plan.result = std::move(best);
    plan.budget_j = best_budget;
  }

  plan.fallback = !plan.result.feasible;
  plan.controller.choice.assign(k, n - 1);
  for (std::size_t a = 0; a < active.size(); ++a) {
    plan.controller.choice[active[a]] = plan.fallback ? n - 1 : plan.result.controller.choice[a];
  }
  return plan;
}

WindowPlan plan_window(const SimModel& model, const DisturbancePattern& pattern,
                       const BudgetPolicy& policy, Algorithm algo) {
  return plan_window(model.costs, model.power, model.hyper_period_s, pattern, policy, algo);
}

// ---------------------------------------------------------------------------

namespace {

json choice_ms(const SimModel& model, const MultiRateController& m) {
  json arr = json::array();
  for (std::size_t c : m.choice) arr.push_back(model.rates.ms(c));
  return arr;
}

}  // namespace

SimulationTrace simulate(const SimModel& model, const NoiseScenario& scenario,
                         const BudgetPolicy& policy, const Strategy& strategy,
                         double rve_lambda, const SimOptions& options) {
  scenario.validate();
  if (!(rve_lambda > 0.0 && rve_lambda <= 1.0)) {
    throw ConfigError("simulation: rve lambda must be in (0, 1]");
  }
  const PlantModel& plant = model.plant;
  const std::size_t n = model.rates.size();
  const std::size_t k = model.levels.size();
  const Eigen::Index nx = plant.states();
  const Eigen::Index nu = plant.inputs();
  const Eigen::Index ny = plant.outputs();
  const double phi = model.power.phi_j();
  const std::size_t trace_every = std::max<std::size_t>(1, options.trace_every);

  // Integer nanoseconds keep window and scenario boundaries exact.
  auto to_ns = [](double s) { return static_cast<long long>(std::llround(s * 1e9)); };
  std::vector<long long> period_ns(n);
  for (std::size_t i = 0; i < n; ++i) period_ns[i] = to_ns(model.rates.seconds(i));
  const long long window_ns = to_ns(model.hyper_period_s);
  std::vector<long long> scenario_end;
  {
    long long acc = 0;
    for (const auto& s : scenario.segments) scenario_end.push_back(acc += to_ns(s.duration_s));
  }
  const long long total_ns = scenario_end.back();

  MultiRateController deployed;
  if (strategy.kind == Strategy::Kind::kFixed) {
    const int idx = model.rates.find_seconds(strategy.fixed_period_ms / 1000.0);
    if (idx < 0) throw ConfigError("simulation: fixed period is not in the rate set");
    deployed.choice.assign(k, static_cast<std::size_t>(idx));
  } else {
    deployed.choice.assign(k, 0);  // most frequent rate until a history exists
  }

  const MatrixXd R2sqrt = psd_sqrt_factor(plant.R2());
  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(nx), xpred = Eigen::VectorXd::Zero(nx);
  Eigen::VectorXd xhat(nx), u(nu), y(ny), innov(ny), e(ny), w(nx), xu(nx + nu), tmp(nx);

  SimulationTrace tr;
  tr.samples_per_rate.assign(n, 0);
  const Battery battery = Battery::full(options.battery_capacity_mah, options.battery_voltage_v);

  std::size_t level = 0;
  std::size_t active = deployed.choice[level];
  RveState rve{0.0, rve_lambda, model.per_rate[active].sigma_nom_sq};
  HistoryWindow history(model.hyper_period_s, k);
  std::vector<double> carry(k, 0.0);

  long long t_ns = 0;
  long long window_start = 0;
  long long window_end = window_ns;
  std::size_t window_index = 0;
  std::size_t window_samples = 0;
  double window_cost = 0.0;
  std::size_t segment_samples = 0;
  std::size_t scenario_pos = 0;

  auto seconds = [](long long ns) { return static_cast<double>(ns) / 1e9; };
  auto emit = [&](json j) {
    if (options.record_events) tr.events.push_back(j.dump());
  };
  auto close_segment = [&] {
    if (segment_samples == 0) return;
    const double h = model.rates.seconds(active);
    tr.realized.push_back({static_cast<double>(segment_samples) * h, h});
    segment_samples = 0;
  };
  auto close_window = [&](long long end_ns, bool plan_next) {
    WindowRecord rec;
    rec.index = window_index;
    rec.start_s = seconds(window_start);
    rec.end_s = seconds(end_ns);
    rec.deployed = deployed;
    rec.energy_j = static_cast<double>(window_samples) * phi;
    rec.cost_integral = window_cost;
    const bool has_history = history.elapsed() > 0.0;
    if (has_history) rec.observed_pattern = history.normalize().fractions();
    emit({{"event", "window"},
          {"index", window_index},
          {"start", rec.start_s},
          {"end", rec.end_s},
          {"pattern", rec.observed_pattern},
          {"energy_j", rec.energy_j},
          {"avg_cost", window_cost / std::max(1e-300, rec.end_s - rec.start_s)}});
    if (plan_next && has_history && strategy.kind == Strategy::Kind::kAdaptive) {
      WindowPlan plan = plan_window(model, history.normalize(), policy, strategy.algo);
      deployed = plan.controller;
      if (plan.fallback) ++tr.fallback_windows;
      emit({{"event", "synthesis"},
            {"window", window_index + 1},
            {"algo", algorithm_name(strategy.algo)},
            {"budget_j", plan.budget_j},
            {"feasible", plan.result.feasible},
            {"fallback", plan.fallback},
            {"choice_ms", choice_ms(model, plan.controller)},
            {"predicted_cost", plan.result.predicted_cost},
            {"predicted_energy_j", plan.result.predicted_energy},
            {"explored", plan.result.explored}});
      rec.plan = std::move(plan);
    }
    tr.windows.push_back(std::move(rec));
    ++window_index;
    window_samples = 0;
    window_cost = 0.0;
  };

  while (t_ns < total_ns) {
    while (t_ns >= scenario_end[scenario_pos]) ++scenario_pos;
    const double r_true = scenario.segments[scenario_pos].r;
    const RateData& rd = model.per_rate[active];
    const LqgController& c = rd.lqg;
    const DiscretePlant& dp = c.plant;

    // Sense, estimate, actuate.
    for (Eigen::Index i = 0; i < ny; ++i) e(i) = normal(rng);
    y.noalias() = plant.C() * x;
    y.noalias() += R2sqrt * e;
    innov = y;
    innov.noalias() -= plant.C() * xpred;
    xhat = xpred;
    xhat.noalias() += c.Kf * innov;
    u.noalias() = -c.K * xhat;

    xu.head(nx) = x;
    xu.tail(nu) = u;
    const double stage = xu.dot(dp.Qd * xu) + r_true * dp.noise_cost;

    // Plant and predictor advance one period.
    for (Eigen::Index i = 0; i < nx; ++i) w(i) = normal(rng);
    tmp.noalias() = dp.Phi * x;
    tmp.noalias() += dp.Gamma * u;
    tmp.noalias() += std::sqrt(r_true) * (rd.process_sqrt * w);
    x = tmp;
    xpred.noalias() = dp.Phi * xhat;
    xpred.noalias() += dp.Gamma * u;

    if (ny == 1) {
      rve = rve_update(rve, innov(0));
    } else {
      rve = rve_update_normalized(rve, innov.dot(rd.innovation_inv * innov) / static_cast<double>(ny));
    }
    const std::size_t new_level = classify(rve.r_hat, model.levels);

    ++tr.samples;
    ++tr.samples_per_rate[active];
    ++segment_samples;
    ++window_samples;
    tr.cost_integral += stage;
    window_cost += stage;

    const long long t_next = t_ns + period_ns[active];
    const long long inside = std::min(t_next, window_end) - t_ns;
    history.add(new_level, seconds(inside));
    carry[new_level] += seconds(t_next - t_ns - inside);

    if (options.record_events && tr.samples % trace_every == 0) {
      const double energy = static_cast<double>(tr.samples) * phi;
      const double t_s = seconds(t_next);
      tr.plot.push_back({t_s, tr.cost_integral / t_s, energy, std::max(0.0, battery.level_j - energy)});
      emit({{"event", "sample"},
            {"t", seconds(t_ns)},
            {"h_ms", model.rates.ms(active)},
            {"r", r_true},
            {"r_hat", rve.r_hat},
            {"level", new_level + 1},
            {"energy_j", energy},
            {"cost", tr.cost_integral}});
    }
    if (new_level != level) {
      emit({{"event", "level_change"},
            {"t", seconds(t_next)},
            {"from", level + 1},
            {"to", new_level + 1}});
      level = new_level;
    }
    t_ns = t_next;

    if (t_ns >= window_end) {
      close_window(window_end, t_ns < total_ns);
      history.reset();
      for (std::size_t j = 0; j < k; ++j) {
        if (carry[j] > 0.0) history.add(j, carry[j]);
      }
      std::fill(carry.begin(), carry.end(), 0.0);
      window_start = window_end;
      window_end += window_ns;
    }

    const std::size_t next_active = deployed.choice[level];
    if (next_active != active) {
      close_segment();
      active = next_active;
      rve.sigma_nom_sq = model.per_rate[active].sigma_nom_sq;
    }
  }
  close_segment();
  if (window_samples > 0) close_window(t_ns, false);

  tr.duration_s = seconds(t_ns);
  tr.energy_j = static_cast<double>(tr.samples) * phi;
  return tr;
}

}  // namespace ratekit
