#include "ratekit/cost_tables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ratekit/error.hpp"
#include "ratekit/lqg.hpp"

namespace ratekit {

RateSet::RateSet(std::vector<double> periods_ms) : ms_(std::move(periods_ms)) {
  if (ms_.empty()) throw ConfigError("rates: at least one period required");
  for (std::size_t i = 0; i < ms_.size(); ++i) {
    if (!std::isfinite(ms_[i]) || ms_[i] <= 0.0) {
      throw ConfigError("rates: periods must be positive and finite");
    }
    if (i > 0 && !(ms_[i] > ms_[i - 1])) {
      throw ConfigError("rates: periods must be strictly increasing");
    }
  }
}

int RateSet::find_seconds(double period_s) const {
  for (std::size_t i = 0; i < ms_.size(); ++i) {
    if (std::abs(seconds(i) - period_s) <= 1e-9 * seconds(i)) return static_cast<int>(i);
  }
  return -1;
}

LevelSpec::LevelSpec(std::vector<double> thresholds, std::vector<double> representative_r)
    : thresholds_(std::move(thresholds)), representative_(std::move(representative_r)) {
  if (thresholds_.size() < 2) throw ConfigError("levels: need at least two thresholds");
  if (representative_.size() + 1 != thresholds_.size()) {
    throw ConfigError("levels: need one representative_r per level (thresholds.size() - 1)");
  }
  if (thresholds_.front() < 0.0) throw ConfigError("levels: thresholds must be >= 0");
  for (std::size_t j = 1; j < thresholds_.size(); ++j) {
    if (!(thresholds_[j] > thresholds_[j - 1])) {
      throw ConfigError("levels: thresholds must be strictly increasing");
    }
  }
  for (std::size_t j = 0; j < representative_.size(); ++j) {
    const double r = representative_[j];
    if (!(r > thresholds_[j] && r <= thresholds_[j + 1])) {
      throw ConfigError("levels: representative_r[" + std::to_string(j) +
                        "] must lie in its level interval");
    }
  }
}

LevelSpec LevelSpec::with_midpoints(std::vector<double> thresholds) {
  std::vector<double> mid;
  for (std::size_t j = 0; j + 1 < thresholds.size(); ++j) {
    mid.push_back(0.5 * (thresholds[j] + thresholds[j + 1]));
  }
  return LevelSpec(std::move(thresholds), std::move(mid));
}

std::vector<std::pair<std::size_t, std::size_t>> find_monotonicity_violations(
    const Eigen::MatrixXd& J) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (Eigen::Index j = 0; j < J.cols(); ++j)
    for (Eigen::Index i = 1; i < J.rows(); ++i)
      if (J(i, j) < J(i - 1, j)) out.emplace_back(i, j);
  return out;
}

CostTable build_cost_table(const PlantModel& plant, const RateSet& rates,
                           const LevelSpec& levels) {
  const std::size_t n = rates.size();
  const std::size_t k = levels.size();
  Eigen::MatrixXd J(n, k);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t i) {
    try {
      const LqgController ctrl = design(plant, rates.seconds(i));
      const CostBreakdown cb = evaluate_cost(plant, ctrl, 0.0);
      for (std::size_t j = 0; j < k; ++j) {
        J(i, j) = cb.a * levels.representative_r()[j] + cb.b;
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) work(i);
      });
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw NumericError("cost table: design failed at h = " + format_double(rates.ms(i)) +
                         " ms: " + e.what());
    }
  }
  if (!J.allFinite() || J.minCoeff() < 0.0) {
    throw NumericError("cost table: entries must be finite and non-negative");
  }
  CostTable ct{rates, J, {}};
  ct.monotonicity_violations = find_monotonicity_violations(J);
  return ct;
}

PowerTable build_power_table(const RateSet& rates, double peak_power_mw) {
  if (!(peak_power_mw > 0.0) || !std::isfinite(peak_power_mw)) {
    throw ConfigError("power table: peak power must be positive");
  }
  PowerTable pt;
  pt.phi_mj = peak_power_mw * rates.seconds(0);
  pt.power_mw.resize(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    pt.power_mw[i] = peak_power_mw * rates.ms(0) / rates.ms(i);
  }
  return pt;
}

WindowTotals totals_over_window(const CostTable& ct, const PowerTable& pt,
                                const DisturbancePattern& pattern, double window_s) {
  const std::size_t n = ct.periods();
  const std::size_t k = ct.levels();
  if (pattern.levels() != k) throw ConfigError("totals: pattern has wrong number of levels");
  if (pt.power_mw.size() != n) throw ConfigError("totals: power table size mismatch");
  if (!(window_s > 0.0)) throw ConfigError("totals: window must be positive");

  WindowTotals t;
  t.window_s = window_s;
  t.cc_total.resize(n, k);
  t.ec_total.resize(n);
  t.ec_by_level.resize(n, k);
  const double phi = pt.phi_j();
  for (std::size_t i = 0; i < n; ++i) {
    const double h = ct.rates.seconds(i);
    t.ec_total(i) = static_cast<double>(sample_count(window_s, h)) * phi;
    for (std::size_t j = 0; j < k; ++j) {
      const double tj = pattern[j] * window_s;
      t.cc_total(i, j) = ct.J(i, j) * tj;
      t.ec_by_level(i, j) = static_cast<double>(sample_count(tj, h)) * phi;
    }
  }
  return t;
}

ProfitTables build_profit_tables(const WindowTotals& totals) {
  const std::size_t n = totals.periods();
  const std::size_t k = totals.levels();
  ProfitTables out;
  out.levels.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    auto& rows = out.levels[j];
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double cc = totals.cc_total(i, j);
      const double ec = totals.ec_total(i);
      if (!(cc > 0.0) || !(ec > 0.0) || !std::isfinite(cc) || !std::isfinite(ec)) {
        throw ConfigError("profit: level " + std::to_string(j + 1) + ", period index " +
                          std::to_string(i + 1) +
                          " has zero or non-finite total cost/energy; profit undefined");
      }
      rows.push_back({i, cc, ec, 1.0 / (cc * ec)});
    }
    std::sort(rows.begin(), rows.end(), [](const ProfitRow& a, const ProfitRow& b) {
      if (a.profit != b.profit) return a.profit > b.profit;
      return a.period_index > b.period_index;  // longer period first on ties
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV persistence

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("csv: cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

namespace {

using Rows = std::vector<std::vector<double>>;

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Rows& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

Rows read_csv(const std::filesystem::path& path, std::size_t expected_cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);  // header
  Rows rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (expected_cols && row.size() != expected_cols) {
      throw ConfigError(path.string() + ": expected " + std::to_string(expected_cols) +
                        " columns, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void write_cost_table(const std::filesystem::path& path, const CostTable& ct) {
  std::vector<std::string> header;
  for (std::size_t j = 0; j < ct.levels(); ++j) header.push_back("l" + std::to_string(j + 1));
  Rows rows(ct.periods(), std::vector<double>(ct.levels()));
  for (std::size_t i = 0; i < ct.periods(); ++i)
    for (std::size_t j = 0; j < ct.levels(); ++j) rows[i][j] = ct.J(i, j);
  write_csv(path, header, rows);
}

CostTable read_cost_table(const std::filesystem::path& path, const RateSet& rates) {
  const Rows rows = read_csv(path, 0);
  if (rows.size() != rates.size()) {
    throw ConfigError(path.string() + ": row count does not match the rate set");
  }
  const std::size_t k = rows.front().size();
  Eigen::MatrixXd J(rows.size(), k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != k) throw ConfigError(path.string() + ": ragged rows");
    for (std::size_t j = 0; j < k; ++j) J(i, j) = rows[i][j];
  }
  CostTable ct{rates, J, {}};
  ct.monotonicity_violations = find_monotonicity_violations(J);
  return ct;
}

void write_power_table(const std::filesystem::path& path, const RateSet& rates,
                       const PowerTable& pt) {
  Rows rows;
  for (std::size_t i = 0; i < rates.size(); ++i) rows.push_back({rates.ms(i), pt.power_mw[i]});
  write_csv(path, {"h_ms", "power_mw"}, rows);
}

std::pair<RateSet, PowerTable> read_power_table(const std::filesystem::path& path) {
  const Rows rows = read_csv(path, 2);
  if (rows.empty()) throw ConfigError(path.string() + ": no rows");
  std::vector<double> ms;
  PowerTable pt;
  for (const auto& r : rows) {
    ms.push_back(r[0]);
    pt.power_mw.push_back(r[1]);
  }
  RateSet rates(std::move(ms));
  pt.phi_mj = pt.power_mw.front() * rates.seconds(0);
  return {std::move(rates), std::move(pt)};
}

void write_profit_table(const std::filesystem::path& path, const RateSet& rates,
                        const std::vector<ProfitRow>& rows) {
  Rows out;
  for (const auto& r : rows) out.push_back({rates.ms(r.period_index), r.cc_total, r.ec_total, r.profit});
  write_csv(path, {"h_ms", "cc_total", "ec_total", "profit"}, out);
}

std::vector<ProfitRow> read_profit_table(const std::filesystem::path& path,
                                         const RateSet& rates) {
  std::vector<ProfitRow> out;
  for (const auto& r : read_csv(path, 4)) {
    const int idx = rates.find_seconds(r[0] / 1000.0);
    if (idx < 0) throw ConfigError(path.string() + ": unknown period " + format_double(r[0]));
    out.push_back({static_cast<std::size_t>(idx), r[1], r[2], r[3]});
  }
  return out;
}

}  // namespace ratekit
