#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mgsim {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Load-shaping cost functions over the district's non-negative net
/// electricity consumption. Lower is better for all of them.
enum class Metric {
  ramping,
  one_minus_load_factor,
  average_daily_peak,
  peak_demand,
  net_electricity_consumption,
  quadratic,
};

inline constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::ramping: return "ramping";
    case Metric::one_minus_load_factor: return "1-load_factor";
    case Metric::average_daily_peak: return "average_daily_peak";
    case Metric::peak_demand: return "peak_demand";
    case Metric::net_electricity_consumption: return "net_electricity_consumption";
    case Metric::quadratic: return "quadratic";
  }
  return "";
}

inline Metric parse_metric(std::string_view name) {
  for (auto m : {Metric::ramping, Metric::one_minus_load_factor, Metric::average_daily_peak, Metric::peak_demand,
                 Metric::net_electricity_consumption, Metric::quadratic}) {
    if (to_string(m) == name) return m;
  }
  throw MetricError("unknown metric: " + std::string(name));
}

/// The five challenge metrics; quadratic is not part of the average score.
inline std::vector<Metric> challenge_metrics() {
  return {Metric::ramping, Metric::one_minus_load_factor, Metric::average_daily_peak, Metric::peak_demand,
          Metric::net_electricity_consumption};
}

inline std::vector<double> clip_non_negative(std::span<const double> e) {
  std::vector<double> out(e.begin(), e.end());
  for (auto& v : out) v = std::max(0.0, v);
  return out;
}

namespace detail {

inline void require_non_empty(std::span<const double> e, std::string_view metric) {
  if (e.empty()) throw MetricError(std::string(metric) + ": empty series");
}

inline double load_factor_gap(std::span<const double> e) {
  const double peak = *std::max_element(e.begin(), e.end());
  const double mean = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
  return 1.0 - mean / peak;
}

}  // namespace detail

/// Sum of absolute hour-to-hour changes.
inline double ramping(std::span<const double> series) {
  if (series.size() < 2) throw MetricError("ramping: series needs at least 2 values");
  const auto e = clip_non_negative(series);
  double total = 0.0;
  for (std::size_t t = 1; t < e.size(); ++t) total += std::abs(e[t] - e[t - 1]);
  return total;
}

/// 1 - mean/max, evaluated per calendar month and averaged over months.
/// `months` labels each hour; consecutive hours with the same label form one
/// window. Without labels the whole series is one window. Windows with no
/// consumption at all are skipped.
inline double one_minus_load_factor(std::span<const double> series, std::span<const int> months = {}) {
  detail::require_non_empty(series, "1-load_factor");
  const auto e = clip_non_negative(series);
  if (*std::max_element(e.begin(), e.end()) <= 0.0) {
    throw MetricError("1-load_factor: series has no positive consumption");
  }
  if (months.empty()) return detail::load_factor_gap(e);
  if (months.size() != e.size()) throw MetricError("1-load_factor: month labels do not match series length");

  double total = 0.0;
  std::size_t windows = 0;
  std::size_t begin = 0;
  while (begin < e.size()) {
    std::size_t end = begin;
    while (end < e.size() && months[end] == months[begin]) ++end;
    std::span<const double> window(e.data() + begin, end - begin);
    if (*std::max_element(window.begin(), window.end()) > 0.0) {
      total += detail::load_factor_gap(window);
      ++windows;
    }
    begin = end;
  }
  return total / static_cast<double>(windows);
}

/// Mean over consecutive 24-hour blocks of the block maximum. A trailing
/// partial block counts as its own day.
inline double average_daily_peak(std::span<const double> series, std::size_t hours_per_day = 24) {
  detail::require_non_empty(series, "average_daily_peak");
  const auto e = clip_non_negative(series);
  double total = 0.0;
  std::size_t days = 0;
  for (std::size_t begin = 0; begin < e.size(); begin += hours_per_day) {
    const std::size_t end = std::min(e.size(), begin + hours_per_day);
    total += *std::max_element(e.begin() + begin, e.begin() + end);
    ++days;
  }
  return total / static_cast<double>(days);
}

inline double peak_demand(std::span<const double> series) {
  detail::require_non_empty(series, "peak_demand");
  const auto e = clip_non_negative(series);
  return *std::max_element(e.begin(), e.end());
}

inline double net_consumption(std::span<const double> series) {
  detail::require_non_empty(series, "net_electricity_consumption");
  const auto e = clip_non_negative(series);
  return std::accumulate(e.begin(), e.end(), 0.0);
}

inline double quadratic(std::span<const double> series) {
  detail::require_non_empty(series, "quadratic");
  const auto e = clip_non_negative(series);
  double total = 0.0;
  for (double v : e) total += v * v;
  return total;
}

inline double evaluate(Metric m, std::span<const double> series, std::span<const int> months = {}) {
  switch (m) {
    case Metric::ramping: return ramping(series);
    case Metric::one_minus_load_factor: return one_minus_load_factor(series, months);
    case Metric::average_daily_peak: return average_daily_peak(series);
    case Metric::peak_demand: return peak_demand(series);
    case Metric::net_electricity_consumption: return net_consumption(series);
    case Metric::quadratic: return quadratic(series);
  }
  throw MetricError("unknown metric");
}

struct MetricScore {
  Metric metric;
  double value = 0.0;     // agent cost
  double baseline = 0.0;  // rule-based controller cost
  double normalized = 0.0;
};

struct MetricReport {
  std::vector<MetricScore> scores;
  double average_score = 0.0;

  std::optional<double> normalized(Metric m) const {
    for (const auto& s : scores) {
      if (s.metric == m) return s.normalized;
    }
    return std::nullopt;
  }
};

/// Normalizes raw costs by the baseline's and averages the ratios.
inline MetricReport normalize(std::span<const Metric> metrics, std::span<const double> agent_values,
                              std::span<const double> baseline_values) {
  if (metrics.empty()) throw MetricError("no metrics selected");
  if (agent_values.size() != metrics.size() || baseline_values.size() != metrics.size()) {
    throw MetricError("metric value count mismatch");
  }
  MetricReport report;
  double sum = 0.0;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (baseline_values[i] == 0.0) {
      throw MetricError("baseline value of " + std::string(to_string(metrics[i])) + " is zero; cannot normalize");
    }
    const double ratio = agent_values[i] / baseline_values[i];
    report.scores.push_back({metrics[i], agent_values[i], baseline_values[i], ratio});
    sum += ratio;
  }
  report.average_score = sum / static_cast<double>(metrics.size());
  return report;
}

/// Scores an agent's district series against the baseline's. Both are clipped
/// at zero before evaluation.
inline MetricReport score(std::span<const double> agent, std::span<const double> baseline,
                          std::span<const int> months = {}, std::span<const Metric> metrics = {}) {
  if (agent.size() != baseline.size()) {
    throw MetricError("agent and baseline series differ in length (" + std::to_string(agent.size()) + " vs " +
                      std::to_string(baseline.size()) + ")");
  }
  const auto defaults = challenge_metrics();
  if (metrics.empty()) metrics = defaults;
  std::vector<double> a, b;
  for (auto m : metrics) {
    a.push_back(evaluate(m, agent, months));
    b.push_back(evaluate(m, baseline, months));
  }
  return normalize(metrics, a, b);
}

// ---------------------------------------------------------------------------
// Tabular report

struct ReportRow {
  std::string label;
  MetricReport report;
};

/// Tab-separated table: one row per label, one column per metric plus the
/// average score. All rows must share the same metric list.
inline void write_report_table(std::ostream& out, std::span<const ReportRow> rows) {
  if (rows.empty()) return;
  out << "dataset";
  for (const auto& s : rows.front().report.scores) out << '\t' << to_string(s.metric);
  out << "\taverage_score\n";
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::fixed << std::setprecision(6);
  for (const auto& row : rows) {
    out << row.label;
    for (const auto& s : row.report.scores) out << '\t' << s.normalized;
    out << '\t' << row.report.average_score << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

/// Mean of several reports' normalized scores, metric by metric.
inline MetricReport average_reports(std::span<const MetricReport> reports) {
  if (reports.empty()) throw MetricError("no reports to average");
  MetricReport out;
  const auto n = static_cast<double>(reports.size());
  for (std::size_t i = 0; i < reports.front().scores.size(); ++i) {
    MetricScore s{reports.front().scores[i].metric, 0.0, 0.0, 0.0};
    for (const auto& r : reports) {
      if (r.scores.size() != reports.front().scores.size() || r.scores[i].metric != s.metric) {
        throw MetricError("reports have different metric lists");
      }
      s.value += r.scores[i].value / n;
      s.baseline += r.scores[i].baseline / n;
      s.normalized += r.scores[i].normalized / n;
    }
    out.scores.push_back(s);
  }
  for (const auto& r : reports) out.average_score += r.average_score / n;
  return out;
}

}  // namespace mgsim
