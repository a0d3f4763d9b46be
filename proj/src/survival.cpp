#include "survgroup/survival.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "survgroup/errors.hpp"

namespace survgroup {

namespace {

constexpr double kZ95 = 1.959963984540054;  // two-sided 95% normal quantile

void check_outcome_lengths(std::span<const double> times, std::span<const std::uint8_t> events) {
  if (times.size() != events.size())
    throw ShapeError("times length " + std::to_string(times.size()) + " != events length " +
                     std::to_string(events.size()));
}

// %.17g: shortest text that still round-trips a double, fixed across runs.
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double StepCurve::at(double t) const {
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  if (it == grid.begin()) return 1.0;
  return values[static_cast<std::size_t>(it - grid.begin()) - 1];
}

StepCurve kaplan_meier(std::span<const double> times, std::span<const std::uint8_t> events) {
  check_outcome_lengths(times, events);
  if (times.empty()) throw EstimationError("cannot estimate a survival curve from no subjects");

  // (time, event) pairs sorted by time, events first at ties so a subject
  // censored at t still counts as at risk for the events at t.
  std::vector<std::pair<double, std::uint8_t>> obs(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) obs[i] = {times[i], events[i]};
  std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  });

  StepCurve curve;
  double survival = 1.0;
  double greenwood = 0.0;  // sum d / (r (r - d))
  std::size_t at_risk = obs.size();
  std::size_t idx = 0;
  bool any_event = false;
  while (idx < obs.size()) {
    const double t = obs[idx].first;
    std::size_t group = 0, d = 0;
    while (idx + group < obs.size() && obs[idx + group].first == t) {
      d += obs[idx + group].second;
      ++group;
    }
    if (d > 0) {
      any_event = true;
      const double r = static_cast<double>(at_risk);
      survival *= 1.0 - static_cast<double>(d) / r;
      curve.grid.push_back(t);
      curve.values.push_back(survival);
      if (survival > 0.0) {
        greenwood += static_cast<double>(d) / (r * (r - static_cast<double>(d)));
        // log-log transform: theta = ln(-ln S), se = sqrt(V)/|ln S|; the
        // resulting bands S^{exp(+-z se)} cannot leave [0,1].
        const double log_s = std::log(survival);
        const double se = std::sqrt(greenwood) / std::fabs(log_s);
        curve.lower.push_back(std::pow(survival, std::exp(kZ95 * se)));
        curve.upper.push_back(std::pow(survival, std::exp(-kZ95 * se)));
      } else {
        curve.lower.push_back(0.0);
        curve.upper.push_back(0.0);
      }
    }
    at_risk -= group;
    idx += group;
  }
  if (!any_event)
    throw DegenerateError("selection has zero events; the survival curve is degenerate");
  return curve;
}

StepCurve kaplan_meier(std::span<const double> times, std::span<const std::uint8_t> events,
                       std::span<const std::uint8_t> mask) {
  check_outcome_lengths(times, events);
  if (mask.size() != times.size())
    throw ShapeError("mask length " + std::to_string(mask.size()) + " != times length " +
                     std::to_string(times.size()));
  std::vector<double> sel_times;
  std::vector<std::uint8_t> sel_events;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      sel_times.push_back(times[i]);
      sel_events.push_back(events[i]);
    }
  }
  if (sel_times.empty()) throw EstimationError("mask selects no subjects");
  return kaplan_meier(sel_times, sel_events);
}

double logrank_statistic(std::span<const std::uint8_t> mask, std::span<const double> times,
                         std::span<const std::uint8_t> events) {
  check_outcome_lengths(times, events);
  if (mask.size() != times.size())
    throw ShapeError("mask length " + std::to_string(mask.size()) + " != times length " +
                     std::to_string(times.size()));
  std::size_t selected = 0;
  for (const auto m : mask) selected += m ? 1 : 0;
  if (selected == 0 || selected == mask.size())
    throw ComparisonError("logrank needs a non-empty proper subset of subjects");

  std::vector<std::size_t> order(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  double observed = 0.0, expected = 0.0, variance = 0.0;
  std::size_t at_risk = times.size();
  std::size_t at_risk_sel = selected;
  std::size_t idx = 0;
  while (idx < order.size()) {
    const double t = times[order[idx]];
    std::size_t group = 0, group_sel = 0, d = 0, d_sel = 0;
    while (idx + group < order.size() && times[order[idx + group]] == t) {
      const std::size_t i = order[idx + group];
      group_sel += mask[i] ? 1 : 0;
      if (events[i]) {
        ++d;
        d_sel += mask[i] ? 1 : 0;
      }
      ++group;
    }
    if (d > 0) {
      const double r = static_cast<double>(at_risk);
      const double r_sel = static_cast<double>(at_risk_sel);
      const double dd = static_cast<double>(d);
      observed += static_cast<double>(d_sel);
      expected += dd * r_sel / r;
      if (at_risk > 1)
        variance += dd * r_sel * (r - r_sel) * (r - dd) / (r * r * (r - 1.0));
    }
    at_risk -= group;
    at_risk_sel -= group_sel;
    idx += group;
  }
  if (variance == 0.0) return 0.0;  // no event time discriminates the groups
  const double diff = observed - expected;
  return diff * diff / variance;
}

double trapezoid_abs_diff(std::span<const double> values_a, std::span<const double> values_b,
                          std::span<const double> grid) {
  if (values_a.size() != values_b.size() || values_a.size() != grid.size())
    throw ShapeError("trapezoid_abs_diff needs three equal-length vectors (got " +
                     std::to_string(values_a.size()) + ", " + std::to_string(values_b.size()) +
                     ", " + std::to_string(grid.size()) + ")");
  const std::size_t m = grid.size();
  if (m < 2) return 0.0;
  for (std::size_t u = 1; u < m; ++u) {
    if (!(grid[u] > grid[u - 1])) throw GridError("grid must be strictly ascending");
  }
  double total = 0.0;
  double prev = std::fabs(values_a[0] - values_b[0]);
  for (std::size_t u = 1; u < m; ++u) {
    const double cur = std::fabs(values_a[u] - values_b[u]);
    total += (grid[u] - grid[u - 1]) * 0.5 * (prev + cur);
    prev = cur;
  }
  return total;
}

double restricted_mean(const StepCurve& curve, double horizon) {
  if (!std::isfinite(horizon) || horizon <= 0.0)
    throw ArgumentError("restricted_mean horizon must be a finite value > 0");
  double area = 0.0;
  double prev_t = 0.0, prev_v = 1.0;
  for (std::size_t i = 0; i < curve.grid.size() && curve.grid[i] < horizon; ++i) {
    if (curve.grid[i] > prev_t) area += (curve.grid[i] - prev_t) * prev_v;
    prev_t = std::max(prev_t, curve.grid[i]);
    prev_v = curve.values[i];
  }
  if (horizon > prev_t) area += (horizon - prev_t) * prev_v;
  return area;
}

void write_tsv(std::ostream& out, const StepCurve& curve) {
  out << "x\ty\ty_c0\ty_c1\n";
  if (curve.grid.empty() || curve.grid.front() > 0.0) out << "0\t1\t1\t1\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    const double lo = curve.has_bands() ? curve.lower[i] : curve.values[i];
    const double hi = curve.has_bands() ? curve.upper[i] : curve.values[i];
    out << format_double(curve.grid[i]) << '\t' << format_double(curve.values[i]) << '\t'
        << format_double(lo) << '\t' << format_double(hi) << '\n';
  }
}

}  // namespace survgroup
