#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace survgroup {

// A right-continuous, non-increasing survival function sampled on an ascending
// time grid. The function is 1 on [0, grid.front()) and holds values[i] on
// [grid[i], grid[i+1]). lower/upper are 95% confidence bands when present.
struct StepCurve {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> lower;
  std::vector<double> upper;

  bool has_bands() const { return !lower.empty(); }

  // Step evaluation at time t (1 before the first grid point).
  double at(double t) const;
};

// Product-limit estimate at the event times of the selection, with 95% bands
// from the Greenwood variance under the log-log transform (so bands stay in
// [0,1]; they collapse onto the estimate where it reaches 0). At tied times,
// events are processed before censorings.
StepCurve kaplan_meier(std::span<const double> times, std::span<const std::uint8_t> events);
StepCurve kaplan_meier(std::span<const double> times, std::span<const std::uint8_t> events,
                       std::span<const std::uint8_t> mask);

// Two-sample chi-square logrank statistic (O-E)^2/V, selection vs complement,
// with the hypergeometric variance. Returns 0 when V = 0 (no event time
// carries discriminating information). Symmetric in mask/complement.
double logrank_statistic(std::span<const std::uint8_t> mask, std::span<const double> times,
                         std::span<const std::uint8_t> events);

// Trapezoidal integral of |a - b| over the grid:
//   sum_u (grid[u+1]-grid[u])/2 * (|a-b|[u] + |a-b|[u+1]).
// Returns 0 for fewer than two points.
double trapezoid_abs_diff(std::span<const double> values_a, std::span<const double> values_b,
                          std::span<const double> grid);

// Area under the step curve on [0, horizon] (restricted mean survival time),
// with value 1 assumed before the first grid point.
double restricted_mean(const StepCurve& curve, double horizon);

// TSV with columns x, y, y_c0, y_c1 (time, survival, band bounds), preceded by
// an anchor row at (0, 1, 1, 1) unless the curve already starts at time 0.
// Bands fall back to the values column when absent.
void write_tsv(std::ostream& out, const StepCurve& curve);

}  // namespace survgroup
