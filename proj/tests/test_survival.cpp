#include "survgroup/survival.hpp"

#include <sstream>
#include <vector>

#include "doctest.h"
#include "survgroup/errors.hpp"

using namespace survgroup;

TEST_CASE("kaplan_meier matches the product-limit estimate by hand") {
  const std::vector<double> times{1.0, 2.0, 3.0};
  const std::vector<std::uint8_t> events{1, 0, 1};
  const StepCurve curve = kaplan_meier(times, events);
  REQUIRE(curve.grid == std::vector<double>{1.0, 3.0});
  CHECK(curve.values[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(curve.values[1] == doctest::Approx(0.0));

  CHECK(curve.at(0.5) == 1.0);
  CHECK(curve.at(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(curve.at(2.9) == doctest::Approx(2.0 / 3.0));
  CHECK(curve.at(3.0) == doctest::Approx(0.0));
  CHECK(curve.at(100.0) == doctest::Approx(0.0));
}

TEST_CASE("kaplan_meier handles event-before-censoring at tied times") {
  const std::vector<double> times{1.0, 1.0, 2.0};
  const std::vector<std::uint8_t> events{1, 0, 1};
  const StepCurve curve = kaplan_meier(times, events);
  REQUIRE(curve.grid == std::vector<double>{1.0, 2.0});
  CHECK(curve.values[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(curve.values[1] == doctest::Approx(0.0));
}

// Reference triples computed independently with the log-log Greenwood formula
// at the two-sided 95% level.
TEST_CASE("kaplan_meier confidence bands match an external oracle") {
  const std::vector<double> times{1.0, 2.0, 3.0, 4.0, 6.0};
  const std::vector<std::uint8_t> events{1, 0, 1, 1, 0};
  const StepCurve curve = kaplan_meier(times, events);
  REQUIRE(curve.grid == std::vector<double>{1.0, 3.0, 4.0});
  REQUIRE(curve.has_bands());

  CHECK(curve.values[0] == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(curve.lower[0] == doctest::Approx(0.20380926326763904).epsilon(1e-12));
  CHECK(curve.upper[0] == doctest::Approx(0.9691797888667427).epsilon(1e-12));

  CHECK(curve.values[1] == doctest::Approx(0.5333333333333333).epsilon(1e-14));
  CHECK(curve.lower[1] == doctest::Approx(0.06833208784720282).epsilon(1e-12));
  CHECK(curve.upper[1] == doctest::Approx(0.8630711827387925).epsilon(1e-12));

  CHECK(curve.values[2] == doctest::Approx(0.26666666666666666).epsilon(1e-14));
  CHECK(curve.lower[2] == doctest::Approx(0.00967700057888134).epsilon(1e-12));
  CHECK(curve.upper[2] == doctest::Approx(0.686136279157012).epsilon(1e-12));

  for (std::size_t u = 0; u < curve.grid.size(); ++u) {
    CHECK(curve.lower[u] >= 0.0);
    CHECK(curve.lower[u] <= curve.values[u]);
    CHECK(curve.values[u] <= curve.upper[u]);
    CHECK(curve.upper[u] <= 1.0);
    if (u > 0) CHECK(curve.values[u] <= curve.values[u - 1]);
  }
}

TEST_CASE("kaplan_meier bands collapse where the estimate reaches zero") {
  const std::vector<double> times{1.0, 2.0, 3.0};
  const std::vector<std::uint8_t> events{1, 1, 1};
  const StepCurve curve = kaplan_meier(times, events);
  CHECK(curve.values.back() == 0.0);
  CHECK(curve.lower.back() == 0.0);
  CHECK(curve.upper.back() == 0.0);
}

TEST_CASE("masked kaplan_meier equals the subset estimate") {
  const std::vector<double> times{1.0, 5.0, 2.0, 4.0, 3.0, 6.0};
  const std::vector<std::uint8_t> events{1, 1, 0, 1, 1, 0};
  const std::vector<std::uint8_t> mask{1, 0, 1, 0, 1, 1};

  const StepCurve masked = kaplan_meier(times, events, mask);
  const std::vector<double> sel_times{1.0, 2.0, 3.0, 6.0};
  const std::vector<std::uint8_t> sel_events{1, 0, 1, 0};
  const StepCurve direct = kaplan_meier(sel_times, sel_events);
  REQUIRE(masked.grid == direct.grid);
  for (std::size_t u = 0; u < masked.grid.size(); ++u) {
    CHECK(masked.values[u] == direct.values[u]);
    CHECK(masked.lower[u] == direct.lower[u]);
    CHECK(masked.upper[u] == direct.upper[u]);
  }
}

TEST_CASE("kaplan_meier rejects degenerate selections") {
  const std::vector<double> times{1.0, 2.0};
  const std::vector<std::uint8_t> events{1, 1};
  CHECK_THROWS_AS(kaplan_meier(std::vector<double>{}, std::vector<std::uint8_t>{}),
                  EstimationError);
  CHECK_THROWS_AS(kaplan_meier(times, std::vector<std::uint8_t>{1}), ShapeError);
  CHECK_THROWS_AS(kaplan_meier(times, events, std::vector<std::uint8_t>{1}), ShapeError);
  CHECK_THROWS_AS(kaplan_meier(times, events, std::vector<std::uint8_t>{0, 0}),
                  EstimationError);
  const std::vector<std::uint8_t> censored{0, 0};
  CHECK_THROWS_AS(kaplan_meier(times, censored), DegenerateError);
}

// Chi-square values computed independently with exact rational arithmetic.
TEST_CASE("logrank_statistic matches exact-fraction oracles") {
  const std::vector<double> t1{1, 1, 2, 3, 3, 4, 5, 5, 6, 7};
  const std::vector<std::uint8_t> e1{1, 0, 1, 1, 1, 0, 1, 1, 0, 1};
  const std::vector<std::uint8_t> m1{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
  CHECK(logrank_statistic(m1, t1, e1) ==
        doctest::Approx(1.0520547945205478).epsilon(1e-14));  // 384/365

  const std::vector<double> t2{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<std::uint8_t> e2(10, 1);
  const std::vector<std::uint8_t> m2{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  CHECK(logrank_statistic(m2, t2, e2) ==
        doctest::Approx(9.7007428200777603).epsilon(1e-14));  // 2647129/272879

  // symmetric in selection vs complement (up to rounding of the per-group
  // expected counts)
  std::vector<std::uint8_t> inv(m1.size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = m1[i] ? 0 : 1;
  CHECK(logrank_statistic(inv, t1, e1) ==
        doctest::Approx(logrank_statistic(m1, t1, e1)).epsilon(1e-12));
}

TEST_CASE("logrank_statistic handles no-information and bad selections") {
  const std::vector<double> times{1, 2, 3};
  const std::vector<std::uint8_t> none{0, 0, 0};
  const std::vector<std::uint8_t> mask{1, 0, 0};
  CHECK(logrank_statistic(mask, times, none) == 0.0);  // zero variance
  const std::vector<std::uint8_t> events{1, 1, 1};
  const std::vector<std::uint8_t> all{1, 1, 1};
  CHECK_THROWS_AS(logrank_statistic(all, times, events), ComparisonError);
  CHECK_THROWS_AS(logrank_statistic(none, times, events), ComparisonError);
  CHECK_THROWS_AS(logrank_statistic(std::vector<std::uint8_t>{1, 0}, times, events), ShapeError);
}

TEST_CASE("trapezoid_abs_diff integrates hand-computed examples exactly") {
  const std::vector<double> grid{0.0, 1.0, 2.0};
  CHECK(trapezoid_abs_diff(std::vector<double>{0, 1, 0}, std::vector<double>{0, 0, 0}, grid) ==
        doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> grid2{0.0, 2.0, 5.0};
  CHECK(trapezoid_abs_diff(std::vector<double>{1, 1, 1}, std::vector<double>{0, 0, 0}, grid2) ==
        doctest::Approx(5.0).epsilon(1e-15));
  // order of arguments is irrelevant
  const std::vector<double> a{0.9, 0.4, 0.1}, b{0.7, 0.6, 0.3};
  CHECK(trapezoid_abs_diff(a, b, grid) == trapezoid_abs_diff(b, a, grid));
  // fewer than two points integrates nothing
  CHECK(trapezoid_abs_diff(std::vector<double>{1.0}, std::vector<double>{0.0},
                           std::vector<double>{3.0}) == 0.0);
}

TEST_CASE("trapezoid_abs_diff validates shapes and grid order") {
  const std::vector<double> grid{0.0, 1.0};
  CHECK_THROWS_AS(
      trapezoid_abs_diff(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}, grid),
      ShapeError);
  CHECK_THROWS_AS(trapezoid_abs_diff(std::vector<double>{1, 2}, std::vector<double>{1, 2},
                                     std::vector<double>{1.0, 1.0}),
                  GridError);
  CHECK_THROWS_AS(trapezoid_abs_diff(std::vector<double>{1, 2}, std::vector<double>{1, 2},
                                     std::vector<double>{2.0, 1.0}),
                  GridError);
}

TEST_CASE("restricted_mean accumulates step areas from time zero") {
  StepCurve curve;
  curve.grid = {1.0, 2.0};
  curve.values = {0.5, 0.25};
  CHECK(restricted_mean(curve, 3.0) == doctest::Approx(1.75).epsilon(1e-14));
  CHECK(restricted_mean(curve, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(restricted_mean(curve, 1.5) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK_THROWS_AS(restricted_mean(curve, 0.0), ArgumentError);
  CHECK_THROWS_AS(restricted_mean(curve, -1.0), ArgumentError);
}

TEST_CASE("write_tsv emits a header, an anchor row, and band fallbacks") {
  StepCurve curve;
  curve.grid = {1.0, 2.0};
  curve.values = {0.5, 0.25};
  std::ostringstream out;
  write_tsv(out, curve);
  std::istringstream lines(out.str());
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "x\ty\ty_c0\ty_c1");
  REQUIRE(std::getline(lines, line));
  CHECK(line.substr(0, 2) == "0\t");  // anchor at (0, 1, 1, 1)
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 2);
}
