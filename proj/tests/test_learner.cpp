#include "survgroup/learner.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "survgroup/errors.hpp"
#include "survgroup/pruner.hpp"
#include "survgroup/random.hpp"
#include "survgroup/softrule.hpp"
#include "survgroup/survival.hpp"
#include "survgroup/synthetic.hpp"
#include "test_util.hpp"

using namespace survgroup;

namespace {

SurvivalMatrix hand_matrix() {
  SurvivalMatrix matrix;
  matrix.rows = 2;
  matrix.cols = 3;
  matrix.grid = {1.0, 2.0, 3.0};
  matrix.data = {1.0, 0.5, 0.0, 0.8, 0.8, 0.8};
  return matrix;
}

}  // namespace

TEST_CASE("exceptionality_vector is the per-row integrated absolute deviation") {
  const SurvivalMatrix matrix = hand_matrix();
  const std::vector<double> reference{1.0, 0.5, 0.0};
  const std::vector<double> ell = exceptionality_vector(matrix, reference);
  REQUIRE(ell.size() == 2);
  CHECK(ell[0] == 0.0);  // row 0 equals the reference
  CHECK(ell[1] == doctest::Approx(trapezoid_abs_diff(matrix.row(1), reference, matrix.grid))
                      .epsilon(1e-14));
  // |0.8-1|, |0.8-0.5|, |0.8-0| = 0.2, 0.3, 0.8 -> 0.25 + 0.55 = 0.8
  CHECK(ell[1] == doctest::Approx(0.8).epsilon(1e-14));

  CHECK_THROWS_AS(exceptionality_vector(matrix, std::vector<double>{1.0, 0.5}), ShapeError);

  StepCurve wrong_grid;
  wrong_grid.grid = {1.0, 2.0, 4.0};
  wrong_grid.values = reference;
  CHECK_THROWS_AS(exceptionality_vector(matrix, wrong_grid), GridError);

  StepCurve ok;
  ok.grid = matrix.grid;
  ok.values = reference;
  CHECK(exceptionality_vector(matrix, ok) == ell);
}

TEST_CASE("soft_objective is S^gamma times the weighted mean exceptionality") {
  const std::vector<double> ell{1.0, 2.0, 3.0, 4.0};

  // full membership: mean exceptionality regardless of gamma
  const std::vector<double> ones(4, 1.0);
  CHECK(soft_objective(ones, ell, 0.3) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(soft_objective(ones, ell, 0.0) == doctest::Approx(2.5).epsilon(1e-14));

  // gamma = 0 removes the size term entirely; zero memberships still
  // contribute at the documented 1e-9 floor
  const double fl = 1e-9;
  const std::vector<double> half{0.0, 0.0, 1.0, 1.0};
  const double phi_half = (fl * 1.0 + fl * 2.0 + 3.0 + 4.0) / (fl + fl + 1.0 + 1.0);
  CHECK(soft_objective(half, ell, 0.0) == doctest::Approx(phi_half).epsilon(1e-12));
  CHECK(soft_objective(half, ell, 0.0) == doctest::Approx(3.5).epsilon(1e-8));

  // frozen size power: S = (1 + 3 floors)/4, phi = 1, gamma = 0.05
  const std::vector<double> quarter{1.0, 0.0, 0.0, 0.0};
  const std::vector<double> unit_ell{1.0, 1.0, 1.0, 1.0};
  CHECK(soft_objective(quarter, unit_ell, 0.05) ==
        doctest::Approx(std::pow((1.0 + 3 * fl) / 4.0, 0.05)).epsilon(1e-12));
  CHECK(soft_objective(quarter, unit_ell, 0.05) ==
        doctest::Approx(0.93303299153680742).epsilon(1e-8));

  CHECK_THROWS_AS(soft_objective(std::vector<double>{1.0}, ell, 0.1), ShapeError);
  CHECK_THROWS_AS(soft_objective(std::vector<double>{}, std::vector<double>{}, 0.1),
                  ShapeError);
}

TEST_CASE("soft_objective equals the un-normalized objective divided by n") {
  // sum(m * ell) * (sum(m)/n)^(gamma-1) is exactly n times S^gamma * phi.
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    std::vector<double> m(n), ell(n);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = rng.uniform();
      ell[i] = rng.uniform() * 3.0;
    }
    const double gamma = rng.uniform();
    double weighted = 0.0, size_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weighted += m[i] * ell[i];
      size_sum += m[i];
    }
    const double unnormalized = weighted * std::pow(size_sum / n, gamma - 1.0);
    CHECK(soft_objective(m, ell, gamma) ==
          doctest::Approx(unnormalized / n).epsilon(1e-12));
  }
}

TEST_CASE("full_objective adds predecessor deviation terms with decaying exponents") {
  const std::vector<double> m{1.0, 1.0, 0.0, 0.0};
  const std::vector<double> ell{2.0, 2.0, 1.0, 1.0};
  const double gamma = 0.4;

  CHECK(full_objective(m, ell, {}, gamma) ==
        doctest::Approx(soft_objective(m, ell, gamma)).epsilon(1e-14));

  // constant predecessor exceptionality makes the extra terms S^(gamma/g) * c_g
  std::vector<PredecessorTerm> preds(2);
  preds[0].exceptionality = {3.0, 3.0, 3.0, 3.0};
  preds[1].exceptionality = {5.0, 5.0, 5.0, 5.0};
  const double S = (1.0 + 1.0 + 1e-9 + 1e-9) / 4.0;  // floored size share
  const double expected = soft_objective(m, ell, gamma) +
                          std::pow(S, gamma / 1.0) * 3.0 + std::pow(S, gamma / 2.0) * 5.0;
  CHECK(full_objective(m, ell, preds, gamma) == doctest::Approx(expected).epsilon(1e-12));

  std::vector<PredecessorTerm> bad(1);
  bad[0].exceptionality = {1.0, 2.0};
  CHECK_THROWS_AS(full_objective(m, ell, bad, gamma), ShapeError);
}

TEST_CASE("a predecessor coincident with the candidate contributes nothing") {
  // Members predicted identically deviate zero from their own average curve.
  const std::vector<double> m{1.0, 1.0, 1.0, 0.0, 0.0, 0.0};
  const std::vector<double> ell{1.0, 1.0, 1.0, 0.2, 0.2, 0.2};
  std::vector<PredecessorTerm> preds(1);
  preds[0].exceptionality = {0.0, 0.0, 0.0, 4.0, 4.0, 4.0};
  const double with_pred = full_objective(m, ell, preds, 0.1);
  const double without = soft_objective(m, ell, 0.1);
  CHECK(std::abs(with_pred - without) < 1e-8);
}

TEST_CASE("degenerate memberships and bad configs are rejected") {
  const std::vector<double> ell{1.0, 2.0};
  CHECK_THROWS_AS(soft_objective(std::vector<double>{0.0, 0.0}, ell, 0.1), DegenerateError);

  const auto data = testutil::make_uniform_data(60, 2, 5);
  ForestConfig fc;
  fc.n_trees = 5;
  fc.seed = 1;
  const SurvivalMatrix matrix = SurvivalForest::fit(data, fc).predict_matrix(data);

  LearnerConfig lc;
  lc.epochs = 8;
  auto expect_config_error = [&](auto mutate) {
    LearnerConfig bad = lc;
    mutate(bad);
    CHECK_THROWS_AS(learn_subgroup(data, matrix, {}, bad), ConfigError);
  };
  expect_config_error([](LearnerConfig& c) { c.gamma = -0.1; });
  expect_config_error([](LearnerConfig& c) { c.gamma = 1.5; });
  expect_config_error([](LearnerConfig& c) { c.epochs = 3; });
  expect_config_error([](LearnerConfig& c) { c.learning_rate = 0.0; });
  expect_config_error([](LearnerConfig& c) { c.initial_temperature = 0.0; });
  expect_config_error([](LearnerConfig& c) { c.n_subgroups = 0; });
  expect_config_error([](LearnerConfig& c) { c.gamma_decay = 0.0; });
  expect_config_error([](LearnerConfig& c) { c.gamma_decay = 1.5; });

  SurvivalMatrix wrong = matrix;
  wrong.rows -= 1;
  wrong.data.resize(wrong.rows * wrong.cols);
  CHECK_THROWS_AS(learn_subgroup(data, wrong, {}, lc), ShapeError);
}

TEST_CASE("learn_subgroup anneals the temperature to a quarter") {
  const auto data = testutil::make_uniform_data(80, 2, 6);
  ForestConfig fc;
  fc.n_trees = 5;
  fc.seed = 2;
  const SurvivalMatrix matrix = SurvivalForest::fit(data, fc).predict_matrix(data);

  LearnerConfig lc;
  lc.epochs = 12;
  lc.initial_temperature = 0.4;
  const SoftRuleParams params = learn_subgroup(data, matrix, {}, lc);
  CHECK(params.temperature == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(params.alpha.size() == data.p());
  CHECK(params.beta.size() == data.p());
  CHECK(params.weights.size() == data.p());
}

TEST_CASE("progress hook fires once per epoch with finite losses") {
  const auto data = testutil::make_uniform_data(80, 2, 7);
  ForestConfig fc;
  fc.n_trees = 5;
  fc.seed = 3;
  const SurvivalMatrix matrix = SurvivalForest::fit(data, fc).predict_matrix(data);

  int calls = 0;
  int last_epoch = -1;
  bool finite = true;
  LearnerConfig lc;
  lc.epochs = 10;
  lc.progress = [&](int epoch, double loss, double mean_membership) {
    ++calls;
    if (epoch <= last_epoch) finite = false;
    last_epoch = epoch;
    if (!std::isfinite(loss) || !std::isfinite(mean_membership)) finite = false;
  };
  learn_subgroup(data, matrix, {}, lc);
  CHECK(calls == 10);
  CHECK(finite);
}

TEST_CASE("discover recovers a planted subgroup at desk scale") {
  SynthConfig sc;
  sc.n = 2000;
  sc.p = 5;
  ForestConfig fc;
  fc.n_trees = 50;
  LearnerConfig lc;
  lc.epochs = 400;

  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    sc.seed = mix_seed(seed, 4);
    fc.seed = mix_seed(seed, 1);
    lc.seed = mix_seed(seed, 2);
    auto [data, truth] = make_survival_data(sc);
    const auto results = discover(data, fc, lc, 1);
    REQUIRE(results.size() == 1);
    const double f1 = recovery_f1(results[0].mask, truth.mask);
    CHECK(f1 >= 0.5);
    total += f1;

    // result invariants
    const auto& r = results[0];
    CHECK(r.mask.size() == data.n());
    std::size_t count = 0;
    for (const auto v : r.mask) count += v;
    CHECK(count == r.size);
    CHECK(r.exceptionality >= 0.0);
    CHECK_FALSE(r.km_curve.grid.empty());
    CHECK_FALSE(r.p_value.has_value());  // no validation requested
  }
  CHECK(total / 3.0 >= 0.6);
}

TEST_CASE("discover is deterministic given seeds") {
  SynthConfig sc;
  sc.n = 600;
  sc.p = 4;
  sc.seed = mix_seed(5, 4);
  auto [data, truth] = make_survival_data(sc);
  ForestConfig fc;
  fc.n_trees = 20;
  fc.seed = mix_seed(5, 1);
  LearnerConfig lc;
  lc.epochs = 60;
  lc.seed = mix_seed(5, 2);

  const auto a = discover(data, fc, lc, 1);
  const auto b = discover(data, fc, lc, 2);
  REQUIRE(a.size() == b.size());
  CHECK(a[0].mask == b[0].mask);
  CHECK(a[0].exceptionality == b[0].exceptionality);
  CHECK(a[0].soft_params.alpha == b[0].soft_params.alpha);
  CHECK(a[0].soft_params.beta == b[0].soft_params.beta);
}

TEST_CASE("a single round equals learn_subgroup plus harden") {
  SynthConfig sc;
  sc.n = 500;
  sc.p = 3;
  sc.seed = mix_seed(6, 4);
  auto [data, truth] = make_survival_data(sc);
  ForestConfig fc;
  fc.n_trees = 20;
  fc.seed = mix_seed(6, 1);
  LearnerConfig lc;
  lc.epochs = 50;
  lc.seed = mix_seed(6, 2);

  const SurvivalMatrix matrix = SurvivalForest::fit(data, fc).predict_matrix(data);
  const SoftRuleParams direct = learn_subgroup(data, matrix, {}, lc);
  const auto results = discover(data, matrix, lc);
  REQUIRE(results.size() == 1);
  CHECK(results[0].soft_params.alpha == direct.alpha);
  CHECK(results[0].soft_params.beta == direct.beta);
  CHECK(results[0].soft_params.weights == direct.weights);
  CHECK(results[0].mask == membership(harden(direct, data), data));
}

TEST_CASE("later rounds are pushed away from the first subgroup") {
  // One strong slow-hazard box and one mild fast-hazard group on separate
  // features; the predecessor term must keep round two off round one.
  const std::size_t n = 1500, p = 4;
  Rng rng(42);
  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) cols[j][i] = rng.uniform();
  std::vector<double> times(n);
  std::vector<std::uint8_t> events(n, 1), strong(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double scale = 1.0;
    if (cols[0][i] < 0.3) scale = 0.55;
    else if (cols[1][i] >= 0.7) {
      scale = 4.0;
      strong[i] = 1;
    }
    times[i] = scale * std::pow(-std::log(1.0 - rng.uniform()), 1.0 / 1.5);
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("f" + std::to_string(j + 1));
  const SurvivalDataset data(std::move(cols), std::move(times), std::move(events),
                             std::move(names));

  ForestConfig fc;
  fc.seed = 7;
  LearnerConfig lc;
  lc.seed = 11;
  lc.epochs = 400;
  lc.n_subgroups = 2;
  const auto results = discover(data, fc, lc, 1);
  REQUIRE(results.size() == 2);
  CHECK(jaccard(results[0].mask, strong) > 0.5);
  CHECK(jaccard(results[0].mask, results[1].mask) < 0.5);
}

TEST_CASE("without outcome signal the rule stays near the population") {
  const auto data = testutil::make_uniform_data(400, 3, 9);
  ForestConfig fc;
  fc.n_trees = 25;
  fc.seed = 31;
  LearnerConfig lc;
  lc.epochs = 200;
  const auto results = discover(data, fc, lc, 1);
  REQUIRE(results.size() == 1);
  CHECK(results[0].size >= data.n() / 2);
}

TEST_CASE("a constant feature neither crashes nor poisons discovery") {
  SynthConfig sc;
  sc.n = 500;
  sc.p = 3;
  sc.seed = mix_seed(12, 4);
  auto [base, truth] = make_survival_data(sc);

  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < base.p(); ++j) {
    const auto col = base.column(j);
    cols.emplace_back(col.begin(), col.end());
  }
  cols.push_back(std::vector<double>(base.n(), 7.5));
  std::vector<std::string> names = base.feature_names();
  names.push_back("constant");
  const SurvivalDataset data(std::move(cols), base.times(), base.events(), std::move(names));

  ForestConfig fc;
  fc.n_trees = 20;
  fc.seed = mix_seed(12, 1);
  LearnerConfig lc;
  lc.epochs = 60;
  lc.seed = mix_seed(12, 2);
  const auto a = discover(data, fc, lc, 1);
  const auto b = discover(data, fc, lc, 1);
  REQUIRE(a.size() == 1);
  CHECK(a[0].mask == b[0].mask);
  for (const auto& cond : a[0].rule.conditions) CHECK(cond.feature < data.p());
}
