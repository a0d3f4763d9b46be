#include "survgroup/validator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "survgroup/errors.hpp"
#include "survgroup/parallel.hpp"
#include "survgroup/random.hpp"

namespace survgroup {

NullModel build_dfd(const SurvivalDataset& data, const ForestConfig& forest_config,
                    const LearnerConfig& learner_config, int runs, int m, int threads) {
  if (runs < 1) throw ArgumentError("build_dfd needs runs >= 1");
  if (m < 1) throw ArgumentError("build_dfd needs m >= 1");

  const std::size_t n = data.n();
  NullModel null_model;
  null_model.runs = runs;
  null_model.scores.assign(static_cast<std::size_t>(runs), 0.0);

  // Every run draws its own permutation and forest seed from the learner seed,
  // so the score vector is identical for any thread count.
  const std::uint64_t base = learner_config.seed;
  parallel_blocks(static_cast<std::size_t>(runs), threads,
                  [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      Rng perm_rng(mix_seed(base, 2 * r + 1));
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      for (std::size_t i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[perm_rng.below(i + 1)]);

      const SurvivalDataset permuted = data.with_permuted_outcomes(perm);
      ForestConfig run_forest = forest_config;
      run_forest.seed = mix_seed(base, 2 * r + 2);
      LearnerConfig run_learner = learner_config;
      run_learner.n_subgroups = m;
      run_learner.progress = nullptr;

      const SurvivalForest forest = SurvivalForest::fit(permuted, run_forest, 1);
      const SurvivalMatrix matrix = forest.predict_matrix(permuted, 1);
      const std::vector<SubgroupResult> found = discover(permuted, matrix, run_learner);

      double best = 0.0;
      for (const SubgroupResult& result : found)
        best = std::max(best, result.exceptionality);
      null_model.scores[r] = best;
    }
  });

  double sum = 0.0;
  for (const double s : null_model.scores) sum += s;
  null_model.mu = sum / static_cast<double>(runs);
  double sq = 0.0;
  for (const double s : null_model.scores) sq += (s - null_model.mu) * (s - null_model.mu);
  null_model.eta = std::sqrt(sq / static_cast<double>(runs));
  return null_model;
}

double p_value(double score, const NullModel& null_model) {
  if (null_model.runs < 1) throw ArgumentError("null model has no runs");
  if (null_model.eta == 0.0) return score > null_model.mu ? 0.0 : 1.0;
  const double z = (score - null_model.mu) / null_model.eta;
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

std::vector<std::pair<double, bool>> bonferroni(std::span<const double> p_values,
                                                double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  const double k = static_cast<double>(p_values.size());
  std::vector<std::pair<double, bool>> out;
  out.reserve(p_values.size());
  for (const double p : p_values) {
    if (!(p >= 0.0) || !(p <= 1.0)) throw ArgumentError("p-values must lie in [0, 1]");
    const double adjusted = std::min(1.0, p * k);
    out.emplace_back(adjusted, adjusted < alpha);
  }
  return out;
}

}  // namespace survgroup
