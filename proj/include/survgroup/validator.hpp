#pragma once

#include <span>
#include <utility>
#include <vector>

#include "survgroup/dataset.hpp"
#include "survgroup/forest.hpp"
#include "survgroup/learner.hpp"

namespace survgroup {

// Gaussian summary of the distribution of false discoveries (DFD): the
// exceptionality one can expect from data where covariates and outcomes are
// independent by construction. The raw per-run score sample is kept for
// callers who prefer empirical quantiles over the normal approximation.
struct NullModel {
  double mu = 0.0;
  double eta = 0.0;  // population standard deviation (so runs=1 gives 0)
  int runs = 0;
  std::vector<double> scores;
};

// For each run: jointly permute (time, event) against the covariate rows,
// refit the forest from scratch, discover m subgroups with accumulated
// predecessors, and record the maximum hard-membership exceptionality among
// them. All per-run seeds (permutation, forest) derive from
// learner_config.seed via tagged streams, so the result is deterministic and
// independent of worker count. Runs execute in parallel across `threads`.
// Practical nulls want runs >= 1000.
NullModel build_dfd(const SurvivalDataset& data, const ForestConfig& forest_config,
                    const LearnerConfig& learner_config, int runs, int m, int threads = 1);

// Upper-tail Z-test p = 1 - Phi((score - mu)/eta). A degenerate null
// (eta = 0) yields 0 when score > mu and 1 otherwise; callers should warn.
double p_value(double score, const NullModel& null_model);

// Bonferroni: adjusted = min(1, p * k); significant iff adjusted < alpha.
std::vector<std::pair<double, bool>> bonferroni(std::span<const double> p_values,
                                                double alpha = 0.05);

}  // namespace survgroup
