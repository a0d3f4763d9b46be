#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "survgroup/dataset.hpp"
#include "survgroup/forest.hpp"
#include "survgroup/softrule.hpp"
#include "survgroup/survival.hpp"

namespace survgroup {

struct LearnerConfig {
  double gamma = 0.1;                // size penalty exponent in [0,1]
  double initial_temperature = 0.2;  // annealed to /4 over the run
  int epochs = 1000;                 // >= 4 (annealing marks at 1/2 and 3/4)
  double learning_rate = 0.01;
  int n_subgroups = 1;
  std::uint64_t seed = 0;
  double gamma_decay = 1.0;  // per-subgroup multiplicative gamma annealing; 1 = off
  // Optional per-epoch hook: (epoch, loss, mean soft membership).
  std::function<void(int, double, double)> progress;
};

struct SubgroupResult {
  SoftRuleParams soft_params;
  HardRule rule;
  std::vector<std::uint8_t> mask;
  std::size_t size = 0;
  double exceptionality = 0.0;  // mean per-subject exceptionality over hard members
  StepCurve km_curve;
  std::optional<double> p_value;
  std::optional<bool> significant;
};

// Per-subject integrated absolute deviation from the reference:
// entry i = trapezoid_abs_diff(matrix row i, reference, grid).
std::vector<double> exceptionality_vector(const SurvivalMatrix& matrix,
                                          std::span<const double> reference_values);
std::vector<double> exceptionality_vector(const SurvivalMatrix& matrix,
                                          const StepCurve& reference);

// Size-penalized mean exceptionality S^gamma * (sum m*l)/(sum m) with
// S = (1/n) sum m. Memberships are floored at 1e-9 throughout so a collapsing
// rule keeps the loss and its gradient finite.
double soft_objective(std::span<const double> memberships,
                      std::span<const double> exceptionality, double gamma);

// One predecessor subgroup's reference curve (on the matrix grid) and the
// per-subject exceptionality against it.
struct PredecessorTerm {
  std::vector<double> curve;
  std::vector<double> exceptionality;
};

// S^gamma * phi(pop) + sum_{g=1..q} S^{gamma/g} * phi(predecessor g); the
// learner minimizes the negation.
double full_objective(std::span<const double> memberships,
                      std::span<const double> exceptionality_pop,
                      std::span<const PredecessorTerm> predecessors, double gamma);

// Full-batch Adam over (alpha, beta, weights), initialized to the feature
// ranges with unit weights; the temperature halves after the epochs/2-th and
// (3*epochs)/4-th updates, so the returned params carry initial/4. Bounds are
// optimized in per-feature standardized units (so temperature and step size
// are scale-free) and mapped back to feature units on return; the stored
// temperature stays in standardized units. Predecessor reference curves are
// rebuilt once per call from the stored predecessor params at their final
// temperature. Deterministic (no randomness is consumed). Constant features
// simply yield zero gradients and harden away.
SoftRuleParams learn_subgroup(const SurvivalDataset& data, const SurvivalMatrix& matrix,
                              const std::vector<SoftRuleParams>& predecessors,
                              const LearnerConfig& config);

// n_subgroups rounds of learn_subgroup with accumulated predecessors; each
// round's params are hardened and scored (hard-membership exceptionality, KM
// curve; a mask without events falls back to the model-averaged curve).
std::vector<SubgroupResult> discover(const SurvivalDataset& data, const SurvivalMatrix& matrix,
                                     const LearnerConfig& config);

// Convenience: fit the forest, predict the matrix, then discover.
std::vector<SubgroupResult> discover(const SurvivalDataset& data, const ForestConfig& forest_config,
                                     const LearnerConfig& config, int threads = 1);

}  // namespace survgroup
