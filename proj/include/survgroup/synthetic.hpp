#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "survgroup/dataset.hpp"
#include "survgroup/softrule.hpp"

namespace survgroup {

// Benchmark generator settings: a hyper-box subgroup of expected fraction
// ratio_target planted in U(0,1)^p covariates, with Weibull outcomes whose
// scale differs between subgroup and rest (plus a linear covariate influence),
// and uniform censoring of a ratio_cens fraction.
struct SynthConfig {
  std::size_t n = 10000;
  std::size_t p = 10;
  std::size_t k = 2;  // number of planted interval conditions
  double scale_nsg = 5.0;
  double shape_nsg = 1.5;
  double scale_sg = 1.0;
  double shape_sg = 1.5;
  double ratio_target = 0.2;
  double ratio_cens = 0.1;
  std::uint64_t seed = 0;
};

struct PlantedTruth {
  HardRule rule;                    // the k planted intervals, sorted by feature
  std::vector<std::uint8_t> mask;   // ground-truth membership (matches the rule exactly)
  // Diagnostics of the scale-separation loop: final influence multiplier and
  // the [min, max] supports of the two per-subject scale vectors.
  double psi = 0.0;
  std::pair<double, double> subgroup_scale_support{0.0, 0.0};
  std::pair<double, double> rest_scale_support{0.0, 0.0};
};

// Generation steps, all driven by one stream: choose k features without
// replacement; interval side length eps = ratio_target^(1/k) with lower bounds
// ~ U(0, 1-eps); draw X ~ U(0,1)^{n x p}; flag subjects Bernoulli(ratio_target)
// (redrawn, bounded, if empty or full); flagged rows get the chosen
// coordinates redrawn inside their intervals, the rest redrawn until outside
// every interval; covariate influence N0 = sum_j X[:,v_j] - k/2 is added to
// both scale constants with multiplier psi, decayed by 0.9 until both
// per-subject scale vectors are non-negative with disjoint [min,max] supports
// (GenerationError when psi underflows 1e-6, e.g. scale_sg == scale_nsg);
// outcomes Y = scale * (-ln U)^(1/shape); a censored subject (prob ratio_cens)
// reports T ~ U(0, Y), others T = Y. Feature names are "f1".."fp".
std::pair<SurvivalDataset, PlantedTruth> make_survival_data(const SynthConfig& config);

// Membership-level F1 = 2tp / (2tp + fp + fn); 1 when both masks are empty.
double recovery_f1(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth);

}  // namespace survgroup
