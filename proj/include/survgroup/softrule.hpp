#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "survgroup/dataset.hpp"

namespace survgroup {

// Learnable soft conjunctive rule: per-feature interval bounds, real-valued
// weights (effective weight is max(a,0); a condition is "active" when that
// exceeds the hardening threshold), and a sharpness temperature. alpha <= beta
// is deliberately NOT an invariant: gradient steps may cross the bounds and
// evaluation must stay finite regardless.
struct SoftRuleParams {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> weights;
  double temperature = 0.2;
};

// One crisp closed-interval condition. A missing bound means that side was
// vacuous (it covered the observed range). empty_interval marks a condition
// whose learned bounds crossed: it matches no subject.
struct HardCondition {
  std::size_t feature = 0;
  std::optional<double> lower;
  std::optional<double> upper;
  bool empty_interval = false;
};

// Conjunction of conditions over distinct features; empty list selects everyone.
struct HardRule {
  std::vector<HardCondition> conditions;
};

// Smoothed interval indicator 1/(1 + e^{(alpha-x)/tau} + e^{(x-beta)/tau}),
// the stable algebraic form of the three-exponential sigmoid composition.
// Exponents are clamped so |exponent| up to 1e4 cannot overflow, and the
// result is floored at 1e-12 because the conjunction divides by it.
double soft_condition(double x, double alpha, double beta, double temperature);

// Weighted harmonic mean (sum w) / (sum w / pi) with w = max(weight, 0);
// returns 1 for an empty conjunction (all effective weights 0).
double harmonic_conjunction(std::span<const double> weights, std::span<const double> pis);

// Soft rule value for one subject's feature vector.
double soft_rule(std::span<const double> x, const SoftRuleParams& params);

// Soft rule values for every subject (feature-outer loops over the column-major
// dataset).
std::vector<double> soft_memberships(const SurvivalDataset& data, const SoftRuleParams& params);

// Value plus partial derivatives w.r.t. every alpha, beta, and weight entry.
// ReLU'(0) is taken as 0, and the derivative through a floored condition is 0.
struct SoftRuleGrad {
  double value = 1.0;
  std::vector<double> dalpha;
  std::vector<double> dbeta;
  std::vector<double> dweights;
};
SoftRuleGrad soft_rule_grad(std::span<const double> x, const SoftRuleParams& params);

// Crisp rule from learned parameters: keep features with max(weight,0) >
// activity_threshold; drop a bound that covers the feature's observed range
// (alpha <= min / beta >= max) and drop the whole condition when both sides
// are vacuous; crossed bounds collapse to an empty-interval condition.
HardRule harden(const SoftRuleParams& params, const SurvivalDataset& data,
                double activity_threshold = 0.1);

// Closed-interval conjunction test per subject.
std::vector<std::uint8_t> membership(const HardRule& rule, const SurvivalDataset& data);

// "population" for the empty rule; otherwise conditions joined with " ∧ ",
// e.g. "age > 47.43 ∧ wage ∈ [4.20, 7.36]" (bounds shown at 2 decimals).
std::string render_rule(const HardRule& rule, const std::vector<std::string>& feature_names);

}  // namespace survgroup
