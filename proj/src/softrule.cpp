#include "survgroup/softrule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "survgroup/errors.hpp"

namespace survgroup {

namespace {

// Floor applied to every soft condition before the conjunction divides by it.
constexpr double kPiFloor = 1e-12;
// exp() clamp; beyond this the condition is deep inside the floor region.
constexpr double kExpClamp = 600.0;

double clamped_exp(double exponent) { return std::exp(std::min(exponent, kExpClamp)); }

void check_params(const SoftRuleParams& params, std::size_t p) {
  if (params.alpha.size() != p || params.beta.size() != p || params.weights.size() != p)
    throw ShapeError("soft rule parameter vectors must all have length " + std::to_string(p));
  if (!(params.temperature > 0.0) || !std::isfinite(params.temperature))
    throw ArgumentError("temperature must be a finite value > 0");
}

std::string format_bound(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

double soft_condition(double x, double alpha, double beta, double temperature) {
  if (!std::isfinite(x) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw ArgumentError("soft_condition inputs must be finite");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw ArgumentError("temperature must be a finite value > 0");
  const double eu = clamped_exp((alpha - x) / temperature);
  const double ev = clamped_exp((x - beta) / temperature);
  return std::max(1.0 / (1.0 + eu + ev), kPiFloor);
}

double harmonic_conjunction(std::span<const double> weights, std::span<const double> pis) {
  if (weights.size() != pis.size())
    throw ShapeError("weights and condition values must have equal length");
  double weight_sum = 0.0, inverse_sum = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double w = std::max(weights[j], 0.0);
    if (w == 0.0) continue;
    weight_sum += w;
    inverse_sum += w / std::max(pis[j], kPiFloor);
  }
  if (weight_sum == 0.0) return 1.0;  // empty conjunction selects everyone
  return weight_sum / inverse_sum;
}

double soft_rule(std::span<const double> x, const SoftRuleParams& params) {
  check_params(params, x.size());
  double weight_sum = 0.0, inverse_sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double w = std::max(params.weights[j], 0.0);
    if (w == 0.0) continue;
    weight_sum += w;
    inverse_sum += w / soft_condition(x[j], params.alpha[j], params.beta[j], params.temperature);
  }
  if (weight_sum == 0.0) return 1.0;
  return weight_sum / inverse_sum;
}

std::vector<double> soft_memberships(const SurvivalDataset& data, const SoftRuleParams& params) {
  check_params(params, data.p());
  const std::size_t n = data.n();
  double weight_sum = 0.0;
  for (const double a : params.weights) weight_sum += std::max(a, 0.0);
  if (weight_sum == 0.0) return std::vector<double>(n, 1.0);

  std::vector<double> inverse_sum(n, 0.0);
  const double inv_tau = 1.0 / params.temperature;
  for (std::size_t j = 0; j < data.p(); ++j) {
    const double w = std::max(params.weights[j], 0.0);
    if (w == 0.0) continue;
    const auto col = data.column(j);
    const double alpha = params.alpha[j], beta = params.beta[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double eu = clamped_exp((alpha - col[i]) * inv_tau);
      const double ev = clamped_exp((col[i] - beta) * inv_tau);
      inverse_sum[i] += w / std::max(1.0 / (1.0 + eu + ev), kPiFloor);
    }
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = weight_sum / inverse_sum[i];
  return out;
}

SoftRuleGrad soft_rule_grad(std::span<const double> x, const SoftRuleParams& params) {
  check_params(params, x.size());
  const std::size_t p = x.size();
  SoftRuleGrad grad;
  grad.dalpha.assign(p, 0.0);
  grad.dbeta.assign(p, 0.0);
  grad.dweights.assign(p, 0.0);

  double weight_sum = 0.0;
  for (const double a : params.weights) weight_sum += std::max(a, 0.0);
  if (weight_sum == 0.0) {
    grad.value = 1.0;  // flat: ReLU'(a) = 0 for a <= 0, so every partial vanishes
    return grad;
  }

  std::vector<double> eu(p), ev(p), pi(p);
  std::vector<bool> floored(p);
  const double inv_tau = 1.0 / params.temperature;
  double inverse_sum = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    eu[j] = clamped_exp((params.alpha[j] - x[j]) * inv_tau);
    ev[j] = clamped_exp((x[j] - params.beta[j]) * inv_tau);
    const double raw = 1.0 / (1.0 + eu[j] + ev[j]);
    floored[j] = raw < kPiFloor;
    pi[j] = std::max(raw, kPiFloor);
    const double w = std::max(params.weights[j], 0.0);
    if (w > 0.0) inverse_sum += w / pi[j];
  }
  const double sigma = weight_sum / inverse_sum;
  grad.value = sigma;

  for (std::size_t j = 0; j < p; ++j) {
    const double w = std::max(params.weights[j], 0.0);
    if (params.weights[j] > 0.0)
      grad.dweights[j] = (sigma / weight_sum) * (1.0 - sigma / pi[j]);
    if (w > 0.0 && !floored[j]) {
      // d sigma / d pi_j = sigma^2 w / (W pi^2); d pi / d alpha = -pi^2 eu / tau.
      const double common = sigma * sigma * w / weight_sum * inv_tau;
      grad.dalpha[j] = -common * eu[j];
      grad.dbeta[j] = common * ev[j];
    }
  }
  return grad;
}

HardRule harden(const SoftRuleParams& params, const SurvivalDataset& data,
                double activity_threshold) {
  check_params(params, data.p());
  HardRule rule;
  for (std::size_t j = 0; j < data.p(); ++j) {
    if (std::max(params.weights[j], 0.0) <= activity_threshold) continue;
    const double lo = params.alpha[j];
    const double hi = params.beta[j];
    const auto [range_lo, range_hi] = data.feature_ranges()[j];
    if (lo > hi) {
      // Crossed bounds select nothing; clip to the midpoint and flag.
      HardCondition cond;
      cond.feature = j;
      cond.lower = cond.upper = 0.5 * (lo + hi);
      cond.empty_interval = true;
      rule.conditions.push_back(cond);
      continue;
    }
    const bool has_lower = lo > range_lo;
    const bool has_upper = hi < range_hi;
    if (!has_lower && !has_upper) continue;  // covers the whole observed range
    HardCondition cond;
    cond.feature = j;
    if (has_lower) cond.lower = lo;
    if (has_upper) cond.upper = hi;
    rule.conditions.push_back(cond);
  }
  return rule;
}

std::vector<std::uint8_t> membership(const HardRule& rule, const SurvivalDataset& data) {
  std::vector<std::uint8_t> mask(data.n(), 1);
  for (const auto& cond : rule.conditions) {
    if (cond.feature >= data.p())
      throw ShapeError("rule condition references feature " + std::to_string(cond.feature) +
                       " but the dataset has p = " + std::to_string(data.p()));
    if (cond.empty_interval) {
      std::fill(mask.begin(), mask.end(), 0);
      return mask;
    }
    const auto col = data.column(cond.feature);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) continue;
      const double v = col[i];
      if ((cond.lower && v < *cond.lower) || (cond.upper && v > *cond.upper)) mask[i] = 0;
    }
  }
  return mask;
}

std::string render_rule(const HardRule& rule, const std::vector<std::string>& feature_names) {
  if (rule.conditions.empty()) return "population";
  std::string out;
  for (const auto& cond : rule.conditions) {
    if (!out.empty()) out += " ∧ ";
    const std::string name = cond.feature < feature_names.size()
                                 ? feature_names[cond.feature]
                                 : "feature" + std::to_string(cond.feature);
    if (cond.empty_interval) {
      out += name + " ∈ ∅";
    } else if (cond.lower && cond.upper) {
      out += name + " ∈ [" + format_bound(*cond.lower) + ", " + format_bound(*cond.upper) + "]";
    } else if (cond.lower) {
      out += name + " > " + format_bound(*cond.lower);
    } else {
      out += name + " < " + format_bound(*cond.upper);
    }
  }
  return out;
}

}  // namespace survgroup
