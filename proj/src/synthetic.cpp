#include "survgroup/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "survgroup/errors.hpp"
#include "survgroup/random.hpp"

namespace survgroup {

namespace {

constexpr int kMaxFlagRetries = 1000;
constexpr double kPsiFloor = 1e-6;

void check_config(const SynthConfig& config) {
  if (config.n < 2) throw ConfigError("n must be >= 2 (subgroup and rest must be non-empty)");
  if (config.p < 1) throw ConfigError("p must be >= 1");
  if (config.k < 1 || config.k > config.p) throw ConfigError("k must lie in [1, p]");
  if (!(config.ratio_target > 0.0) || !(config.ratio_target < 1.0))
    throw ConfigError("ratio_target must lie in (0, 1)");
  if (!(config.ratio_cens >= 0.0) || !(config.ratio_cens < 1.0))
    throw ConfigError("ratio_cens must lie in [0, 1)");
  if (!(config.scale_nsg > 0.0) || !(config.scale_sg > 0.0))
    throw ConfigError("scales must be > 0");
  if (!(config.shape_nsg > 0.0) || !(config.shape_sg > 0.0))
    throw ConfigError("shapes must be > 0");
}

}  // namespace

std::pair<SurvivalDataset, PlantedTruth> make_survival_data(const SynthConfig& config) {
  check_config(config);
  const std::size_t n = config.n, p = config.p, k = config.k;
  Rng rng(config.seed);

  // Planted features: partial Fisher-Yates draw of k distinct indices.
  std::vector<std::size_t> pool(p);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t j = 0; j < k; ++j)
    std::swap(pool[j], pool[j + rng.below(p - j)]);
  std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(chosen.begin(), chosen.end());

  // Interval side length so the box has volume ratio_target.
  const double eps = std::pow(config.ratio_target, 1.0 / static_cast<double>(k));
  std::vector<double> lower(k);
  for (std::size_t j = 0; j < k; ++j) lower[j] = rng.uniform(0.0, 1.0 - eps);

  std::vector<std::vector<double>> columns(p, std::vector<double>(n));
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) columns[j][i] = rng.uniform();

  // Subgroup assignment; redrawn while empty or full.
  std::vector<std::uint8_t> mask(n);
  bool ok = false;
  for (int attempt = 0; attempt < kMaxFlagRetries && !ok; ++attempt) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mask[i] = rng.bernoulli(config.ratio_target) ? 1 : 0;
      count += mask[i];
    }
    ok = count > 0 && count < n;
  }
  if (!ok) throw GenerationError("could not draw a non-empty, non-full subgroup assignment");

  // Subgroup rows land inside every planted interval; all other rows are
  // redrawn per coordinate until they fall outside it.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double& x = columns[chosen[j]][i];
      if (mask[i]) {
        x = rng.uniform(lower[j], lower[j] + eps);
      } else {
        while (x >= lower[j] && x <= lower[j] + eps) x = rng.uniform();
      }
    }
  }

  // Linear covariate influence on the Weibull scales, shrunk until both
  // per-subject scale vectors stay positive with disjoint supports.
  std::vector<double> influence(n, 0.0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) influence[i] += columns[chosen[j]][i];
  const double center = static_cast<double>(k) / 2.0;
  for (double& v : influence) v -= center;

  double psi = 1.0;
  std::vector<double> scales(n);
  std::pair<double, double> sg_support, nsg_support;
  while (true) {
    double sg_min = 0.0, sg_max = 0.0, nsg_min = 0.0, nsg_max = 0.0;
    bool sg_seen = false, nsg_seen = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double base = mask[i] ? config.scale_sg : config.scale_nsg;
      scales[i] = base + psi * influence[i];
      double& lo = mask[i] ? sg_min : nsg_min;
      double& hi = mask[i] ? sg_max : nsg_max;
      bool& seen = mask[i] ? sg_seen : nsg_seen;
      if (!seen) {
        lo = hi = scales[i];
        seen = true;
      } else {
        lo = std::min(lo, scales[i]);
        hi = std::max(hi, scales[i]);
      }
    }
    const bool positive = sg_min > 0.0 && nsg_min > 0.0;
    const bool disjoint = sg_max < nsg_min || nsg_max < sg_min;
    if (positive && disjoint) {
      sg_support = {sg_min, sg_max};
      nsg_support = {nsg_min, nsg_max};
      break;
    }
    psi *= 0.9;
    if (psi < kPsiFloor)
      throw GenerationError(
          "could not separate subgroup and population scale supports "
          "(are scale_sg and scale_nsg distinct?)");
  }

  // Inverse-CDF Weibull outcomes, then uniform censoring.
  std::vector<double> times(n);
  std::vector<std::uint8_t> events(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double shape = mask[i] ? config.shape_sg : config.shape_nsg;
    const double u = 1.0 - rng.uniform();  // in (0, 1]: keeps -ln finite
    const double y = scales[i] * std::pow(-std::log(u), 1.0 / shape);
    if (rng.bernoulli(config.ratio_cens)) {
      times[i] = y * rng.uniform();
      events[i] = 0;
    } else {
      times[i] = y;
      events[i] = 1;
    }
  }

  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j) names[j] = "f" + std::to_string(j + 1);

  PlantedTruth truth;
  for (std::size_t j = 0; j < k; ++j) {
    HardCondition cond;
    cond.feature = chosen[j];
    cond.lower = lower[j];
    cond.upper = lower[j] + eps;
    truth.rule.conditions.push_back(cond);
  }
  truth.mask = mask;
  truth.psi = psi;
  truth.subgroup_scale_support = sg_support;
  truth.rest_scale_support = nsg_support;

  SurvivalDataset dataset(std::move(columns), std::move(times), std::move(events),
                          std::move(names));
  return {std::move(dataset), std::move(truth)};
}

double recovery_f1(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth) {
  if (predicted.size() != truth.size())
    throw ShapeError("prediction and truth masks must have equal length");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool a = predicted[i] != 0, b = truth[i] != 0;
    tp += a && b;
    fp += a && !b;
    fn += !a && b;
  }
  if (tp + fp + fn == 0) return 1.0;  // both masks empty
  return 2.0 * static_cast<double>(tp) /
         (2.0 * static_cast<double>(tp) + static_cast<double>(fp) + static_cast<double>(fn));
}

}  // namespace survgroup
