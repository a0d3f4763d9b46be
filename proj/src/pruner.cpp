#include "survgroup/pruner.hpp"

#include <algorithm>
#include <vector>

#include "survgroup/errors.hpp"

namespace survgroup {

namespace {

constexpr double kActivityThreshold = 0.1;

std::vector<std::size_t> active_features(const SoftRuleParams& params) {
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < params.weights.size(); ++j)
    if (std::max(params.weights[j], 0.0) > kActivityThreshold) active.push_back(j);
  return active;
}

}  // namespace

double jaccard(std::span<const std::uint8_t> mask_a, std::span<const std::uint8_t> mask_b) {
  if (mask_a.size() != mask_b.size())
    throw ShapeError("jaccard masks must have equal length");
  std::size_t intersection = 0, set_union = 0;
  for (std::size_t i = 0; i < mask_a.size(); ++i) {
    const bool a = mask_a[i] != 0, b = mask_b[i] != 0;
    intersection += a && b;
    set_union += a || b;
  }
  if (set_union == 0) return 1.0;
  return static_cast<double>(intersection) / static_cast<double>(set_union);
}

SoftRuleParams prune_rule(const SurvivalDataset& data, const SoftRuleParams& params,
                          const PruneConfig& config) {
  if (!(config.threshold > 0.0) || config.threshold > 1.0)
    throw ConfigError("prune threshold must lie in (0, 1]");
  if (active_features(params).empty())
    throw ArgumentError("prune_rule needs at least one active condition");

  const std::vector<std::uint8_t> reference = membership(harden(params, data), data);

  SoftRuleParams current = params;
  while (true) {
    const std::vector<std::size_t> active = active_features(current);
    if (active.empty()) break;

    double best_score = -1.0;
    std::size_t best_feature = 0;
    for (const std::size_t j : active) {
      SoftRuleParams candidate = current;
      candidate.weights[j] = 0.0;
      const double score = jaccard(membership(harden(candidate, data), data), reference);
      if (score > best_score) {
        best_score = score;
        best_feature = j;
      }
    }
    if (best_score < config.threshold) break;
    current.weights[best_feature] = 0.0;
  }
  return current;
}

}  // namespace survgroup
