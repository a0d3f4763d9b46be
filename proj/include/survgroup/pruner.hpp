#pragma once

#include <cstdint>
#include <span>

#include "survgroup/dataset.hpp"
#include "survgroup/softrule.hpp"

namespace survgroup {

struct PruneConfig {
  double threshold = 0.95;  // minimum Jaccard similarity to the original membership
};

// |A ∩ B| / |A ∪ B|; 1 when both masks are empty.
double jaccard(std::span<const std::uint8_t> mask_a, std::span<const std::uint8_t> mask_b);

// Greedy condition removal: the reference mask is the input rule's hard
// membership, computed once. Each sweep tentatively zeroes every active weight
// (max(a,0) > 0.1), scores the candidate's hard membership against the
// reference by Jaccard, and commits the best removal if its score clears the
// threshold (ties break to the lowest feature index); otherwise stops. Removals
// are permanent, so the active set only shrinks and the loop runs at most
// (initial active count) times.
SoftRuleParams prune_rule(const SurvivalDataset& data, const SoftRuleParams& params,
                          const PruneConfig& config = {});

}  // namespace survgroup
