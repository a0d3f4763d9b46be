#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "survgroup/forest.hpp"
#include "survgroup/learner.hpp"
#include "survgroup/softrule.hpp"
#include "survgroup/validator.hpp"

namespace survgroup {

// Insertion-ordered JSON keeps emitted documents byte-stable across runs.
using Json = nlohmann::ordered_json;

// {"conditions":[{"feature":"age","low":47.43,"high":null}, ...]}; an
// empty-interval condition additionally carries "empty": true.
Json rule_to_json(const HardRule& rule, const std::vector<std::string>& feature_names);
HardRule rule_from_json(const Json& j, const std::vector<std::string>& feature_names);

Json soft_params_to_json(const SoftRuleParams& params);
SoftRuleParams soft_params_from_json(const Json& j);

// {"mu":..., "eta":..., "runs":...} — the raw score sample is deliberately
// not part of the schema (the CLI writes it as a TSV instead).
Json null_model_to_json(const NullModel& null_model);
NullModel null_model_from_json(const Json& j);

// Versioned binary cache of a fitted forest plus its whole-dataset prediction,
// keyed by dataset content hash and the exact forest configuration. load
// returns the forest and fills *matrix on success; it returns nullopt (with
// *matrix untouched) when the file is absent, malformed, from another
// version, or keyed differently.
void save_forest_cache(const std::filesystem::path& path, std::uint64_t dataset_hash,
                       const ForestConfig& config, const SurvivalForest& forest,
                       const SurvivalMatrix& matrix);
std::optional<SurvivalForest> load_forest_cache(const std::filesystem::path& path,
                                                std::uint64_t dataset_hash,
                                                const ForestConfig& config,
                                                SurvivalMatrix* matrix);

// Stable name component for cache files: mixes the dataset hash with every
// forest configuration field.
std::uint64_t forest_cache_key(std::uint64_t dataset_hash, const ForestConfig& config);

}  // namespace survgroup
