#include "survgroup/results.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "survgroup/errors.hpp"
#include "survgroup/random.hpp"

namespace survgroup {

namespace {

constexpr char kCacheMagic[8] = {'S', 'G', 'C', 'A', 'C', 'H', 'E', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_pod(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return static_cast<bool>(in);
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  write_pod(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

bool read_doubles(std::istream& in, std::vector<double>& v, std::uint64_t max_len) {
  std::uint64_t size = 0;
  if (!read_pod(in, size) || size > max_len) return false;
  v.resize(size);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(size * sizeof(double)));
  return static_cast<bool>(in);
}

std::size_t feature_index(const std::string& name,
                          const std::vector<std::string>& feature_names) {
  const auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end())
    throw ColumnError("rule references unknown feature '" + name + "'");
  return static_cast<std::size_t>(it - feature_names.begin());
}

}  // namespace

Json rule_to_json(const HardRule& rule, const std::vector<std::string>& feature_names) {
  Json conditions = Json::array();
  for (const HardCondition& cond : rule.conditions) {
    Json entry;
    entry["feature"] = cond.feature < feature_names.size()
                           ? feature_names[cond.feature]
                           : "feature" + std::to_string(cond.feature);
    entry["low"] = cond.lower ? Json(*cond.lower) : Json(nullptr);
    entry["high"] = cond.upper ? Json(*cond.upper) : Json(nullptr);
    if (cond.empty_interval) entry["empty"] = true;
    conditions.push_back(std::move(entry));
  }
  Json out;
  out["conditions"] = std::move(conditions);
  return out;
}

HardRule rule_from_json(const Json& j, const std::vector<std::string>& feature_names) {
  if (!j.is_object() || !j.contains("conditions") || !j["conditions"].is_array())
    throw ParseError("rule JSON must be an object with a 'conditions' array");
  HardRule rule;
  for (const Json& entry : j["conditions"]) {
    if (!entry.is_object() || !entry.contains("feature") || !entry["feature"].is_string())
      throw ParseError("rule condition must be an object with a 'feature' name");
    HardCondition cond;
    cond.feature = feature_index(entry["feature"].get<std::string>(), feature_names);
    if (entry.contains("low") && !entry["low"].is_null())
      cond.lower = entry["low"].get<double>();
    if (entry.contains("high") && !entry["high"].is_null())
      cond.upper = entry["high"].get<double>();
    if (entry.contains("empty") && entry["empty"].is_boolean())
      cond.empty_interval = entry["empty"].get<bool>();
    if (cond.lower && cond.upper && *cond.lower > *cond.upper && !cond.empty_interval)
      throw ParseError("rule condition has low > high");
    rule.conditions.push_back(std::move(cond));
  }
  return rule;
}

Json soft_params_to_json(const SoftRuleParams& params) {
  Json out;
  out["alpha"] = params.alpha;
  out["beta"] = params.beta;
  out["weights"] = params.weights;
  out["temperature"] = params.temperature;
  return out;
}

SoftRuleParams soft_params_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("alpha") || !j.contains("beta") ||
      !j.contains("weights") || !j.contains("temperature"))
    throw ParseError("soft rule JSON needs alpha, beta, weights, and temperature");
  SoftRuleParams params;
  params.alpha = j["alpha"].get<std::vector<double>>();
  params.beta = j["beta"].get<std::vector<double>>();
  params.weights = j["weights"].get<std::vector<double>>();
  params.temperature = j["temperature"].get<double>();
  if (params.alpha.size() != params.beta.size() ||
      params.alpha.size() != params.weights.size())
    throw ParseError("soft rule JSON vectors must have equal length");
  if (!(params.temperature > 0.0))
    throw ParseError("soft rule JSON temperature must be > 0");
  return params;
}

Json null_model_to_json(const NullModel& null_model) {
  Json out;
  out["mu"] = null_model.mu;
  out["eta"] = null_model.eta;
  out["runs"] = null_model.runs;
  return out;
}

NullModel null_model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("mu") || !j.contains("eta") || !j.contains("runs"))
    throw ParseError("null model JSON needs mu, eta, and runs");
  NullModel null_model;
  null_model.mu = j["mu"].get<double>();
  null_model.eta = j["eta"].get<double>();
  null_model.runs = j["runs"].get<int>();
  if (null_model.runs < 1) throw ParseError("null model JSON needs runs >= 1");
  if (!(null_model.eta >= 0.0)) throw ParseError("null model JSON needs eta >= 0");
  return null_model;
}

std::uint64_t forest_cache_key(std::uint64_t dataset_hash, const ForestConfig& config) {
  std::uint64_t key = dataset_hash;
  key = mix_seed(key, static_cast<std::uint64_t>(config.n_trees));
  key = mix_seed(key, static_cast<std::uint64_t>(config.max_depth));
  key = mix_seed(key, static_cast<std::uint64_t>(config.max_subjects_per_tree));
  key = mix_seed(key, static_cast<std::uint64_t>(config.min_split));
  key = mix_seed(key, static_cast<std::uint64_t>(config.min_leaf));
  key = mix_seed(key, config.seed);
  return key;
}

void save_forest_cache(const std::filesystem::path& path, std::uint64_t dataset_hash,
                       const ForestConfig& config, const SurvivalForest& forest,
                       const SurvivalMatrix& matrix) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open cache file for writing: " + path.string());
  out.write(kCacheMagic, sizeof(kCacheMagic));
  write_pod(out, forest_cache_key(dataset_hash, config));
  forest.save(out);
  write_pod(out, static_cast<std::uint64_t>(matrix.rows));
  write_pod(out, static_cast<std::uint64_t>(matrix.cols));
  write_doubles(out, matrix.grid);
  write_doubles(out, matrix.data);
  if (!out) throw IoError("failed to write cache file: " + path.string());
}

std::optional<SurvivalForest> load_forest_cache(const std::filesystem::path& path,
                                                std::uint64_t dataset_hash,
                                                const ForestConfig& config,
                                                SurvivalMatrix* matrix) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(kCacheMagic)) != 0) return std::nullopt;
  std::uint64_t key = 0;
  if (!read_pod(in, key) || key != forest_cache_key(dataset_hash, config)) return std::nullopt;

  try {
    SurvivalForest forest = SurvivalForest::load(in);
    std::uint64_t rows = 0, cols = 0;
    SurvivalMatrix loaded;
    if (!read_pod(in, rows) || !read_pod(in, cols)) return std::nullopt;
    if (rows > (1ull << 32) || cols > (1ull << 32)) return std::nullopt;
    if (!read_doubles(in, loaded.grid, cols)) return std::nullopt;
    if (!read_doubles(in, loaded.data, rows * cols)) return std::nullopt;
    loaded.rows = static_cast<std::size_t>(rows);
    loaded.cols = static_cast<std::size_t>(cols);
    if (loaded.grid.size() != loaded.cols || loaded.data.size() != loaded.rows * loaded.cols)
      return std::nullopt;
    if (matrix) *matrix = std::move(loaded);
    return forest;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace survgroup
