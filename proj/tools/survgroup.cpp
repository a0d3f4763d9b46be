// survgroup: discover, prune, and statistically validate subgroups with
// exceptional survival behaviour in time-to-event CSV data; plus a synthetic
// benchmark generator and a sweep harness.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "survgroup/dataset.hpp"
#include "survgroup/errors.hpp"
#include "survgroup/forest.hpp"
#include "survgroup/learner.hpp"
#include "survgroup/parallel.hpp"
#include "survgroup/pruner.hpp"
#include "survgroup/random.hpp"
#include "survgroup/results.hpp"
#include "survgroup/softrule.hpp"
#include "survgroup/survival.hpp"
#include "survgroup/synthetic.hpp"
#include "survgroup/validator.hpp"

namespace {

namespace fs = std::filesystem;
using namespace survgroup;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Everything the discover/validate/prune pipeline needs, filled from flags.
struct PipelineOptions {
  std::string input;
  std::string time_col;
  std::string event_col;
  bool one_hot = false;

  ForestConfig forest;
  LearnerConfig learner;

  std::uint64_t seed = 0;
  int threads = 0;  // 0 = all cores

  bool validate = false;
  int null_runs = 100;
  bool fast_null = false;

  bool prune = false;
  double prune_threshold = 0.95;

  std::string out_dir = "survgroup_out";
  std::string rules_path;  // prune subcommand input
};

void add_dataset_flags(CLI::App* cmd, PipelineOptions& opt) {
  cmd->add_option("--input", opt.input, "input CSV file")->required();
  cmd->add_option("--time-col", opt.time_col, "name of the time-to-event column")->required();
  cmd->add_option("--event-col", opt.event_col, "name of the 0/1 event indicator column")
      ->required();
  cmd->add_flag("--one-hot", opt.one_hot,
                "expand non-numeric columns into 0/1 indicator columns");
}

void add_model_flags(CLI::App* cmd, PipelineOptions& opt) {
  cmd->add_option("--gamma", opt.learner.gamma, "subgroup size penalty exponent")
      ->capture_default_str();
  cmd->add_option("--tau", opt.learner.initial_temperature,
                  "initial soft-rule temperature (annealed to a quarter)")
      ->capture_default_str();
  cmd->add_option("--epochs", opt.learner.epochs, "gradient descent epochs")
      ->capture_default_str();
  cmd->add_option("--lr", opt.learner.learning_rate, "Adam learning rate")
      ->capture_default_str();
  cmd->add_option("--subgroups", opt.learner.n_subgroups, "number of subgroups to learn")
      ->capture_default_str();
  cmd->add_option("--trees", opt.forest.n_trees, "number of survival trees")
      ->capture_default_str();
  cmd->add_option("--max-depth", opt.forest.max_depth, "tree depth limit (0 = 2*p)")
      ->capture_default_str();
  cmd->add_option("--min-split", opt.forest.min_split, "minimum node size to attempt a split")
      ->capture_default_str();
  cmd->add_option("--min-leaf", opt.forest.min_leaf, "minimum subjects per leaf")
      ->capture_default_str();
  cmd->add_option("--max-per-tree", opt.forest.max_subjects_per_tree,
                  "bootstrap sample size cap per tree")
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed, "master random seed")->capture_default_str();
  cmd->add_option("--threads", opt.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  cmd->add_option("--out-dir", opt.out_dir, "output directory")->capture_default_str();
}

void add_validate_flags(CLI::App* cmd, PipelineOptions& opt) {
  cmd->add_flag("--validate", opt.validate,
                "test discovered subgroups against a permutation null");
  cmd->add_option("--null-runs", opt.null_runs,
                  "permutation runs for the null distribution (practical use: >= 1000)")
      ->capture_default_str();
  cmd->add_flag("--fast-null", opt.fast_null,
                "use a reduced forest (25 trees) inside the permutation runs");
}

void add_prune_flags(CLI::App* cmd, PipelineOptions& opt) {
  cmd->add_flag("--prune", opt.prune, "greedily drop redundant rule conditions");
  cmd->add_option("--prune-threshold", opt.prune_threshold,
                  "minimum membership Jaccard kept while pruning")
      ->capture_default_str();
}

fs::path cache_dir_for(const PipelineOptions& opt) {
  if (const char* env = std::getenv("SURVGROUP_CACHE_DIR"); env && *env) return fs::path(env);
  return fs::path(opt.out_dir) / "cache";
}

struct FittedModel {
  SurvivalForest forest;
  SurvivalMatrix matrix;
  bool cache_hit = false;
};

FittedModel fit_or_load(const SurvivalDataset& data, const PipelineOptions& opt) {
  const fs::path dir = cache_dir_for(opt);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path file =
      dir / ("rsf_" + hex64(forest_cache_key(data.content_hash(), opt.forest)) + ".bin");

  SurvivalMatrix matrix;
  if (auto forest = load_forest_cache(file, data.content_hash(), opt.forest, &matrix))
    return {std::move(*forest), std::move(matrix), true};

  SurvivalForest forest = SurvivalForest::fit(data, opt.forest, opt.threads);
  matrix = forest.predict_matrix(data, opt.threads);
  try {
    save_forest_cache(file, data.content_hash(), opt.forest, forest, matrix);
  } catch (const IoError& e) {
    std::cerr << "warning: could not write forest cache: " << e.what() << "\n";
  }
  return {std::move(forest), std::move(matrix), false};
}

// Derived per-subgroup numbers shown in reports and subgroups.json.
struct SubgroupStats {
  double logrank = 0.0;
  double mean_shift = 0.0;
};

SubgroupStats subgroup_stats(const SurvivalDataset& data, const SubgroupResult& result,
                             const StepCurve& population_km, double horizon) {
  SubgroupStats stats;
  try {
    stats.logrank = logrank_statistic(result.mask, data.times(), data.events());
  } catch (const ComparisonError&) {
    stats.logrank = 0.0;  // empty or all-covering mask: no two-sample contrast
  }
  stats.mean_shift = std::abs(restricted_mean(result.km_curve, horizon) -
                              restricted_mean(population_km, horizon));
  return stats;
}

void write_curve_tsv(const fs::path& path, const StepCurve& curve) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_tsv(out, curve);
}

// Re-derives rule, mask, size, exceptionality, and KM curve after the soft
// parameters changed (pruning).
void rescore(SubgroupResult& result, const SurvivalDataset& data,
             const SurvivalMatrix& matrix, const std::vector<double>& pop_deviation) {
  result.rule = harden(result.soft_params, data);
  result.mask = membership(result.rule, data);
  result.size = static_cast<std::size_t>(
      std::count(result.mask.begin(), result.mask.end(), std::uint8_t{1}));
  result.exceptionality = 0.0;
  if (result.size > 0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i)
      if (result.mask[i]) sum += pop_deviation[i];
    result.exceptionality = sum / static_cast<double>(result.size);
  }
  bool have_km = false;
  if (result.size > 0) {
    try {
      result.km_curve = kaplan_meier(data.times(), data.events(), result.mask);
      have_km = true;
    } catch (const DegenerateError&) {
    }
  }
  if (!have_km) {
    std::vector<double> weights(data.n());
    if (result.size > 0) {
      for (std::size_t i = 0; i < data.n(); ++i) weights[i] = result.mask[i] ? 1.0 : 0.0;
    } else {
      const std::vector<double> soft = soft_memberships(data, result.soft_params);
      for (std::size_t i = 0; i < data.n(); ++i) weights[i] = std::max(soft[i], 1e-9);
    }
    StepCurve curve;
    curve.grid = matrix.grid;
    curve.values.assign(matrix.cols, 0.0);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < matrix.rows; ++i) {
      weight_sum += weights[i];
      for (std::size_t u = 0; u < matrix.cols; ++u)
        curve.values[u] += weights[i] * matrix.at(i, u);
    }
    for (double& v : curve.values) v /= weight_sum;
    curve.lower.clear();
    curve.upper.clear();
    result.km_curve = std::move(curve);
  }
}

Json subgroup_to_json(const SubgroupResult& result, const SubgroupStats& stats,
                      const std::vector<std::string>& names, int index) {
  Json j;
  j["index"] = index;
  j["rule_text"] = render_rule(result.rule, names);
  j["rule"] = rule_to_json(result.rule, names);
  j["size"] = result.size;
  j["exceptionality"] = result.exceptionality;
  j["logrank"] = stats.logrank;
  j["mean_shift"] = stats.mean_shift;
  j["soft_params"] = soft_params_to_json(result.soft_params);
  if (result.p_value) {
    j["p_value"] = *result.p_value;
    j["significant"] = result.significant.value_or(false);
  }
  return j;
}

Json config_echo(const PipelineOptions& opt) {
  Json j;
  j["seed"] = opt.seed;
  Json forest;
  forest["trees"] = opt.forest.n_trees;
  forest["max_depth"] = opt.forest.max_depth;
  forest["min_split"] = opt.forest.min_split;
  forest["min_leaf"] = opt.forest.min_leaf;
  forest["max_per_tree"] = opt.forest.max_subjects_per_tree;
  j["forest"] = std::move(forest);
  Json learner;
  learner["gamma"] = opt.learner.gamma;
  learner["tau"] = opt.learner.initial_temperature;
  learner["epochs"] = opt.learner.epochs;
  learner["lr"] = opt.learner.learning_rate;
  learner["subgroups"] = opt.learner.n_subgroups;
  j["learner"] = std::move(learner);
  if (opt.prune) j["prune_threshold"] = opt.prune_threshold;
  if (opt.validate) {
    j["null_runs"] = opt.null_runs;
    j["fast_null"] = opt.fast_null;
  }
  return j;
}

int run_pipeline(PipelineOptions opt) {
  // One master seed feeds every component through fixed per-component streams,
  // so e.g. adding --validate cannot change which subgroups are found.
  opt.forest.seed = mix_seed(opt.seed, 1);
  opt.learner.seed = mix_seed(opt.seed, 2);

  const SurvivalDataset data = load_csv(opt.input, opt.time_col, opt.event_col, opt.one_hot);
  fs::create_directories(opt.out_dir);

  FittedModel model = fit_or_load(data, opt);
  std::vector<SubgroupResult> results = discover(data, model.matrix, opt.learner);

  const StepCurve pop_deviation_ref = population_curve(model.matrix);
  const std::vector<double> pop_deviation =
      exceptionality_vector(model.matrix, pop_deviation_ref.values);

  std::vector<std::string> notes;
  if (opt.prune) {
    for (std::size_t s = 0; s < results.size(); ++s) {
      if (harden(results[s].soft_params, data).conditions.empty()) continue;
      bool any_active = false;
      for (const double a : results[s].soft_params.weights) any_active |= a > 0.1;
      if (!any_active) continue;
      const std::size_t before = results[s].rule.conditions.size();
      results[s].soft_params =
          prune_rule(data, results[s].soft_params, PruneConfig{opt.prune_threshold});
      rescore(results[s], data, model.matrix, pop_deviation);
      const std::size_t after = results[s].rule.conditions.size();
      if (after < before)
        notes.push_back("subgroup " + std::to_string(s + 1) + ": pruned " +
                        std::to_string(before - after) + " condition(s)");
    }
  }

  std::optional<NullModel> null_model;
  if (opt.validate) {
    ForestConfig null_forest = opt.forest;
    if (opt.fast_null) null_forest.n_trees = std::min(null_forest.n_trees, 25);
    LearnerConfig null_learner = opt.learner;
    null_learner.seed = mix_seed(opt.seed, 3);
    null_model = build_dfd(data, null_forest, null_learner, opt.null_runs,
                           opt.learner.n_subgroups, opt.threads);
    std::vector<double> raw(results.size());
    for (std::size_t s = 0; s < results.size(); ++s)
      raw[s] = p_value(results[s].exceptionality, *null_model);
    const auto adjusted = bonferroni(raw);
    for (std::size_t s = 0; s < results.size(); ++s) {
      results[s].p_value = adjusted[s].first;
      results[s].significant = adjusted[s].second;
    }
    if (null_model->eta == 0.0)
      notes.push_back("null distribution is degenerate (eta = 0); p-values are 0/1 only");
  }

  // Population survival, horizon, and per-subgroup statistics.
  const StepCurve population_km = kaplan_meier(data.times(), data.events());
  const double horizon = *std::max_element(data.times().begin(), data.times().end());
  std::vector<SubgroupStats> stats(results.size());
  for (std::size_t s = 0; s < results.size(); ++s)
    stats[s] = subgroup_stats(data, results[s], population_km, horizon);

  // ---- outputs ----
  const fs::path out_dir(opt.out_dir);
  write_curve_tsv(out_dir / "km_population.tsv", population_km);
  for (std::size_t s = 0; s < results.size(); ++s)
    write_curve_tsv(out_dir / ("km_subgroup_" + std::to_string(s + 1) + ".tsv"),
                    results[s].km_curve);

  Json doc;
  doc["input"] = opt.input;
  doc["n"] = data.n();
  doc["p"] = data.p();
  doc["dataset_hash"] = hex64(data.content_hash());
  doc["config"] = config_echo(opt);
  if (null_model) doc["null_model"] = null_model_to_json(*null_model);
  Json subgroups = Json::array();
  for (std::size_t s = 0; s < results.size(); ++s)
    subgroups.push_back(subgroup_to_json(results[s], stats[s], data.feature_names(),
                                         static_cast<int>(s + 1)));
  doc["subgroups"] = std::move(subgroups);
  {
    std::ofstream out(out_dir / "subgroups.json");
    if (!out) throw IoError("cannot write subgroups.json");
    out << doc.dump(2) << "\n";
  }

  if (null_model) {
    std::ofstream out(out_dir / "null_scores.tsv");
    if (!out) throw IoError("cannot write null_scores.tsv");
    out << "score\n";
    for (const double sc : null_model->scores) out << fmt(sc) << "\n";
  }

  {
    std::ofstream out(out_dir / "report.txt");
    if (!out) throw IoError("cannot write report.txt");
    std::size_t n_events = 0;
    for (const auto e : data.events()) n_events += e;
    out << "dataset: " << opt.input << " (n=" << data.n() << ", p=" << data.p()
        << ", events=" << n_events << ", censored="
        << fmt_short(100.0 * static_cast<double>(data.n() - n_events) /
                     static_cast<double>(data.n()))
        << "%)\n";
    out << "forest: " << opt.forest.n_trees << " trees"
        << (model.cache_hit ? " (cache hit)" : "") << "\n";
    out << "learner: gamma=" << fmt_short(opt.learner.gamma)
        << ", tau=" << fmt_short(opt.learner.initial_temperature)
        << ", epochs=" << opt.learner.epochs << ", lr=" << fmt_short(opt.learner.learning_rate)
        << ", subgroups=" << opt.learner.n_subgroups << ", seed=" << opt.seed << "\n";
    if (null_model)
      out << "null model: mu=" << fmt_short(null_model->mu)
          << ", eta=" << fmt_short(null_model->eta) << " over " << null_model->runs
          << " permutation runs\n";
    out << "\n";
    for (std::size_t s = 0; s < results.size(); ++s) {
      const auto& r = results[s];
      out << "subgroup " << s + 1 << ": " << render_rule(r.rule, data.feature_names()) << "\n";
      out << "  size: " << r.size << " ("
          << fmt_short(100.0 * static_cast<double>(r.size) / static_cast<double>(data.n()))
          << "%)\n";
      out << "  exceptionality: " << fmt_short(r.exceptionality) << "\n";
      out << "  logrank: " << fmt_short(stats[s].logrank) << "\n";
      out << "  mean survival shift: " << fmt_short(stats[s].mean_shift) << " (horizon "
          << fmt_short(horizon) << ")\n";
      if (r.p_value)
        out << "  p-value (Bonferroni): " << fmt_short(*r.p_value)
            << (r.significant.value_or(false) ? " -- significant at 0.05"
                                              : " -- not significant at 0.05")
            << "\n";
      if (r.rule.conditions.empty())
        out << "  note: rule hardened to the whole population\n";
      out << "\n";
    }
    for (const std::string& note : notes) out << "note: " << note << "\n";
  }

  std::cout << "wrote " << (out_dir / "subgroups.json").string() << " ("
            << results.size() << " subgroup" << (results.size() == 1 ? "" : "s") << ")\n";
  return 0;
}

int run_prune(PipelineOptions opt) {
  opt.forest.seed = mix_seed(opt.seed, 1);

  const SurvivalDataset data = load_csv(opt.input, opt.time_col, opt.event_col, opt.one_hot);
  fs::create_directories(opt.out_dir);

  Json doc;
  {
    std::ifstream in(opt.rules_path);
    if (!in) throw IoError("cannot open rules file: " + opt.rules_path);
    try {
      doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("rules file is not valid JSON: " + std::string(e.what()));
    }
  }
  if (!doc.contains("subgroups") || !doc["subgroups"].is_array())
    throw ParseError("rules file has no 'subgroups' array");

  const FittedModel model = fit_or_load(data, opt);
  const StepCurve pop_ref = population_curve(model.matrix);
  const std::vector<double> pop_deviation = exceptionality_vector(model.matrix, pop_ref.values);
  const StepCurve population_km = kaplan_meier(data.times(), data.events());
  const double horizon = *std::max_element(data.times().begin(), data.times().end());

  std::ofstream report(fs::path(opt.out_dir) / "prune_report.txt");
  if (!report) throw IoError("cannot write prune_report.txt");

  int index = 0;
  for (Json& entry : doc["subgroups"]) {
    ++index;
    if (!entry.contains("soft_params")) {
      report << "subgroup " << index << ": no soft parameters recorded; unchanged\n";
      continue;
    }
    SubgroupResult before;
    before.soft_params = soft_params_from_json(entry["soft_params"]);
    if (before.soft_params.alpha.size() != data.p())
      throw ShapeError("rules file was produced for a dataset with " +
                       std::to_string(before.soft_params.alpha.size()) +
                       " features, this one has " + std::to_string(data.p()));
    rescore(before, data, model.matrix, pop_deviation);

    bool any_active = false;
    for (const double a : before.soft_params.weights) any_active |= a > 0.1;
    if (!any_active) {
      report << "subgroup " << index << ": no active conditions; unchanged\n";
      continue;
    }

    SubgroupResult after = before;
    after.soft_params =
        prune_rule(data, before.soft_params, PruneConfig{opt.prune_threshold});
    rescore(after, data, model.matrix, pop_deviation);
    const double overlap = jaccard(after.mask, before.mask);

    const SubgroupStats after_stats = subgroup_stats(data, after, population_km, horizon);
    entry["rule_text"] = render_rule(after.rule, data.feature_names());
    entry["rule"] = rule_to_json(after.rule, data.feature_names());
    entry["size"] = after.size;
    entry["exceptionality"] = after.exceptionality;
    entry["logrank"] = after_stats.logrank;
    entry["mean_shift"] = after_stats.mean_shift;
    entry["soft_params"] = soft_params_to_json(after.soft_params);

    report << "subgroup " << index << ": conditions " << before.rule.conditions.size()
           << " -> " << after.rule.conditions.size() << ", size " << before.size << " -> "
           << after.size << " ("
           << (after.size >= before.size ? "+" : "-")
           << (after.size >= before.size ? after.size - before.size
                                         : before.size - after.size)
           << "), exceptionality " << fmt_short(before.exceptionality) << " -> "
           << fmt_short(after.exceptionality) << ", jaccard " << fmt_short(overlap) << "\n";
  }

  {
    std::ofstream out(fs::path(opt.out_dir) / "pruned_subgroups.json");
    if (!out) throw IoError("cannot write pruned_subgroups.json");
    out << doc.dump(2) << "\n";
  }
  std::cout << "wrote " << (fs::path(opt.out_dir) / "pruned_subgroups.json").string() << "\n";
  return 0;
}

struct SynthOptions {
  SynthConfig config;
  std::string out_dir = "survgroup_out";
};

int run_synth(const SynthOptions& opt) {
  SynthConfig config = opt.config;
  config.seed = mix_seed(config.seed, 4);
  auto [data, truth] = make_survival_data(config);

  fs::create_directories(opt.out_dir);
  const fs::path csv_path = fs::path(opt.out_dir) / "data.csv";
  {
    std::ofstream out(csv_path);
    if (!out) throw IoError("cannot write " + csv_path.string());
    for (std::size_t j = 0; j < data.p(); ++j) out << data.feature_names()[j] << ",";
    out << "time,event\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
      for (std::size_t j = 0; j < data.p(); ++j) out << fmt(data.x(i, j)) << ",";
      out << fmt(data.times()[i]) << "," << int(data.events()[i]) << "\n";
    }
  }

  Json truth_json;
  truth_json["rule"] = rule_to_json(truth.rule, data.feature_names());
  Json indices = Json::array();
  for (std::size_t i = 0; i < truth.mask.size(); ++i)
    if (truth.mask[i]) indices.push_back(i);
  truth_json["mask_indices"] = std::move(indices);
  truth_json["psi"] = truth.psi;
  {
    std::ofstream out(fs::path(opt.out_dir) / "truth.json");
    if (!out) throw IoError("cannot write truth.json");
    out << truth_json.dump(2) << "\n";
  }
  std::cout << "wrote " << csv_path.string() << " (n=" << data.n() << ", p=" << data.p()
            << ", subgroup size=" << truth_json["mask_indices"].size() << ")\n";
  return 0;
}

struct BenchOptions {
  std::string sweep = "censoring";
  std::string points;
  int repeats = 5;
  PipelineOptions pipeline;  // model flags + seed/threads/out-dir
};

int run_bench(const BenchOptions& opt) {
  std::vector<double> xs;
  {
    std::stringstream ss(opt.points);
    std::string token;
    while (std::getline(ss, token, ','))
      if (!token.empty()) xs.push_back(std::stod(token));
  }
  if (xs.empty()) throw ArgumentError("--points must list at least one value");
  if (opt.repeats < 1) throw ArgumentError("--repeats must be >= 1");

  fs::create_directories(opt.pipeline.out_dir);
  std::ofstream f1_out(fs::path(opt.pipeline.out_dir) / ("f1_" + opt.sweep + ".tsv"));
  std::ofstream rt_out(fs::path(opt.pipeline.out_dir) / ("runtime_" + opt.sweep + ".tsv"));
  if (!f1_out || !rt_out) throw IoError("cannot write bench TSVs");
  f1_out << "x\ty\ty_c0\ty_c1\n";
  rt_out << "x\ty\ty_c0\ty_c1\n";

  for (std::size_t px = 0; px < xs.size(); ++px) {
    const double x = xs[px];
    std::vector<double> f1s, secs;
    for (int rep = 0; rep < opt.repeats; ++rep) {
      SynthConfig synth;
      if (opt.sweep == "features") {
        synth.p = static_cast<std::size_t>(x);
      } else if (opt.sweep == "censoring") {
        synth.ratio_cens = x;
      } else if (opt.sweep == "fraction") {
        synth.ratio_target = x;
      } else if (opt.sweep == "size") {
        synth.n = static_cast<std::size_t>(x);
      } else if (opt.sweep == "hazard") {
        synth.scale_sg = x * synth.scale_nsg;
        if (std::abs(synth.scale_sg - synth.scale_nsg) < 1e-9)
          synth.scale_sg = 0.999 * synth.scale_nsg;  // exact equality can never separate
      } else {
        throw ArgumentError(
            "unknown sweep '" + opt.sweep +
            "' (expected features, censoring, fraction, size, or hazard)");
      }
      const std::uint64_t run_seed = mix_seed(mix_seed(opt.pipeline.seed, px + 1), rep);
      synth.seed = run_seed;
      auto [data, truth] = make_survival_data(synth);

      ForestConfig forest_config = opt.pipeline.forest;
      forest_config.seed = mix_seed(run_seed, 1);
      LearnerConfig learner_config = opt.pipeline.learner;
      learner_config.seed = mix_seed(run_seed, 2);

      const auto start = std::chrono::steady_clock::now();
      const std::vector<SubgroupResult> found =
          discover(data, forest_config, learner_config, opt.pipeline.threads);
      const auto stop = std::chrono::steady_clock::now();
      secs.push_back(std::chrono::duration<double>(stop - start).count());

      double best = 0.0;
      for (const SubgroupResult& result : found)
        best = std::max(best, recovery_f1(result.mask, truth.mask));
      f1s.push_back(best);
    }
    const auto mean_se = [](const std::vector<double>& v) {
      double mean = 0.0;
      for (const double value : v) mean += value;
      mean /= static_cast<double>(v.size());
      double se = 0.0;
      if (v.size() > 1) {
        double sq = 0.0;
        for (const double value : v) sq += (value - mean) * (value - mean);
        se = std::sqrt(sq / static_cast<double>(v.size() - 1)) /
             std::sqrt(static_cast<double>(v.size()));
      }
      return std::pair<double, double>(mean, se);
    };
    const auto [f1_mean, f1_se] = mean_se(f1s);
    const auto [rt_mean, rt_se] = mean_se(secs);
    f1_out << fmt(x) << "\t" << fmt(f1_mean) << "\t" << fmt(f1_mean - f1_se) << "\t"
           << fmt(f1_mean + f1_se) << "\n";
    rt_out << fmt(x) << "\t" << fmt(rt_mean) << "\t" << fmt(rt_mean - rt_se) << "\t"
           << fmt(rt_mean + rt_se) << "\n";
    std::cout << opt.sweep << "=" << fmt_short(x) << ": F1 " << fmt_short(f1_mean) << " +- "
              << fmt_short(f1_se) << ", " << fmt_short(rt_mean) << "s/run\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subgroup discovery for time-to-event data"};
  app.require_subcommand(1);

  PipelineOptions discover_opt;
  CLI::App* cmd_discover =
      app.add_subcommand("discover", "find subgroups with exceptional survival");
  cmd_discover->set_config("--config", "", "flat key=value config file (flags override)");
  add_dataset_flags(cmd_discover, discover_opt);
  add_model_flags(cmd_discover, discover_opt);
  add_validate_flags(cmd_discover, discover_opt);
  add_prune_flags(cmd_discover, discover_opt);

  PipelineOptions validate_opt;
  validate_opt.validate = true;
  CLI::App* cmd_validate =
      app.add_subcommand("validate", "discover subgroups and test them against a permutation null");
  cmd_validate->set_config("--config", "", "flat key=value config file (flags override)");
  add_dataset_flags(cmd_validate, validate_opt);
  add_model_flags(cmd_validate, validate_opt);
  cmd_validate->add_option("--null-runs", validate_opt.null_runs,
                           "permutation runs for the null distribution (practical use: >= 1000)")
      ->capture_default_str();
  cmd_validate->add_flag("--fast-null", validate_opt.fast_null,
                         "use a reduced forest (25 trees) inside the permutation runs");
  add_prune_flags(cmd_validate, validate_opt);

  PipelineOptions prune_opt;
  CLI::App* cmd_prune = app.add_subcommand("prune", "simplify rules from a subgroups.json");
  cmd_prune->set_config("--config", "", "flat key=value config file (flags override)");
  add_dataset_flags(cmd_prune, prune_opt);
  add_model_flags(cmd_prune, prune_opt);
  cmd_prune->add_option("--rules", prune_opt.rules_path, "subgroups.json produced by discover")
      ->required();
  cmd_prune->add_option("--threshold", prune_opt.prune_threshold,
                        "minimum membership Jaccard kept while pruning")
      ->capture_default_str();

  SynthOptions synth_opt;
  CLI::App* cmd_synth =
      app.add_subcommand("synth", "generate a benchmark dataset with a planted subgroup");
  cmd_synth->set_config("--config", "", "flat key=value config file (flags override)");
  cmd_synth->add_option("--n", synth_opt.config.n, "subjects")->capture_default_str();
  cmd_synth->add_option("--p", synth_opt.config.p, "features")->capture_default_str();
  cmd_synth->add_option("--k", synth_opt.config.k, "planted interval conditions")
      ->capture_default_str();
  cmd_synth->add_option("--ratio-target", synth_opt.config.ratio_target,
                        "expected subgroup fraction")
      ->capture_default_str();
  cmd_synth->add_option("--ratio-cens", synth_opt.config.ratio_cens, "censoring fraction")
      ->capture_default_str();
  cmd_synth->add_option("--scale-nsg", synth_opt.config.scale_nsg,
                        "Weibull scale outside the subgroup")
      ->capture_default_str();
  cmd_synth->add_option("--shape-nsg", synth_opt.config.shape_nsg,
                        "Weibull shape outside the subgroup")
      ->capture_default_str();
  cmd_synth->add_option("--scale-sg", synth_opt.config.scale_sg,
                        "Weibull scale inside the subgroup")
      ->capture_default_str();
  cmd_synth->add_option("--shape-sg", synth_opt.config.shape_sg,
                        "Weibull shape inside the subgroup")
      ->capture_default_str();
  cmd_synth->add_option("--seed", synth_opt.config.seed, "master random seed")
      ->capture_default_str();
  cmd_synth->add_option("--out-dir", synth_opt.out_dir, "output directory")
      ->capture_default_str();

  BenchOptions bench_opt;
  CLI::App* cmd_bench =
      app.add_subcommand("bench", "sweep a generator parameter and record recovery F1");
  cmd_bench->set_config("--config", "", "flat key=value config file (flags override)");
  cmd_bench->add_option("--sweep", bench_opt.sweep,
                        "swept parameter: features, censoring, fraction, size, or hazard")
      ->capture_default_str();
  cmd_bench->add_option("--points", bench_opt.points, "comma-separated sweep values")
      ->required();
  cmd_bench->add_option("--repeats", bench_opt.repeats, "seeds per sweep point")
      ->capture_default_str();
  add_model_flags(cmd_bench, bench_opt.pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_discover->parsed()) return run_pipeline(discover_opt);
    if (cmd_validate->parsed()) return run_pipeline(validate_opt);
    if (cmd_prune->parsed()) return run_prune(prune_opt);
    if (cmd_synth->parsed()) return run_synth(synth_opt);
    if (cmd_bench->parsed()) return run_bench(bench_opt);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ColumnError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
