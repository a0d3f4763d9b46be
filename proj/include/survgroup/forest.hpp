#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "survgroup/dataset.hpp"
#include "survgroup/survival.hpp"

namespace survgroup {

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 0;  // 0 = auto: 2 * p
  int max_subjects_per_tree = 2000;
  int min_split = 40;
  int min_leaf = 20;
  std::uint64_t seed = 0;
};

// n x m matrix of per-subject survival probabilities at the m unique event
// times of the training data. Every row is non-increasing and within [0,1].
struct SurvivalMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> grid;  // the m unique event times
  std::vector<double> data;  // row-major

  double at(std::size_t i, std::size_t u) const { return data[i * cols + u]; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

// Bootstrap ensemble of survival trees split by the logrank statistic.
// Per tree: min(n, max_subjects_per_tree) subjects drawn with replacement;
// all p features considered at every split; candidate thresholds are midpoints
// of consecutive sorted unique in-node values, thinned to at most 64 per
// feature; both children must keep >= min_leaf subjects and >= 1 event; ties
// break to the lowest feature index, then lowest threshold. Leaves hold the
// Kaplan-Meier curve of their in-bag subjects (constant 1 when the leaf has no
// events). Deterministic given the seed: tree t uses its own stream derived
// from (seed, t), so fitting parallelism cannot change the result.
class SurvivalForest {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t curve = -1;    // leaf curve index
  };
  // Compact per-leaf KM curve: breakpoints at the leaf's own event times.
  struct LeafCurve {
    std::vector<double> times;
    std::vector<double> values;
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<LeafCurve> curves;
  };

  static SurvivalForest fit(const SurvivalDataset& data, const ForestConfig& config,
                            int threads = 1);

  // In-bag whole-dataset prediction: row i averages, over trees, the curve of
  // the leaf subject i routes to, expanded to the global event-time grid.
  // Deterministic and independent of thread count.
  SurvivalMatrix predict_matrix(const SurvivalDataset& data, int threads = 1) const;

  SurvivalForest(std::vector<double> grid, std::vector<Tree> trees, std::size_t n_features);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Tree>& trees() const { return trees_; }
  std::size_t n_features() const { return n_features_; }

  // Versioned binary serialization (see save_cache/load_cache in results.hpp
  // for the keyed cache file wrapper used by the CLI).
  void save(std::ostream& out) const;
  static SurvivalForest load(std::istream& in);

 private:
  std::vector<double> grid_;
  std::vector<Tree> trees_;
  std::size_t n_features_ = 0;
};

// Column means of the matrix on its grid: the population reference curve.
StepCurve population_curve(const SurvivalMatrix& matrix);

}  // namespace survgroup
