#include "survgroup/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "survgroup/errors.hpp"
#include "survgroup/parallel.hpp"
#include "survgroup/random.hpp"

namespace survgroup {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'F', '1'};
constexpr std::size_t kMaxSplitCandidates = 64;

void check_config(const ForestConfig& config) {
  if (config.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (config.min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
  if (config.min_split < 2 * config.min_leaf)
    throw ConfigError("min_split must be >= 2 * min_leaf");
  if (config.max_subjects_per_tree < 1)
    throw ConfigError("max_subjects_per_tree must be >= 1");
}

struct NodeTask {
  std::size_t begin, end;  // range into the tree's index buffer
  std::size_t node;        // node slot to fill in
  std::size_t depth;
};

// Work buffers reused across all nodes of one tree.
struct TreeScratch {
  std::vector<std::size_t> indices;   // bootstrap sample, partitioned in place
  std::vector<std::size_t> order;     // node subjects sorted by time
  std::vector<double> values;         // sorted distinct feature values
  std::vector<double> candidates;     // midpoint thresholds
  std::vector<std::size_t> buffer;    // stable partition helper
  std::vector<double> km_times;
  std::vector<double> km_values;
};

// Logrank statistic of {x <= threshold} vs the rest inside one node, walking
// subjects in time order. Returns -1 when either child violates the size or
// event constraints.
double split_score(const SurvivalDataset& data, const TreeScratch& scratch,
                   std::size_t begin, std::size_t end, std::size_t feature,
                   double threshold, std::size_t min_leaf) {
  const auto col = data.column(feature);
  const auto& times = data.times();
  const auto& events = data.events();

  std::size_t n_left = 0, events_left = 0, events_right = 0;
  for (std::size_t k = begin; k < end; ++k) {
    const std::size_t i = scratch.indices[k];
    const bool left = col[i] <= threshold;
    n_left += left;
    if (events[i]) (left ? events_left : events_right)++;
  }
  const std::size_t size = end - begin;
  if (n_left < min_leaf || size - n_left < min_leaf) return -1.0;
  if (events_left == 0 || events_right == 0) return -1.0;

  double at_risk = static_cast<double>(size);
  double at_risk_left = static_cast<double>(n_left);
  double observed = 0.0, expected = 0.0, variance = 0.0;
  std::size_t k = 0;
  const std::size_t m = size;
  while (k < m) {
    const double t = times[scratch.order[k]];
    std::size_t deaths = 0, deaths_left = 0, removed = 0, removed_left = 0;
    while (k < m && times[scratch.order[k]] == t) {
      const std::size_t i = scratch.order[k];
      const bool left = col[i] <= threshold;
      ++removed;
      removed_left += left;
      if (events[i]) {
        ++deaths;
        deaths_left += left;
      }
      ++k;
    }
    if (deaths > 0 && at_risk > 1.0) {
      const double d = static_cast<double>(deaths);
      observed += static_cast<double>(deaths_left);
      expected += d * at_risk_left / at_risk;
      variance += d * at_risk_left * (at_risk - at_risk_left) * (at_risk - d) /
                  (at_risk * at_risk * (at_risk - 1.0));
    }
    at_risk -= static_cast<double>(removed);
    at_risk_left -= static_cast<double>(removed_left);
  }
  if (variance <= 0.0) return -1.0;
  const double diff = observed - expected;
  return diff * diff / variance;
}

// Product-limit estimate over the node's subjects, stored compactly as the
// node's own event times. All-censored nodes get an empty curve (constant 1).
SurvivalForest::LeafCurve make_leaf_curve(const SurvivalDataset& data, TreeScratch& scratch,
                                          std::size_t begin, std::size_t end) {
  const auto& times = data.times();
  const auto& events = data.events();
  scratch.km_times.clear();
  scratch.km_values.clear();
  double survival = 1.0;
  double at_risk = static_cast<double>(end - begin);
  std::size_t k = 0;
  const std::size_t m = end - begin;
  while (k < m) {
    const double t = times[scratch.order[k]];
    std::size_t deaths = 0, removed = 0;
    while (k < m && times[scratch.order[k]] == t) {
      ++removed;
      if (events[scratch.order[k]]) ++deaths;
      ++k;
    }
    if (deaths > 0) {
      survival *= 1.0 - static_cast<double>(deaths) / at_risk;
      scratch.km_times.push_back(t);
      scratch.km_values.push_back(survival);
    }
    at_risk -= static_cast<double>(removed);
  }
  return {scratch.km_times, scratch.km_values};
}

SurvivalForest::Tree fit_tree(const SurvivalDataset& data, const ForestConfig& config,
                              std::size_t resolved_depth, std::uint64_t tree_seed) {
  const std::size_t n = data.n();
  const std::size_t sample_size =
      std::min(n, static_cast<std::size_t>(config.max_subjects_per_tree));
  const std::size_t min_split = static_cast<std::size_t>(config.min_split);
  const std::size_t min_leaf = static_cast<std::size_t>(config.min_leaf);
  Rng rng(tree_seed);

  TreeScratch scratch;
  scratch.indices.resize(sample_size);
  for (std::size_t k = 0; k < sample_size; ++k) scratch.indices[k] = rng.below(n);

  const auto& times = data.times();
  const auto& events = data.events();

  SurvivalForest::Tree tree;
  std::vector<NodeTask> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, sample_size, 0, 0});

  while (!stack.empty()) {
    const NodeTask task = stack.back();
    stack.pop_back();
    const std::size_t size = task.end - task.begin;

    // Time-sorted view of this node's subjects, shared by the split search
    // and the leaf estimator.
    scratch.order.assign(scratch.indices.begin() + static_cast<std::ptrdiff_t>(task.begin),
                         scratch.indices.begin() + static_cast<std::ptrdiff_t>(task.end));
    std::sort(scratch.order.begin(), scratch.order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    std::size_t node_events = 0;
    for (std::size_t k = task.begin; k < task.end; ++k) node_events += events[scratch.indices[k]];

    bool split_found = false;
    std::size_t best_feature = 0;
    double best_threshold = 0.0, best_score = 0.0;

    if (size >= min_split && task.depth < resolved_depth && node_events > 0) {
      for (std::size_t j = 0; j < data.p(); ++j) {
        const auto col = data.column(j);
        scratch.values.clear();
        for (std::size_t k = task.begin; k < task.end; ++k)
          scratch.values.push_back(col[scratch.indices[k]]);
        std::sort(scratch.values.begin(), scratch.values.end());
        scratch.values.erase(std::unique(scratch.values.begin(), scratch.values.end()),
                             scratch.values.end());
        if (scratch.values.size() < 2) continue;

        scratch.candidates.clear();
        for (std::size_t v = 0; v + 1 < scratch.values.size(); ++v)
          scratch.candidates.push_back(0.5 * (scratch.values[v] + scratch.values[v + 1]));
        if (scratch.candidates.size() > kMaxSplitCandidates) {
          std::vector<double> thinned(kMaxSplitCandidates);
          const std::size_t last = scratch.candidates.size() - 1;
          for (std::size_t c = 0; c < kMaxSplitCandidates; ++c)
            thinned[c] = scratch.candidates[c * last / (kMaxSplitCandidates - 1)];
          scratch.candidates = std::move(thinned);
        }

        for (const double threshold : scratch.candidates) {
          const double score =
              split_score(data, scratch, task.begin, task.end, j, threshold, min_leaf);
          if (score > best_score) {
            best_score = score;
            best_feature = j;
            best_threshold = threshold;
            split_found = true;
          }
        }
      }
    }

    if (!split_found) {
      tree.nodes[task.node].feature = -1;
      tree.nodes[task.node].curve = static_cast<std::int32_t>(tree.curves.size());
      tree.curves.push_back(make_leaf_curve(data, scratch, task.begin, task.end));
      continue;
    }

    // Stable partition: left child keeps x <= threshold, preserving order.
    const auto col = data.column(best_feature);
    scratch.buffer.clear();
    std::size_t write = task.begin;
    for (std::size_t k = task.begin; k < task.end; ++k) {
      const std::size_t i = scratch.indices[k];
      if (col[i] <= best_threshold)
        scratch.indices[write++] = i;
      else
        scratch.buffer.push_back(i);
    }
    const std::size_t mid = write;
    for (const std::size_t i : scratch.buffer) scratch.indices[write++] = i;

    auto& node = tree.nodes[task.node];
    node.feature = static_cast<std::int32_t>(best_feature);
    node.threshold = best_threshold;
    node.left = static_cast<std::int32_t>(tree.nodes.size());
    node.right = node.left + 1;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    stack.push_back({mid, task.end, static_cast<std::size_t>(node.right), task.depth + 1});
    stack.push_back({task.begin, mid, static_cast<std::size_t>(node.left), task.depth + 1});
  }
  return tree;
}

std::size_t route(const SurvivalForest::Tree& tree, const SurvivalDataset& data,
                  std::size_t subject) {
  std::size_t node = 0;
  while (tree.nodes[node].feature >= 0) {
    const auto& nd = tree.nodes[node];
    node = data.x(subject, static_cast<std::size_t>(nd.feature)) <= nd.threshold
               ? static_cast<std::size_t>(nd.left)
               : static_cast<std::size_t>(nd.right);
  }
  return node;
}

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

bool read_doubles(std::istream& in, std::vector<double>& v) {
  std::uint64_t size = 0;
  if (!read_pod(in, size)) return false;
  if (size > (1ull << 32)) return false;
  v.resize(size);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(size * sizeof(double)));
  return static_cast<bool>(in);
}

}  // namespace

SurvivalForest::SurvivalForest(std::vector<double> grid, std::vector<Tree> trees,
                               std::size_t n_features)
    : grid_(std::move(grid)), trees_(std::move(trees)), n_features_(n_features) {
  if (grid_.empty()) throw ArgumentError("forest grid must be non-empty");
  if (trees_.empty()) throw ArgumentError("forest must contain at least one tree");
}

SurvivalForest SurvivalForest::fit(const SurvivalDataset& data, const ForestConfig& config,
                                   int threads) {
  check_config(config);
  if (data.n() < static_cast<std::size_t>(config.min_leaf))
    throw ConfigError("dataset has fewer subjects than min_leaf");
  const std::size_t resolved_depth =
      config.max_depth > 0 ? static_cast<std::size_t>(config.max_depth) : 2 * data.p();

  std::vector<Tree> trees(static_cast<std::size_t>(config.n_trees));
  parallel_blocks(trees.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t)
      trees[t] = fit_tree(data, config, resolved_depth, mix_seed(config.seed, t));
  });

  return SurvivalForest(unique_event_times(data), std::move(trees), data.p());
}

SurvivalMatrix SurvivalForest::predict_matrix(const SurvivalDataset& data, int threads) const {
  if (data.p() != n_features_)
    throw ShapeError("dataset has " + std::to_string(data.p()) +
                     " features but the forest was fit with " + std::to_string(n_features_));
  const std::size_t n = data.n();
  const std::size_t m = grid_.size();

  SurvivalMatrix matrix;
  matrix.rows = n;
  matrix.cols = m;
  matrix.grid = grid_;
  matrix.data.assign(n * m, 0.0);

  for (const Tree& tree : trees_) {
    // Expand every leaf of this tree once, then add it to each routed row.
    // Tree order is serial so the sums are identical for any thread count.
    std::vector<std::vector<double>> leaf_dense(tree.curves.size());
    for (std::size_t c = 0; c < tree.curves.size(); ++c) {
      const LeafCurve& leaf = tree.curves[c];
      std::vector<double> dense(m, 1.0);
      std::size_t k = 0;
      double current = 1.0;
      for (std::size_t u = 0; u < m; ++u) {
        while (k < leaf.times.size() && leaf.times[k] <= grid_[u]) current = leaf.values[k++];
        dense[u] = current;
      }
      leaf_dense[c] = std::move(dense);
    }
    parallel_blocks(n, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t leaf = route(tree, data, i);
        const auto& add = leaf_dense[static_cast<std::size_t>(tree.nodes[leaf].curve)];
        double* row = matrix.data.data() + i * m;
        for (std::size_t u = 0; u < m; ++u) row[u] += add[u];
      }
    });
  }

  const double inv = 1.0 / static_cast<double>(trees_.size());
  for (double& v : matrix.data) v *= inv;
  return matrix;
}

StepCurve population_curve(const SurvivalMatrix& matrix) {
  if (matrix.rows == 0 || matrix.cols == 0)
    throw ShapeError("survival matrix is empty");
  std::vector<double> mean(matrix.cols, 0.0);
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    const double* row = matrix.data.data() + i * matrix.cols;
    for (std::size_t u = 0; u < matrix.cols; ++u) mean[u] += row[u];
  }
  const double inv = 1.0 / static_cast<double>(matrix.rows);
  for (double& v : mean) v *= inv;
  StepCurve curve;
  curve.grid = matrix.grid;
  curve.values = std::move(mean);
  return curve;
}

void SurvivalForest::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, static_cast<std::uint64_t>(n_features_));
  write_doubles(out, grid_);
  write_pod(out, static_cast<std::uint64_t>(trees_.size()));
  for (const Tree& tree : trees_) {
    write_pod(out, static_cast<std::uint64_t>(tree.nodes.size()));
    for (const Node& node : tree.nodes) {
      write_pod(out, node.feature);
      write_pod(out, node.threshold);
      write_pod(out, node.left);
      write_pod(out, node.right);
      write_pod(out, node.curve);
    }
    write_pod(out, static_cast<std::uint64_t>(tree.curves.size()));
    for (const LeafCurve& curve : tree.curves) {
      write_doubles(out, curve.times);
      write_doubles(out, curve.values);
    }
  }
  if (!out) throw IoError("failed to write forest");
}

SurvivalForest SurvivalForest::load(std::istream& in) {
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a forest file (bad magic)");
  std::uint64_t n_features = 0, n_trees = 0;
  std::vector<double> grid;
  if (!read_pod(in, n_features) || !read_doubles(in, grid) || !read_pod(in, n_trees))
    throw IoError("truncated forest file");
  std::vector<Tree> trees(n_trees);
  for (Tree& tree : trees) {
    std::uint64_t n_nodes = 0;
    if (!read_pod(in, n_nodes) || n_nodes == 0) throw IoError("truncated forest file");
    tree.nodes.resize(n_nodes);
    for (Node& node : tree.nodes) {
      if (!read_pod(in, node.feature) || !read_pod(in, node.threshold) ||
          !read_pod(in, node.left) || !read_pod(in, node.right) || !read_pod(in, node.curve))
        throw IoError("truncated forest file");
    }
    std::uint64_t n_curves = 0;
    if (!read_pod(in, n_curves)) throw IoError("truncated forest file");
    tree.curves.resize(n_curves);
    for (LeafCurve& curve : tree.curves) {
      if (!read_doubles(in, curve.times) || !read_doubles(in, curve.values))
        throw IoError("truncated forest file");
    }
  }
  return SurvivalForest(std::move(grid), std::move(trees),
                        static_cast<std::size_t>(n_features));
}

}  // namespace survgroup
