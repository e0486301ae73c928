#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "classify_impl.hpp"
#include "sentinel/error.hpp"

namespace sentinel::classify::detail {

namespace {

double gini(std::size_t pos, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(total);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct Split {
  double gain = -1.0;
  int feature = -1;
  double threshold = 0.0;
};

// Best Gini split over the given features. Candidate thresholds are
// midpoints between consecutive distinct values; ties stay with the first
// (lowest feature, smallest threshold) so the result is independent of
// sample order. Zero-gain candidates are still valid splits: an impure node
// keeps splitting until it is pure or every feature is constant, which is
// what drives training accuracy to 100% on duplicate-free data.
Split best_split(const TrainingSet& data, std::span<const int> samples,
                 std::span<const int> features) {
  const std::size_t n = samples.size();
  std::size_t total_pos = 0;
  for (int i : samples) total_pos += static_cast<std::size_t>(data.y[i]);
  const double parent = gini(total_pos, n);

  Split best;
  std::vector<std::pair<float, int>> values(n);
  for (int f : features) {
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = {data.x[samples[i]][static_cast<std::size_t>(f)], data.y[samples[i]]};
    }
    std::sort(values.begin(), values.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::size_t left_n = 0;
    std::size_t left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left_n;
      left_pos += static_cast<std::size_t>(values[i].second);
      if (values[i].first == values[i + 1].first) continue;
      const std::size_t right_n = n - left_n;
      const std::size_t right_pos = total_pos - left_pos;
      const double weighted =
          (static_cast<double>(left_n) * gini(left_pos, left_n) +
           static_cast<double>(right_n) * gini(right_pos, right_n)) /
          static_cast<double>(n);
      const double gain = parent - weighted;
      if (gain > best.gain + 1e-12) {
        best.gain = gain;
        best.feature = f;
        best.threshold = (static_cast<double>(values[i].first) +
                          static_cast<double>(values[i + 1].first)) /
                         2.0;
      }
    }
  }
  return best;
}

struct TreeBuilder {
  const TrainingSet& data;
  const TreeBuildOptions& options;
  std::vector<TreeNode> nodes;
  std::mt19937_64 rng;
  std::vector<int> all_features;

  int build(std::vector<int>& samples, int depth) {
    const std::size_t n = samples.size();
    std::size_t pos = 0;
    for (int i : samples) pos += static_cast<std::size_t>(data.y[i]);

    const bool pure = pos == 0 || pos == n;
    const bool depth_capped = options.max_depth > 0 && depth >= options.max_depth;
    const bool too_small = n < static_cast<std::size_t>(options.min_samples_split);

    auto make_leaf = [&] {
      TreeNode leaf;
      leaf.proba = static_cast<double>(pos) / static_cast<double>(n);
      nodes.push_back(leaf);
      return static_cast<int>(nodes.size() - 1);
    };
    if (pure || depth_capped || too_small) return make_leaf();

    std::span<const int> features = all_features;
    std::vector<int> sampled;
    if (options.max_features > 0 &&
        options.max_features < static_cast<int>(all_features.size())) {
      sampled = all_features;
      std::shuffle(sampled.begin(), sampled.end(), rng);
      sampled.resize(static_cast<std::size_t>(options.max_features));
      std::sort(sampled.begin(), sampled.end());
      features = sampled;
    }

    const Split split = best_split(data, samples, features);
    if (split.feature < 0) return make_leaf();

    std::vector<int> left;
    std::vector<int> right;
    for (int i : samples) {
      if (static_cast<double>(data.x[i][static_cast<std::size_t>(split.feature)]) <=
          split.threshold) {
        left.push_back(i);
      } else {
        right.push_back(i);
      }
    }
    samples.clear();
    samples.shrink_to_fit();

    TreeNode node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    nodes.push_back(node);
    const int index = static_cast<int>(nodes.size() - 1);
    const int left_index = build(left, depth + 1);
    const int right_index = build(right, depth + 1);
    nodes[static_cast<std::size_t>(index)].left = left_index;
    nodes[static_cast<std::size_t>(index)].right = right_index;
    return index;
  }
};

}  // namespace

std::vector<TreeNode> build_tree(const TrainingSet& data, std::span<const int> sample_indices,
                                 const TreeBuildOptions& options) {
  TreeBuilder builder{data, options, {}, std::mt19937_64(options.seed), {}};
  builder.all_features.resize(data.dim());
  std::iota(builder.all_features.begin(), builder.all_features.end(), 0);
  std::vector<int> samples(sample_indices.begin(), sample_indices.end());
  builder.build(samples, 0);
  return std::move(builder.nodes);
}

double tree_proba(std::span<const TreeNode> nodes, std::span<const float> x) {
  std::size_t index = 0;
  while (nodes[index].feature >= 0) {
    const TreeNode& node = nodes[index];
    index = static_cast<std::size_t>(
        static_cast<double>(x[static_cast<std::size_t>(node.feature)]) <= node.threshold
            ? node.left
            : node.right);
  }
  return nodes[index].proba;
}

json tree_to_json(std::span<const TreeNode> nodes) {
  json out = json::array();
  for (const TreeNode& node : nodes) {
    out.push_back({{"f", node.feature},
                   {"t", node.threshold},
                   {"l", node.left},
                   {"r", node.right},
                   {"p", node.proba}});
  }
  return out;
}

std::vector<TreeNode> tree_from_json(const json& doc) {
  std::vector<TreeNode> nodes;
  nodes.reserve(doc.size());
  for (const json& item : doc) {
    TreeNode node;
    node.feature = item.at("f").get<int>();
    node.threshold = item.at("t").get<double>();
    node.left = item.at("l").get<int>();
    node.right = item.at("r").get<int>();
    node.proba = item.at("p").get<double>();
    nodes.push_back(node);
  }
  return nodes;
}

// --- decision tree ---

double DecisionTree::predict_proba(std::span<const float> x) const {
  check_input(x);
  return tree_proba(nodes_, x);
}

json DecisionTree::to_json() const {
  return json{{"dim", dim_}, {"nodes", tree_to_json(nodes_)}};
}

std::unique_ptr<TrainedClassifier> DecisionTree::fit(const Hyperparameters& p,
                                                     const TrainingSet& data) {
  TreeBuildOptions options;
  options.max_depth = p.tree_max_depth;
  options.min_samples_split = p.tree_min_samples_split;
  options.seed = p.seed;
  std::vector<int> samples(data.size());
  std::iota(samples.begin(), samples.end(), 0);
  return std::make_unique<DecisionTree>(build_tree(data, samples, options), data.dim());
}

std::unique_ptr<TrainedClassifier> DecisionTree::from_json(const json& doc) {
  return std::make_unique<DecisionTree>(tree_from_json(doc.at("nodes")),
                                        doc.at("dim").get<std::size_t>());
}

// --- random forest: bagged CART with per-split feature subsampling ---

double RandomForest::predict_proba(std::span<const float> x) const {
  check_input(x);
  double sum = 0.0;
  for (const std::vector<TreeNode>& tree : trees_) sum += tree_proba(tree, x);
  return sum / static_cast<double>(trees_.size());
}

json RandomForest::to_json() const {
  json trees = json::array();
  for (const std::vector<TreeNode>& tree : trees_) trees.push_back(tree_to_json(tree));
  return json{{"dim", dim_}, {"trees", std::move(trees)}};
}

std::unique_ptr<TrainedClassifier> RandomForest::fit(const Hyperparameters& p,
                                                     const TrainingSet& data) {
  if (p.forest_trees < 1) throw Error("config", "forest_trees must be >= 1");
  const std::size_t n = data.size();
  const int max_features =
      p.forest_max_features > 0
          ? p.forest_max_features
          : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(data.dim())))));

  std::vector<std::vector<TreeNode>> trees;
  trees.reserve(static_cast<std::size_t>(p.forest_trees));
  std::mt19937_64 rng(p.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int t = 0; t < p.forest_trees; ++t) {
    std::vector<int> bootstrap(n);
    for (std::size_t i = 0; i < n; ++i) bootstrap[i] = static_cast<int>(pick(rng));
    TreeBuildOptions options;
    options.max_depth = p.tree_max_depth;
    options.min_samples_split = p.tree_min_samples_split;
    options.max_features = max_features;
    options.seed = rng();
    trees.push_back(build_tree(data, bootstrap, options));
  }
  return std::make_unique<RandomForest>(std::move(trees), data.dim());
}

std::unique_ptr<TrainedClassifier> RandomForest::from_json(const json& doc) {
  std::vector<std::vector<TreeNode>> trees;
  for (const json& tree : doc.at("trees")) trees.push_back(tree_from_json(tree));
  return std::make_unique<RandomForest>(std::move(trees), doc.at("dim").get<std::size_t>());
}

// --- AdaBoost with depth-1 stumps ---

double AdaBoost::predict_proba(std::span<const float> x) const {
  check_input(x);
  double alpha_sum = 0.0;
  double accept_sum = 0.0;
  for (const Stump& stump : stumps_) {
    alpha_sum += stump.alpha;
    if (stump.predict(x) == 1) accept_sum += stump.alpha;
  }
  // Weighted vote fraction keeps predict consistent with the strict
  // probability threshold.
  return alpha_sum > 0.0 ? accept_sum / alpha_sum : 0.5;
}

json AdaBoost::to_json() const {
  json stumps = json::array();
  for (const Stump& s : stumps_) {
    stumps.push_back({{"f", s.feature}, {"t", s.threshold}, {"pol", s.polarity}, {"a", s.alpha}});
  }
  return json{{"dim", dim_}, {"stumps", std::move(stumps)}};
}

namespace {

// Minimum weighted-error stump; error is always <= 0.5 because polarity can
// flip any split.
AdaBoost::Stump best_stump(const TrainingSet& data, std::span<const double> weights) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();

  double total_pos = 0.0;  // weight of accept samples
  for (std::size_t i = 0; i < n; ++i) {
    if (data.y[i] == 1) total_pos += weights[i];
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);

  AdaBoost::Stump best;
  double best_error = 2.0;
  for (std::size_t f = 0; f < d; ++f) {
    std::vector<std::pair<float, std::size_t>> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = {data.x[i][f], i};
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Threshold below every sample: "x > t" predicts 1 everywhere.
    auto consider = [&](double threshold, double pos_left, double weight_left) {
      // polarity +1: predict 1 on the right side
      const double pos_right = total_pos - pos_left;
      const double neg_right = (total - weight_left) - pos_right;
      const double error_plus = pos_left + neg_right;  // left accepts + right rejects mislabeled
      const double error = std::min(error_plus, total - error_plus);
      if (error < best_error - 1e-15) {
        best_error = error;
        best.feature = static_cast<int>(f);
        best.threshold = threshold;
        best.polarity = error_plus <= total - error_plus ? 1 : -1;
      }
    };

    consider(static_cast<double>(order.front().first) - 1.0, 0.0, 0.0);
    double pos_left = 0.0;
    double weight_left = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t idx = order[i].second;
      weight_left += weights[idx];
      if (data.y[idx] == 1) pos_left += weights[idx];
      if (order[i].first == order[i + 1].first) continue;
      consider((static_cast<double>(order[i].first) + static_cast<double>(order[i + 1].first)) / 2.0,
               pos_left, weight_left);
    }
  }
  return best;
}

}  // namespace

std::unique_ptr<TrainedClassifier> AdaBoost::fit(const Hyperparameters& p,
                                                 const TrainingSet& data) {
  const std::size_t n = data.size();
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  std::vector<Stump> stumps;
  stumps.reserve(static_cast<std::size_t>(p.adaboost_rounds));

  for (int round = 0; round < p.adaboost_rounds; ++round) {
    Stump stump = best_stump(data, weights);
    double error = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (stump.predict(data.x[i]) != data.y[i]) error += weights[i];
    }
    if (error > 0.5) {
      throw Error("train", "adaboost stump weighted error exceeds 0.5 at round " +
                               std::to_string(round));
    }
    const double clamped = std::clamp(error, 1e-12, 1.0 - 1e-12);
    stump.alpha = 0.5 * std::log((1.0 - clamped) / clamped);
    stumps.push_back(stump);
    if (error < 1e-12) break;  // perfect stump; further rounds add nothing

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool wrong = stump.predict(data.x[i]) != data.y[i];
      weights[i] *= std::exp(wrong ? stump.alpha : -stump.alpha);
      sum += weights[i];
    }
    for (double& w : weights) w /= sum;
  }
  return std::make_unique<AdaBoost>(std::move(stumps), data.dim());
}

std::unique_ptr<TrainedClassifier> AdaBoost::from_json(const json& doc) {
  std::vector<Stump> stumps;
  for (const json& item : doc.at("stumps")) {
    Stump s;
    s.feature = item.at("f").get<int>();
    s.threshold = item.at("t").get<double>();
    s.polarity = item.at("pol").get<int>();
    s.alpha = item.at("a").get<double>();
    stumps.push_back(s);
  }
  return std::make_unique<AdaBoost>(std::move(stumps), doc.at("dim").get<std::size_t>());
}

}  // namespace sentinel::classify::detail
