#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cpte/classify.hpp"
#include "cpte/error.hpp"
#include "cpte/parallel.hpp"
#include "cpte/random.hpp"

namespace cpte {

namespace {

// Gini impurity times node size: n - (a^2 + b^2) / n.
double weighted_gini(double a, double b) {
  const double n = a + b;
  return n > 0.0 ? n - (a * a + b * b) / n : 0.0;
}

Group majority(std::size_t count_a, std::size_t count_b) { return count_b > count_a ? Group::B : Group::A; }

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

}  // namespace

RandomForest::Tree RandomForest::grow(const FeatureTable& data, std::span<const std::size_t> rows,
                                      const ForestParams& params, int max_features, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = rows.size();
  const std::size_t width = data.cols();

  std::vector<std::size_t> sample(n);
  for (std::size_t i = 0; i < n; ++i) sample[i] = rows[rng.index(n)];

  std::vector<int> feature_order(width);
  std::iota(feature_order.begin(), feature_order.end(), 0);
  std::vector<std::pair<double, Group>> column;

  Tree tree;
  tree.emplace_back();
  struct Work {
    std::size_t begin, end;
    std::int32_t node;
  };
  std::vector<Work> stack{{0, n, 0}};

  while (!stack.empty()) {
    const Work w = stack.back();
    stack.pop_back();
    std::size_t count_b = 0;
    for (std::size_t i = w.begin; i < w.end; ++i) count_b += data.labels[sample[i]] == Group::B;
    const std::size_t size = w.end - w.begin;
    const std::size_t count_a = size - count_b;
    tree[static_cast<std::size_t>(w.node)].label = majority(count_a, count_b);
    if (count_a == 0 || count_b == 0 || size < params.min_split) continue;

    // Draw features without replacement until max_features non-constant ones
    // have been scored, as scikit-learn does.
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    int scored = 0;
    for (std::size_t drawn = 0; drawn < width && scored < max_features; ++drawn) {
      const std::size_t pick = drawn + rng.index(width - drawn);
      std::swap(feature_order[drawn], feature_order[pick]);
      const int f = feature_order[drawn];

      column.clear();
      for (std::size_t i = w.begin; i < w.end; ++i)
        column.emplace_back(data.values[sample[i] * width + static_cast<std::size_t>(f)], data.labels[sample[i]]);
      std::sort(column.begin(), column.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      if (column.front().first == column.back().first) continue;
      ++scored;

      double left_a = 0.0, left_b = 0.0;
      const double total_a = static_cast<double>(count_a), total_b = static_cast<double>(count_b);
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        (column[i].second == Group::A ? left_a : left_b) += 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const double imp = weighted_gini(left_a, left_b) + weighted_gini(total_a - left_a, total_b - left_b);
        if (imp < best.impurity) {
          double mid = 0.5 * (column[i].first + column[i + 1].first);
          if (!(mid < column[i + 1].first)) mid = column[i].first;
          best = {f, mid, imp};
        }
      }
    }
    if (best.feature < 0) continue;

    const auto f = static_cast<std::size_t>(best.feature);
    auto mid_it = std::partition(sample.begin() + static_cast<std::ptrdiff_t>(w.begin),
                                 sample.begin() + static_cast<std::ptrdiff_t>(w.end),
                                 [&](std::size_t r) { return data.values[r * width + f] <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - sample.begin());

    const auto left = static_cast<std::int32_t>(tree.size());
    tree.emplace_back();
    tree.emplace_back();
    Node& node = tree[static_cast<std::size_t>(w.node)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({mid, w.end, left + 1});
    stack.push_back({w.begin, mid, left});
  }
  return tree;
}

RandomForest RandomForest::train(const FeatureTable& data, std::span<const std::size_t> rows,
                                 const ForestParams& params) {
  if (rows.empty()) throw Error("empty_training_set", "random forest needs training rows");
  if (params.trees < 1) throw Error("bad_forest", "need at least one tree");
  bool has_a = false, has_b = false;
  for (std::size_t r : rows) (data.labels[r] == Group::A ? has_a : has_b) = true;
  if (!has_a || !has_b) throw Error("single_class", "training set contains a single class");

  const std::size_t width = data.cols();
  int max_features = params.max_features;
  if (max_features <= 0) max_features = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(width)))));
  max_features = std::min<int>(max_features, static_cast<int>(width));

  RandomForest forest;
  forest.n_features_ = width;
  forest.trees_.resize(static_cast<std::size_t>(params.trees));
  parallel_for(forest.trees_.size(), [&](std::size_t t) {
    forest.trees_[t] = grow(data, rows, params, max_features, derive_seed(params.seed, {t}));
  }, true);
  return forest;
}

RandomForest RandomForest::train(const FeatureTable& data, const ForestParams& params) {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return train(data, rows, params);
}

Group RandomForest::predict_tree(const Tree& tree, std::span<const double> features) {
  std::size_t i = 0;
  while (tree[i].feature >= 0)
    i = static_cast<std::size_t>(features[static_cast<std::size_t>(tree[i].feature)] <= tree[i].threshold
                                     ? tree[i].left
                                     : tree[i].right);
  return tree[i].label;
}

Group RandomForest::predict_row(std::span<const double> features) const {
  if (features.size() != n_features_) throw Error("size_mismatch", "feature width differs from training data");
  std::size_t votes_b = 0;
  for (const Tree& t : trees_) votes_b += predict_tree(t, features) == Group::B;
  return majority(trees_.size() - votes_b, votes_b);
}

std::vector<Group> RandomForest::predict(const FeatureTable& data, std::span<const std::size_t> rows) const {
  std::vector<Group> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = predict_row(data.row(rows[i]));
  return out;
}

std::vector<Group> RandomForest::predict(const FeatureTable& data) const {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return predict(data, rows);
}

std::size_t RandomForest::node_count() const {
  std::size_t n = 0;
  for (const Tree& t : trees_) n += t.size();
  return n;
}

}  // namespace cpte
