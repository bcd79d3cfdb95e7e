#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpte/features.hpp"

namespace cpte {

// ---------------------------------------------------------------------------
// k-nearest neighbours

// Euclidean distance, majority vote among the k nearest training rows.
// Distance ties go to the earlier training row; vote ties go to the label
// of the single nearest neighbour. Test rows are classified in parallel.
std::vector<Group> knn_classify(const FeatureTable& data, std::span<const std::size_t> train_rows,
                                std::span<const std::size_t> test_rows, int k);
std::vector<Group> knn_classify(const FeatureTable& train, const FeatureTable& test, int k);

// ---------------------------------------------------------------------------
// Random forest

struct ForestParams {
  int trees = 100;
  int max_features = 0;       // 0: floor(sqrt(F))
  std::size_t min_split = 2;  // smallest node that may be split
  std::uint64_t seed = 0;
};

// Bagged CART trees grown to purity on Gini impurity. Tree t draws its
// bootstrap and feature subsets from derive_seed(seed, {t}), so a model is
// a function of (data, rows, params) alone.
class RandomForest {
 public:
  static RandomForest train(const FeatureTable& data, std::span<const std::size_t> rows,
                            const ForestParams& params);
  static RandomForest train(const FeatureTable& data, const ForestParams& params);

  Group predict_row(std::span<const double> features) const;
  std::vector<Group> predict(const FeatureTable& data, std::span<const std::size_t> rows) const;
  std::vector<Group> predict(const FeatureTable& data) const;

  std::size_t tree_count() const { return trees_.size(); }
  std::size_t node_count() const;

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    Group label = Group::A;
  };
  using Tree = std::vector<Node>;

  static Tree grow(const FeatureTable& data, std::span<const std::size_t> rows, const ForestParams& params,
                   int max_features, std::uint64_t seed);
  static Group predict_tree(const Tree& tree, std::span<const double> features);

  std::size_t n_features_ = 0;
  std::vector<Tree> trees_;
};

// ---------------------------------------------------------------------------
// Cross-validation

struct ClassifierSpec {
  enum class Kind { RandomForest, Knn };
  Kind kind = Kind::RandomForest;
  int k = 5;
  ForestParams forest;  // seed is replaced per fold

  std::string name() const { return kind == Kind::RandomForest ? "RF" : "kNN"; }
};

enum class CvMode { Epoch, Subject };

struct CvOptions {
  int folds = 10;
  int repeats = 10;
  std::uint64_t seed = 0;
  CvMode mode = CvMode::Epoch;
};

// GroupB is the positive class.
struct FoldResult {
  int repeat = 0;
  int fold = 0;
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;

  double accuracy() const;
  double sensitivity() const;
  double specificity() const;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over all fold results
};

struct CvReport {
  std::string classifier;
  std::string band;
  std::string measures;
  double threshold = 0.0;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  CvOptions options;
  std::vector<FoldResult> fold_results;  // repeat-major
  MetricSummary accuracy;
  MetricSummary sensitivity;
  MetricSummary specificity;
};

// Stratified assignment of rows (or of whole subjects in Subject mode) to
// folds. Each class is shuffled and dealt round-robin, continuing the deal
// where the previous class stopped.
std::vector<std::vector<std::size_t>> stratified_folds(const FeatureTable& table, int folds, CvMode mode,
                                                       std::uint64_t seed);

CvReport cross_validate(const FeatureTable& table, const ClassifierSpec& spec, const CvOptions& options);

// Copy of `table` with labels permuted by a seeded shuffle.
FeatureTable shuffle_labels(const FeatureTable& table, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Threshold sweep

struct SweepPoint {
  double threshold = 0.0;
  CvReport report;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double best_threshold = 0.0;
  double best_accuracy = 0.0;
};

// {0.0, 0.1, ..., 1.0}
std::vector<double> default_threshold_grid();

// Highest mean accuracy wins; ties go to the smaller threshold.
SweepResult threshold_sweep(std::span<const SyncMatrix> matrices, std::span<const Measure> measures,
                            const ClassifierSpec& spec, const CvOptions& options,
                            std::span<const double> grid,
                            const std::vector<std::string>& channel_names = {});

}  // namespace cpte
