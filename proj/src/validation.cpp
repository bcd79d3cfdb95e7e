#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cpte/classify.hpp"
#include "cpte/error.hpp"
#include "cpte/parallel.hpp"
#include "cpte/random.hpp"

namespace cpte {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

MetricSummary summarize(const std::vector<double>& v) {
  MetricSummary s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace

double FoldResult::accuracy() const { return ratio(tp + tn, tp + tn + fp + fn); }
double FoldResult::sensitivity() const { return ratio(tp, tp + fn); }
double FoldResult::specificity() const { return ratio(tn, tn + fp); }

std::vector<std::vector<std::size_t>> stratified_folds(const FeatureTable& table, int folds, CvMode mode,
                                                       std::uint64_t seed) {
  if (folds < 2) throw Error("bad_folds", "need at least 2 folds");
  const auto k = static_cast<std::size_t>(folds);
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> out(k);

  if (mode == CvMode::Epoch) {
    std::vector<std::size_t> by_class[2];
    for (std::size_t r = 0; r < table.rows(); ++r) by_class[table.labels[r] == Group::B].push_back(r);
    for (const auto& c : by_class)
      if (c.size() < k) throw Error("class_too_small", "class smaller than fold count");
    std::size_t slot = 0;
    for (auto& c : by_class) {
      rng.shuffle(c.begin(), c.end());
      for (std::size_t r : c) out[slot++ % k].push_back(r);
    }
  } else {
    std::map<std::string, std::vector<std::size_t>> rows_of;
    std::map<std::string, Group> group_of;
    for (std::size_t r = 0; r < table.rows(); ++r) {
      rows_of[table.subject_ids[r]].push_back(r);
      group_of[table.subject_ids[r]] = table.labels[r];
    }
    std::vector<std::string> by_class[2];
    for (const auto& [s, g] : group_of) by_class[g == Group::B].push_back(s);
    for (const auto& c : by_class)
      if (c.size() < k) throw Error("class_too_small", "class has fewer subjects than folds");
    std::size_t slot = 0;
    for (auto& c : by_class) {
      rng.shuffle(c.begin(), c.end());
      for (const std::string& s : c) {
        auto& f = out[slot++ % k];
        f.insert(f.end(), rows_of[s].begin(), rows_of[s].end());
      }
    }
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

CvReport cross_validate(const FeatureTable& table, const ClassifierSpec& spec, const CvOptions& options) {
  if (options.repeats < 1) throw Error("bad_repeats", "need at least one repeat");
  const auto k = static_cast<std::size_t>(std::max(options.folds, 0));
  const auto repeats = static_cast<std::size_t>(options.repeats);

  std::vector<std::vector<std::vector<std::size_t>>> assignments(repeats);
  for (std::size_t r = 0; r < repeats; ++r)
    assignments[r] = stratified_folds(table, options.folds, options.mode, derive_seed(options.seed, {r, 0}));

  CvReport report;
  report.classifier = spec.name();
  report.band = table.bands.empty() ? std::string() : table.bands.front();
  report.measures = measures_label(table.measures);
  report.threshold = table.threshold;
  report.n_rows = table.rows();
  report.n_features = table.cols();
  report.options = options;
  report.fold_results.resize(repeats * k);

  parallel_for(repeats * k, [&](std::size_t job) {
    const std::size_t r = job / k;
    const std::size_t f = job % k;
    const auto& test = assignments[r][f];
    std::vector<std::size_t> train;
    train.reserve(table.rows() - test.size());
    for (std::size_t g = 0; g < k; ++g)
      if (g != f) train.insert(train.end(), assignments[r][g].begin(), assignments[r][g].end());
    std::sort(train.begin(), train.end());

    std::vector<Group> predicted;
    if (spec.kind == ClassifierSpec::Kind::Knn) {
      predicted = knn_classify(table, train, test, spec.k);
    } else {
      ForestParams params = spec.forest;
      params.seed = derive_seed(options.seed, {r, f + 1});
      predicted = RandomForest::train(table, train, params).predict(table, test);
    }

    FoldResult fr;
    fr.repeat = static_cast<int>(r);
    fr.fold = static_cast<int>(f);
    for (std::size_t i = 0; i < test.size(); ++i) {
      const bool actual_b = table.labels[test[i]] == Group::B;
      const bool pred_b = predicted[i] == Group::B;
      if (actual_b) (pred_b ? fr.tp : fr.fn)++;
      else (pred_b ? fr.fp : fr.tn)++;
    }
    report.fold_results[job] = fr;
  }, true);

  std::vector<double> acc, sens, spec_v;
  for (const FoldResult& fr : report.fold_results) {
    acc.push_back(fr.accuracy());
    sens.push_back(fr.sensitivity());
    spec_v.push_back(fr.specificity());
  }
  report.accuracy = summarize(acc);
  report.sensitivity = summarize(sens);
  report.specificity = summarize(spec_v);
  return report;
}

FeatureTable shuffle_labels(const FeatureTable& table, std::uint64_t seed) {
  FeatureTable out = table;
  Rng rng(seed);
  rng.shuffle(out.labels.begin(), out.labels.end());
  return out;
}

std::vector<double> default_threshold_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

SweepResult threshold_sweep(std::span<const SyncMatrix> matrices, std::span<const Measure> measures,
                            const ClassifierSpec& spec, const CvOptions& options, std::span<const double> grid,
                            const std::vector<std::string>& channel_names) {
  if (matrices.empty()) throw Error("empty_input", "no matrices to sweep");
  if (grid.empty()) throw Error("bad_grid", "threshold grid is empty");
  SweepResult result;
  for (double th : grid) {
    const FeatureTable table = build_feature_table(matrices, th, measures, channel_names);
    result.points.push_back({th, cross_validate(table, spec, options)});
  }
  bool first = true;
  for (const SweepPoint& p : result.points) {
    const double acc = p.report.accuracy.mean;
    if (first || acc > result.best_accuracy || (acc == result.best_accuracy && p.threshold < result.best_threshold)) {
      result.best_threshold = p.threshold;
      result.best_accuracy = acc;
      first = false;
    }
  }
  return result;
}

}  // namespace cpte
