#include <algorithm>
#include <numeric>

#include "cpte/classify.hpp"
#include "cpte/error.hpp"
#include "cpte/parallel.hpp"

namespace cpte {

std::vector<Group> knn_classify(const FeatureTable& data, std::span<const std::size_t> train_rows,
                                std::span<const std::size_t> test_rows, int k) {
  if (train_rows.empty()) throw Error("empty_training_set", "kNN needs a nonempty training set");
  if (k < 1) throw Error("bad_k", "k must be >= 1");
  if (static_cast<std::size_t>(k) > train_rows.size())
    throw Error("bad_k", "k exceeds the training set size");

  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t width = data.cols();
  std::vector<Group> out(test_rows.size());
  parallel_for(test_rows.size(), [&](std::size_t t) {
    const double* q = data.values.data() + test_rows[t] * width;
    std::vector<std::pair<double, std::size_t>> dist(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      const double* p = data.values.data() + train_rows[i] * width;
      double d = 0.0;
      for (std::size_t c = 0; c < width; ++c) {
        const double diff = p[c] - q[c];
        d += diff * diff;
      }
      dist[i] = {d, i};
    }
    // (distance, position in train_rows) orders ties by row order.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    std::size_t votes_b = 0;
    for (std::size_t i = 0; i < kk; ++i) votes_b += data.labels[train_rows[dist[i].second]] == Group::B;
    const std::size_t votes_a = kk - votes_b;
    if (votes_a == votes_b)
      out[t] = data.labels[train_rows[dist[0].second]];
    else
      out[t] = votes_b > votes_a ? Group::B : Group::A;
  });
  return out;
}

std::vector<Group> knn_classify(const FeatureTable& train, const FeatureTable& test, int k) {
  if (train.rows() == 0) throw Error("empty_training_set", "kNN needs a nonempty training set");
  if (train.cols() != test.cols()) throw Error("size_mismatch", "train and test feature widths differ");
  // Stack both tables so the index-based kernel can serve them.
  FeatureTable joined = train;
  joined.values.insert(joined.values.end(), test.values.begin(), test.values.end());
  joined.labels.insert(joined.labels.end(), test.labels.begin(), test.labels.end());
  std::vector<std::size_t> tr(train.rows()), te(test.rows());
  std::iota(tr.begin(), tr.end(), 0);
  std::iota(te.begin(), te.end(), train.rows());
  return knn_classify(joined, tr, te, k);
}

}  // namespace cpte
