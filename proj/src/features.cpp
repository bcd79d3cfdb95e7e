#include "cpte/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cpte/error.hpp"
#include "cpte/netmetrics.hpp"
#include "cpte/parallel.hpp"

namespace cpte {

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::CC: return "CC";
    case Measure::SC: return "SC";
    case Measure::EC: return "EC";
  }
  return "?";
}

std::vector<Measure> parse_measures(std::string_view spec) {
  std::vector<bool> on(3, false);
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t end = std::min(spec.find(',', start), spec.size());
    std::string tok(spec.substr(start, end - start));
    std::transform(tok.begin(), tok.end(), tok.begin(), [](unsigned char c) { return std::tolower(c); });
    if (tok == "all") {
      on.assign(3, true);
    } else if (tok == "cc") {
      on[0] = true;
    } else if (tok == "sc") {
      on[1] = true;
    } else if (tok == "ec") {
      on[2] = true;
    } else {
      throw Error("bad_measure", "unknown measure '" + tok + "'");
    }
    start = end + 1;
  }
  std::vector<Measure> out;
  for (int i = 0; i < 3; ++i)
    if (on[i]) out.push_back(static_cast<Measure>(i));
  return out;
}

std::string measures_label(std::span<const Measure> measures) {
  if (measures.size() == 3) return "all";
  std::string s;
  for (Measure m : measures) {
    if (!s.empty()) s += '+';
    s += to_string(m);
  }
  return s;
}

std::vector<double> FeatureTable::feature_values(const std::string& name) const {
  const auto col = std::find(columns.begin(), columns.end(), name);
  std::vector<double> out(rows());
  if (col != columns.end()) {
    const auto c = static_cast<std::size_t>(col - columns.begin());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = values[r * cols() + c];
    return out;
  }
  for (std::size_t mi = 0; mi < measures.size(); ++mi) {
    if (to_string(measures[mi]) != name) continue;
    for (std::size_t r = 0; r < rows(); ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < n_nodes; ++k) s += values[r * cols() + mi * n_nodes + k];
      out[r] = s / static_cast<double>(n_nodes);
    }
    return out;
  }
  throw Error("unknown_feature", "feature '" + name + "' is not in the table");
}

void FeatureTable::append_row(std::span<const double> features, Group label, const std::string& subject,
                              const std::string& band, std::size_t epoch_index) {
  if (features.size() != cols()) throw Error("size_mismatch", "row width does not match column count");
  values.insert(values.end(), features.begin(), features.end());
  labels.push_back(label);
  subject_ids.push_back(subject);
  bands.push_back(band);
  epoch_indices.push_back(epoch_index);
}

FeatureTable build_feature_table(std::span<const SyncMatrix> matrices, double th,
                                 std::span<const Measure> measures,
                                 const std::vector<std::string>& channel_names) {
  if (matrices.empty()) throw Error("empty_input", "no matrices to build features from");
  if (measures.empty()) throw Error("bad_measure", "no measures selected");
  if (!(th >= 0.0 && th <= 1.0)) throw Error("bad_threshold", "threshold must lie in [0, 1]");
  const std::size_t n = matrices.front().n;
  for (const SyncMatrix& m : matrices)
    if (m.n != n) throw Error("inconsistent_channels", "matrices have inconsistent channel counts");
  if (!channel_names.empty() && channel_names.size() != n)
    throw Error("inconsistent_channels", "channel name count does not match matrix size");

  std::vector<Measure> ordered(measures.begin(), measures.end());
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  FeatureTable t;
  t.measures = ordered;
  t.n_nodes = n;
  t.threshold = th;
  for (Measure m : ordered) {
    for (std::size_t k = 0; k < n; ++k) {
      std::string node;
      if (channel_names.empty()) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "n%02zu", k);
        node = buf;
      } else {
        node = channel_names[k];
      }
      t.columns.push_back(std::string(to_string(m)) + "_" + node);
    }
  }

  const std::size_t width = t.cols();
  const std::size_t rows = matrices.size();
  t.values.assign(rows * width, 0.0);
  parallel_for(rows, [&](std::size_t r) {
    const BinaryNetwork g = binarize(matrices[r], th);
    double* out = t.values.data() + r * width;
    for (std::size_t mi = 0; mi < ordered.size(); ++mi) {
      std::vector<double> v;
      switch (ordered[mi]) {
        case Measure::CC: v = clustering_coefficients(g); break;
        case Measure::SC: v = subgraph_centrality(g); break;
        case Measure::EC: v = eigenvector_centrality(g).values; break;
      }
      std::copy(v.begin(), v.end(), out + mi * n);
    }
  });
  for (const SyncMatrix& m : matrices) {
    t.labels.push_back(m.group);
    t.subject_ids.push_back(m.subject_id);
    t.bands.push_back(m.band);
    t.epoch_indices.push_back(m.epoch_index);
  }
  return t;
}

}  // namespace cpte
