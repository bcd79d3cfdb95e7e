#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpte/cross_plot.hpp"
#include "cpte/ingest.hpp"

namespace cpte {

enum class Measure { CC, SC, EC };

std::string_view to_string(Measure m);

// "cc", "sc", "ec", comma lists of those, or "all". Result is deduplicated
// and in canonical CC, SC, EC order.
std::vector<Measure> parse_measures(std::string_view spec);
std::string measures_label(std::span<const Measure> measures);

// One row per epoch. Columns are measure-major in CC, SC, EC order and
// node-major within a measure.
struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<double> values;  // rows() x cols(), row-major
  std::vector<Group> labels;
  std::vector<std::string> subject_ids;
  std::vector<std::string> bands;
  std::vector<std::size_t> epoch_indices;
  std::vector<Measure> measures;
  std::size_t n_nodes = 0;
  double threshold = 0.0;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return columns.size(); }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }

  // A column, or for a bare measure name the node average of that measure.
  std::vector<double> feature_values(const std::string& name) const;

  void append_row(std::span<const double> features, Group label, const std::string& subject,
                  const std::string& band, std::size_t epoch_index);
};

// Binarizes each matrix at `th` and lays out the requested node measures.
// Rows are computed in parallel; order follows `matrices`.
FeatureTable build_feature_table(std::span<const SyncMatrix> matrices, double th,
                                 std::span<const Measure> measures,
                                 const std::vector<std::string>& channel_names = {});

}  // namespace cpte
