#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpte/classify.hpp"
#include "cpte/pipeline.hpp"
#include "cpte/stats.hpp"
#include "cpte/synth.hpp"

namespace cpte::cli {

struct RunConfig {
  std::string command;
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  std::vector<std::string> bands;  // empty: every band in the manifest
  PipelineConfig pipeline;
  std::vector<double> threshold_grid = default_threshold_grid();
  double threshold = 0.6;
  std::vector<std::string> measure_sets = {"cc", "sc", "ec", "all"};
  std::vector<std::string> classifiers = {"rf", "knn"};
  ForestParams forest;
  int knn_k = 5;
  int folds = 10;
  int repeats = 10;
  CvMode cv_mode = CvMode::Epoch;
  SummaryUnit stats_unit = SummaryUnit::Epoch;
  bool shuffle_labels = false;
  bool use_cache = true;
  std::optional<std::uint64_t> seed;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct SynthConfig {
  CohortSpec cohort;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
};

// Each command writes under cfg.out_dir and returns the main artifact path.
std::filesystem::path cmd_synth(const SynthConfig& cfg);
std::filesystem::path cmd_cpte(const RunConfig& cfg);
std::filesystem::path cmd_density(const RunConfig& cfg);
std::filesystem::path cmd_sweep(const RunConfig& cfg);
std::filesystem::path cmd_classify(const RunConfig& cfg);
std::filesystem::path cmd_stats(const RunConfig& cfg);

// Full command line. Returns the process exit code; failures print one JSON
// error record to stderr.
int run(int argc, const char* const* argv);

}  // namespace cpte::cli
