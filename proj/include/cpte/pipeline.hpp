#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cpte/cross_plot.hpp"
#include "cpte/ingest.hpp"
#include "cpte/signal.hpp"

namespace cpte {

struct PipelineConfig {
  PartitionConfig partition;
  SegmentParams segmentation;
  int filter_order = 4;

  void validate() const;
  // Canonical text of every parameter that shapes a SyncMatrix for `band`.
  std::string cache_key(const Band& band) const;
};

std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

// Band-pass the whole recording, cut it into epochs, and build one
// SyncMatrix per epoch. Epochs run in parallel; output is in epoch order.
std::vector<SyncMatrix> recording_matrices(const Recording& rec, const Band& band, const PipelineConfig& cfg);

// Per-recording matrix store keyed by (subject, band, config hash).
class MatrixCache {
 public:
  explicit MatrixCache(std::filesystem::path root) : root_(std::move(root)) {}

  std::filesystem::path path_for(const std::string& subject, const Band& band, const PipelineConfig& cfg) const;
  std::optional<std::vector<SyncMatrix>> load(const std::string& subject, Group group, const Band& band,
                                              const PipelineConfig& cfg) const;
  void store(const std::string& subject, const Band& band, const PipelineConfig& cfg,
             const std::vector<SyncMatrix>& matrices) const;

 private:
  std::filesystem::path root_;
};

struct BandMatrices {
  Band band;
  std::vector<std::string> channel_names;
  std::vector<SyncMatrix> matrices;  // sorted by subject, then epoch
};

// Matrices for every manifest entry, read through the cache when one is
// given. Errors carry the subject id.
BandMatrices cohort_matrices(const CohortManifest& manifest, const Band& band, const PipelineConfig& cfg,
                             const MatrixCache* cache = nullptr);

}  // namespace cpte
