#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpte/ingest.hpp"
#include "cpte/signal.hpp"

namespace cpte {

enum class RadialMode { Normalized, Absolute };

// Partition of the first-quadrant cross plot into ring x sector states.
struct PartitionConfig {
  double angular_ruler_deg = 10.0;
  RadialMode radial_mode = RadialMode::Normalized;
  int radial_rings = 5;         // Normalized mode
  double radial_ruler = 10.0;   // Absolute mode, input amplitude units

  void validate() const;
  int sector_count() const;
};

struct CrossPlotState {
  int ring = 0;
  int sector = 0;
  auto operator<=>(const CrossPlotState&) const = default;
};

// States of the min-subtracted cross plot of (x, y).
//
// Sectors are folded about the 45 degree diagonal: the angle to the nearer
// axis picks k = floor(phi / dtheta), giving sector k below the diagonal and
// n_sectors - 1 - k above it. When dtheta divides 90 this is the plain
// floor(theta / dtheta) partition; otherwise the narrow remainder sits in the
// middle sector. Swapping x and y therefore maps sector s to n_sectors-1-s.
// The origin is pinned to ring 0, sector 0.
std::vector<CrossPlotState> encode_states(std::span<const double> x, std::span<const double> y,
                                          const PartitionConfig& cfg);

struct Transition {
  CrossPlotState from;
  CrossPlotState to;
  std::uint64_t count = 0;
  double probability = 0.0;
};

// Joint distribution over the N-1 consecutive state pairs, self-transitions
// included. Entries sorted by (from, to).
struct TransitionDistribution {
  std::vector<Transition> entries;
  std::uint64_t transitions = 0;
};

TransitionDistribution transition_distribution(std::span<const CrossPlotState> states);

// Shannon entropy in bits. Counts are summed in sorted order so the result
// depends only on the multiset of counts.
double entropy_bits(std::vector<std::uint64_t> counts);
double entropy_bits(const TransitionDistribution& dist);

// Cross-plot transition entropy of two equal-length sequences.
double cpte(std::span<const double> x, std::span<const double> y, const PartitionConfig& cfg = {});

struct SyncMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // n*n, row-major, symmetric, zero diagonal
  bool degenerate = false;     // raw off-diagonal values were all equal
  double raw_min = 0.0;
  double raw_max = 0.0;

  std::string subject_id;
  Group group = Group::A;
  std::string band;
  std::size_t epoch_index = 0;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

// Min-max normalise raw upper-triangle values (row-major order of i < j)
// into a SyncMatrix.
SyncMatrix normalize_pairs(std::size_t n, std::span<const double> upper);

// Raw CPTE for every channel pair, pairs evaluated in parallel; the result
// is bit-identical to serial::epoch_matrix.
SyncMatrix epoch_matrix(const Epoch& epoch, const PartitionConfig& cfg = {});

namespace serial {

// Reference path: one cpte() call per pair, in order.
SyncMatrix epoch_matrix(const Epoch& epoch, const PartitionConfig& cfg = {});

}  // namespace serial

// Kernel used by the matrix builders, exposed for the benchmark: the raw
// upper-triangle CPTE values of an epoch, computed on the calling thread.
std::vector<double> raw_pair_values(const Epoch& epoch, const PartitionConfig& cfg);

}  // namespace cpte
