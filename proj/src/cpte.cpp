#include "cpte/cross_plot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "cpte/error.hpp"

namespace cpte {

void PartitionConfig::validate() const {
  if (!(angular_ruler_deg > 0.0) || angular_ruler_deg > 90.0)
    throw Error("bad_partition", "angular ruler must be in (0, 90] degrees");
  if (radial_mode == RadialMode::Normalized && radial_rings < 1)
    throw Error("bad_partition", "radial_rings must be >= 1");
  if (radial_mode == RadialMode::Absolute && !(radial_ruler > 0.0))
    throw Error("bad_partition", "radial ruler must be positive");
}

int PartitionConfig::sector_count() const { return static_cast<int>(std::ceil(90.0 / angular_ruler_deg)); }

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Per-pair geometry shared by the reference and the fast path, so both
// assign identical states.
struct Geometry {
  int n_sectors = 0;
  int k_max = 0;
  int n_rings = 0;
  double r_max = 0.0;
  double inv_dtheta = 0.0;
  const PartitionConfig* cfg = nullptr;

  Geometry(const PartitionConfig& c, double rmax) : r_max(rmax), cfg(&c) {
    n_sectors = c.sector_count();
    k_max = (n_sectors - 1) / 2;
    inv_dtheta = 1.0 / c.angular_ruler_deg;
    if (c.radial_mode == RadialMode::Normalized) {
      n_rings = c.radial_rings;
    } else {
      n_rings = std::max(1, static_cast<int>(std::ceil(rmax / c.radial_ruler)));
    }
  }

  int ring(double r) const {
    int k;
    if (cfg->radial_mode == RadialMode::Normalized) {
      if (r_max == 0.0) return 0;
      k = static_cast<int>((r / r_max) * n_rings);
    } else {
      k = static_cast<int>(r / cfg->radial_ruler);
    }
    return std::min(k, n_rings - 1);
  }

  int sector(double x, double y) const {
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);
    if (hi == 0.0) return 0;
    const double phi = std::atan2(lo, hi) * kRadToDeg;
    const int k = std::min(static_cast<int>(phi * inv_dtheta), k_max);
    return y <= x ? k : n_sectors - 1 - k;
  }

  CrossPlotState state(double x, double y, double r) const {
    if (r == 0.0) return {0, 0};
    return {ring(r), sector(x, y)};
  }
};

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("length_mismatch", "x and y must have equal length");
  if (x.size() < 2) throw Error("too_short", "need at least 2 samples");
}

std::vector<double> offset_removed(std::span<const double> v) {
  for (double s : v)
    if (std::isnan(s) || std::isinf(s)) throw Error("non_finite", "NaN/Inf in input sequence");
  const double m = *std::min_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [m](double s) { return s - m; });
  return out;
}

std::vector<CrossPlotState> encode_offset_removed(std::span<const double> xs, std::span<const double> ys,
                                                  const PartitionConfig& cfg) {
  const std::size_t n = xs.size();
  std::vector<double> r(n);
  double r_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = std::sqrt(xs[i] * xs[i] + ys[i] * ys[i]);
    r_max = std::max(r_max, r[i]);
  }
  const Geometry g(cfg, r_max);
  std::vector<CrossPlotState> states(n);
  for (std::size_t i = 0; i < n; ++i) states[i] = g.state(xs[i], ys[i], r[i]);
  return states;
}

// Reusable buffers for the fast per-pair kernel.
class PairKernel {
 public:
  explicit PairKernel(const PartitionConfig& cfg) : cfg_(cfg) {}

  double operator()(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    radius_.resize(n);
    codes_.resize(n);
    double r_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::sqrt(xs[i] * xs[i] + ys[i] * ys[i]);
      radius_[i] = r;
      r_max = std::max(r_max, r);
    }
    const Geometry g(cfg_, r_max);
    const std::uint64_t n_states = static_cast<std::uint64_t>(g.n_rings) * g.n_sectors;
    for (std::size_t i = 0; i < n; ++i) {
      const CrossPlotState s = g.state(xs[i], ys[i], radius_[i]);
      codes_[i] = static_cast<std::uint64_t>(s.ring) * g.n_sectors + s.sector;
    }

    counts_out_.clear();
    const std::uint64_t n_pairs = n_states * n_states;
    if (n_pairs <= kDenseLimit) {
      if (dense_.size() < n_pairs) dense_.assign(n_pairs, 0);
      touched_.clear();
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::uint64_t c = codes_[i] * n_states + codes_[i + 1];
        if (dense_[c]++ == 0) touched_.push_back(c);
      }
      for (std::uint64_t c : touched_) {
        counts_out_.push_back(dense_[c]);
        dense_[c] = 0;
      }
    } else {
      pair_codes_.clear();
      for (std::size_t i = 0; i + 1 < n; ++i) pair_codes_.push_back(codes_[i] * n_states + codes_[i + 1]);
      std::sort(pair_codes_.begin(), pair_codes_.end());
      for (std::size_t i = 0; i < pair_codes_.size();) {
        std::size_t j = i;
        while (j < pair_codes_.size() && pair_codes_[j] == pair_codes_[i]) ++j;
        counts_out_.push_back(j - i);
        i = j;
      }
    }
    return entropy_bits(counts_out_);
  }

 private:
  static constexpr std::uint64_t kDenseLimit = 1u << 16;
  const PartitionConfig& cfg_;
  std::vector<double> radius_;
  std::vector<std::uint64_t> codes_;
  std::vector<std::uint32_t> dense_;
  std::vector<std::uint64_t> touched_;
  std::vector<std::uint64_t> pair_codes_;
  std::vector<std::uint64_t> counts_out_;
};

std::vector<std::vector<double>> offset_removed_channels(const Epoch& epoch) {
  if (epoch.n_channels < 2) throw Error("too_few_channels", "epoch needs at least 2 channels");
  if (epoch.window_length < 2) throw Error("too_short", "need at least 2 samples");
  std::vector<std::vector<double>> ch(epoch.n_channels);
  for (std::size_t c = 0; c < epoch.n_channels; ++c) ch[c] = offset_removed(epoch.channel(c));
  return ch;
}

SyncMatrix with_identity(SyncMatrix m, const Epoch& e) {
  m.subject_id = e.subject_id;
  m.group = e.group;
  m.band = e.band;
  m.epoch_index = e.epoch_index;
  return m;
}

}  // namespace

std::vector<CrossPlotState> encode_states(std::span<const double> x, std::span<const double> y,
                                          const PartitionConfig& cfg) {
  cfg.validate();
  check_pair(x, y);
  const std::vector<double> xs = offset_removed(x);
  const std::vector<double> ys = offset_removed(y);
  return encode_offset_removed(xs, ys, cfg);
}

TransitionDistribution transition_distribution(std::span<const CrossPlotState> states) {
  if (states.size() < 2) throw Error("too_short", "need at least 2 states");
  std::map<std::pair<CrossPlotState, CrossPlotState>, std::uint64_t> counts;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) ++counts[{states[i], states[i + 1]}];
  TransitionDistribution d;
  d.transitions = states.size() - 1;
  const double total = static_cast<double>(d.transitions);
  for (const auto& [key, c] : counts)
    d.entries.push_back({key.first, key.second, c, static_cast<double>(c) / total});
  return d;
}

double entropy_bits(std::vector<std::uint64_t> counts) {
  std::sort(counts.begin(), counts.end());
  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  if (total == 0) return 0.0;
  const double t = static_cast<double>(total);
  double h = 0.0;
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / t;
    h -= p * std::log2(p);
  }
  // A single transition type gives -1*log2(1) = -0.0; report +0.
  return h + 0.0;
}

double entropy_bits(const TransitionDistribution& dist) {
  std::vector<std::uint64_t> counts;
  counts.reserve(dist.entries.size());
  for (const Transition& t : dist.entries) counts.push_back(t.count);
  return entropy_bits(std::move(counts));
}

double cpte(std::span<const double> x, std::span<const double> y, const PartitionConfig& cfg) {
  return entropy_bits(transition_distribution(encode_states(x, y, cfg)));
}

SyncMatrix normalize_pairs(std::size_t n, std::span<const double> upper) {
  if (n < 2) throw Error("too_few_channels", "matrix needs at least 2 nodes");
  if (upper.size() != n * (n - 1) / 2) throw Error("size_mismatch", "pair count does not match node count");
  SyncMatrix m;
  m.n = n;
  m.values.assign(n * n, 0.0);
  const auto [lo, hi] = std::minmax_element(upper.begin(), upper.end());
  m.raw_min = *lo;
  m.raw_max = *hi;
  m.degenerate = !(m.raw_max > m.raw_min);
  const double span = m.raw_max - m.raw_min;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double v = m.degenerate ? 0.0 : (upper[k] - m.raw_min) / span;
      m.values[i * n + j] = v;
      m.values[j * n + i] = v;
    }
  }
  return m;
}

std::vector<double> raw_pair_values(const Epoch& epoch, const PartitionConfig& cfg) {
  cfg.validate();
  const auto ch = offset_removed_channels(epoch);
  PairKernel kernel(cfg);
  std::vector<double> upper;
  upper.reserve(epoch.n_channels * (epoch.n_channels - 1) / 2);
  for (std::size_t i = 0; i < epoch.n_channels; ++i)
    for (std::size_t j = i + 1; j < epoch.n_channels; ++j) upper.push_back(kernel(ch[i], ch[j]));
  return upper;
}

SyncMatrix epoch_matrix(const Epoch& epoch, const PartitionConfig& cfg) {
  cfg.validate();
  const auto ch = offset_removed_channels(epoch);
  const std::size_t n = epoch.n_channels;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<double> upper(pairs.size());
  const auto n_pairs = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel
  {
    PairKernel kernel(cfg);
#pragma omp for schedule(static)
    for (std::ptrdiff_t p = 0; p < n_pairs; ++p) {
      const auto [i, j] = pairs[static_cast<std::size_t>(p)];
      upper[static_cast<std::size_t>(p)] = kernel(ch[i], ch[j]);
    }
  }
  return with_identity(normalize_pairs(n, upper), epoch);
}

namespace serial {

SyncMatrix epoch_matrix(const Epoch& epoch, const PartitionConfig& cfg) {
  if (epoch.n_channels < 2) throw Error("too_few_channels", "epoch needs at least 2 channels");
  std::vector<double> upper;
  for (std::size_t i = 0; i < epoch.n_channels; ++i)
    for (std::size_t j = i + 1; j < epoch.n_channels; ++j)
      upper.push_back(cpte(epoch.channel(i), epoch.channel(j), cfg));
  return with_identity(normalize_pairs(epoch.n_channels, upper), epoch);
}

}  // namespace serial

}  // namespace cpte
