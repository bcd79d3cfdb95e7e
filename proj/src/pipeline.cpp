#include "cpte/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cpte/error.hpp"
#include "cpte/parallel.hpp"

namespace cpte {

namespace fs = std::filesystem;

void PipelineConfig::validate() const {
  partition.validate();
  segmentation.validate();
  if (filter_order < 2 || filter_order % 2 != 0) throw Error("bad_order", "filter order must be even and >= 2");
}

std::string PipelineConfig::cache_key(const Band& band) const {
  std::ostringstream os;
  os.precision(17);
  os << "band=" << band.name << ':' << band.low_hz << ':' << band.high_hz << ";order=" << filter_order
     << ";seg=" << segmentation.segment_length << ':' << segmentation.window_length << ':' << segmentation.step
     << ";dtheta=" << partition.angular_ruler_deg
     << ";radial=" << (partition.radial_mode == RadialMode::Normalized ? "normalized" : "absolute")
     << ";rings=" << partition.radial_rings << ";dr=" << partition.radial_ruler << ";format=1";
  return os.str();
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<SyncMatrix> recording_matrices(const Recording& rec, const Band& band, const PipelineConfig& cfg) {
  cfg.validate();
  validate_band(band, rec.sampling_rate_hz);
  const BandFilter filter = design_bandpass(band.low_hz, band.high_hz, cfg.filter_order, rec.sampling_rate_hz);
  const SignalMatrix filtered = filter_channels(rec, filter);
  const std::vector<Epoch> epochs = segment(filtered, cfg.segmentation, rec.subject_id, rec.group, band.name);

  std::vector<SyncMatrix> out(epochs.size());
  parallel_for(epochs.size(), [&](std::size_t e) {
    SyncMatrix m = normalize_pairs(epochs[e].n_channels, raw_pair_values(epochs[e], cfg.partition));
    m.subject_id = rec.subject_id;
    m.group = rec.group;
    m.band = band.name;
    m.epoch_index = epochs[e].epoch_index;
    out[e] = std::move(m);
  }, true);
  return out;
}

namespace {

constexpr char kMagic[8] = {'C', 'P', 'T', 'E', 'M', 'A', 'T', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool get(std::ifstream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

fs::path MatrixCache::path_for(const std::string& subject, const Band& band, const PipelineConfig& cfg) const {
  return root_ / hex64(fnv1a64(cfg.cache_key(band))) / band.name / (subject + ".bin");
}

std::optional<std::vector<SyncMatrix>> MatrixCache::load(const std::string& subject, Group group, const Band& band,
                                                         const PipelineConfig& cfg) const {
  std::ifstream in(path_for(subject, band, cfg), std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint64_t n = 0, count = 0;
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) return std::nullopt;
  if (!get(in, n) || !get(in, count) || n < 2) return std::nullopt;
  std::vector<SyncMatrix> out;
  out.reserve(count);
  std::vector<double> upper(n * (n - 1) / 2);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t epoch = 0;
    std::uint8_t degenerate = 0;
    double raw_min = 0, raw_max = 0;
    if (!get(in, epoch) || !get(in, degenerate) || !get(in, raw_min) || !get(in, raw_max)) return std::nullopt;
    if (!in.read(reinterpret_cast<char*>(upper.data()), static_cast<std::streamsize>(upper.size() * sizeof(double))))
      return std::nullopt;
    SyncMatrix m;
    m.n = n;
    m.values.assign(n * n, 0.0);
    std::size_t k = 0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b, ++k) m.values[a * n + b] = m.values[b * n + a] = upper[k];
    m.degenerate = degenerate != 0;
    m.raw_min = raw_min;
    m.raw_max = raw_max;
    m.subject_id = subject;
    m.group = group;
    m.band = band.name;
    m.epoch_index = epoch;
    out.push_back(std::move(m));
  }
  return out;
}

void MatrixCache::store(const std::string& subject, const Band& band, const PipelineConfig& cfg,
                        const std::vector<SyncMatrix>& matrices) const {
  if (matrices.empty()) return;
  const fs::path path = path_for(subject, band, cfg);
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("write_failed", "cannot write cache file " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    const std::uint64_t n = matrices.front().n;
    put(out, n);
    put(out, static_cast<std::uint64_t>(matrices.size()));
    for (const SyncMatrix& m : matrices) {
      put(out, static_cast<std::uint64_t>(m.epoch_index));
      put(out, static_cast<std::uint8_t>(m.degenerate));
      put(out, m.raw_min);
      put(out, m.raw_max);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) put(out, m.values[a * n + b]);
    }
    if (!out) throw Error("write_failed", "cannot write cache file " + tmp.string());
  }
  fs::rename(tmp, path);
}

BandMatrices cohort_matrices(const CohortManifest& manifest, const Band& band, const PipelineConfig& cfg,
                             const MatrixCache* cache) {
  std::vector<const ManifestEntry*> entries;
  for (const ManifestEntry& e : manifest.entries) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry* a, const ManifestEntry* b) { return a->subject_id < b->subject_id; });

  BandMatrices result;
  result.band = band;
  for (const ManifestEntry* e : entries) {
    std::vector<SyncMatrix> ms;
    try {
      std::optional<std::vector<SyncMatrix>> hit;
      if (cache) hit = cache->load(e->subject_id, e->group, band, cfg);
      if (hit) {
        ms = std::move(*hit);
        const Recording head = load_header(e->path);
        if (result.channel_names.empty()) result.channel_names = head.channel_names;
        else if (head.channel_names != result.channel_names)
          throw Error("channel_mismatch", "channel names differ from the first recording");
      } else {
        Recording rec = load_recording(e->path);
        if (rec.subject_id != e->subject_id)
          throw Error("subject_mismatch", "sidecar subject id '" + rec.subject_id + "' differs from manifest");
        rec.group = e->group;
        if (result.channel_names.empty()) result.channel_names = rec.channel_names;
        else if (rec.channel_names != result.channel_names)
          throw Error("channel_mismatch", "channel names differ from the first recording");
        ms = recording_matrices(rec, band, cfg);
        if (cache) cache->store(e->subject_id, band, cfg, ms);
      }
    } catch (const Error& err) {
      throw Error(err.code(), "subject '" + e->subject_id + "': " + err.what());
    }
    result.matrices.insert(result.matrices.end(), std::make_move_iterator(ms.begin()),
                           std::make_move_iterator(ms.end()));
  }
  return result;
}

}  // namespace cpte
