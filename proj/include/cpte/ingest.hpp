#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cpte {

enum class Group { A, B };

std::string_view to_string(Group g);
Group parse_group(std::string_view s);

// Multichannel recording. Samples are stored channel-major:
// samples[ch * n_samples + t].
struct Recording {
  std::string subject_id;
  Group group = Group::A;
  double sampling_rate_hz = 0.0;
  std::vector<std::string> channel_names;
  std::size_t n_samples = 0;
  std::vector<float> samples;

  std::size_t n_channels() const { return channel_names.size(); }
  std::span<const float> channel(std::size_t ch) const {
    return {samples.data() + ch * n_samples, n_samples};
  }
  std::span<float> channel(std::size_t ch) { return {samples.data() + ch * n_samples, n_samples}; }
};

// Throws cpte::Error if any recording invariant is violated.
void validate(const Recording& rec);

// Loads `<stem>.f32` (little-endian float32, channel-major) or `<stem>.csv`
// (one comma-separated row per channel); both require the `<stem>.json`
// sidecar next to the payload.
Recording load_recording(const std::filesystem::path& payload);

// Sidecar metadata only; `samples` is left empty.
Recording load_header(const std::filesystem::path& payload);

// Writes the binary payload and its sidecar. `payload` should end in `.f32`.
void save_recording(const Recording& rec, const std::filesystem::path& payload);

struct Band {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;
};

// delta, theta, alpha, beta, gamma plus the broadband "all" condition.
std::vector<Band> default_bands();
void validate_band(const Band& band, double sampling_rate_hz);

struct ManifestEntry {
  std::string subject_id;
  Group group = Group::A;
  std::filesystem::path path;  // absolute after load_manifest
};

struct CohortManifest {
  std::vector<ManifestEntry> entries;
  std::vector<Band> bands;
  std::optional<double> sampling_rate_hz;

  const Band& band(std::string_view name) const;
};

CohortManifest load_manifest(const std::filesystem::path& path);

// Entry paths are written relative to the manifest's directory when possible.
void save_manifest(const CohortManifest& manifest, const std::filesystem::path& path);

}  // namespace cpte
