#include "cpte/ingest.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "cpte/error.hpp"
#include "json.hpp"

namespace cpte {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "payload I/O assumes a little-endian host");

std::string_view to_string(Group g) { return g == Group::A ? "GroupA" : "GroupB"; }

Group parse_group(std::string_view s) {
  if (s == "GroupA" || s == "A") return Group::A;
  if (s == "GroupB" || s == "B") return Group::B;
  throw Error("bad_group", "unknown group label '" + std::string(s) + "'");
}

void validate(const Recording& rec) {
  const std::size_t n_ch = rec.channel_names.size();
  if (n_ch < 2) throw Error("channel_count_mismatch", "channel count mismatch: need at least 2 channels");
  if (rec.n_samples < 1) throw Error("empty_recording", "recording has no samples");
  if (!(rec.sampling_rate_hz > 0.0) || !std::isfinite(rec.sampling_rate_hz))
    throw Error("bad_sampling_rate", "sampling rate must be positive");
  std::set<std::string> names(rec.channel_names.begin(), rec.channel_names.end());
  if (names.size() != n_ch) throw Error("duplicate_channel", "channel names must be unique");
  if (rec.samples.size() != n_ch * rec.n_samples)
    throw Error("channel_count_mismatch", "channel count mismatch: sample matrix does not match header");
  for (float v : rec.samples)
    if (!std::isfinite(v)) throw Error("non_finite", "NaN/Inf detected in samples");
}

namespace {

fs::path sidecar_for(const fs::path& payload) {
  fs::path p = payload;
  p.replace_extension(".json");
  return p;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing_file", "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("malformed_json", path.string() + ": " + e.what());
  }
}

std::vector<float> read_binary(const fs::path& path, std::size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing_file", "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (bytes < expected * sizeof(float))
    throw Error("truncated_payload", "truncated payload: " + path.string());
  if (bytes > expected * sizeof(float))
    throw Error("channel_count_mismatch", "channel count mismatch: payload larger than header declares");
  std::vector<float> out(expected);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
  return out;
}

std::vector<float> read_csv(const fs::path& path, std::size_t n_ch, std::size_t n_samp) {
  std::ifstream in(path);
  if (!in) throw Error("missing_file", "cannot open " + path.string());
  std::vector<float> out;
  out.reserve(n_ch * n_samp);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        out.push_back(std::stof(cell));
      } catch (const std::exception&) {
        throw Error("malformed_payload", "unparsable cell '" + cell + "' in " + path.string());
      }
      ++cols;
    }
    if (cols < n_samp) throw Error("truncated_payload", "truncated payload: row " + std::to_string(rows));
    if (cols > n_samp) throw Error("sample_count_mismatch", "row longer than declared n_samp");
    ++rows;
  }
  if (rows != n_ch) throw Error("channel_count_mismatch", "channel count mismatch in " + path.string());
  return out;
}

}  // namespace

Recording load_header(const fs::path& payload) {
  const fs::path side = sidecar_for(payload);
  if (!fs::exists(side)) throw Error("missing_sidecar", "missing sidecar " + side.string());
  if (!fs::exists(payload)) throw Error("missing_file", "missing payload " + payload.string());
  const json meta = read_json(side);

  Recording rec;
  try {
    rec.subject_id = meta.at("subject_id").get<std::string>();
    rec.group = parse_group(meta.at("group").get<std::string>());
    rec.sampling_rate_hz = meta.at("sampling_rate_hz").get<double>();
    rec.channel_names = meta.at("channel_names").get<std::vector<std::string>>();
    rec.n_samples = meta.at("n_samp").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error("malformed_sidecar", side.string() + ": " + e.what());
  }
  if (rec.channel_names.size() < 2)
    throw Error("channel_count_mismatch", "channel count mismatch: sidecar declares fewer than 2 channels");
  return rec;
}

Recording load_recording(const fs::path& payload) {
  Recording rec = load_header(payload);
  const std::size_t n = rec.channel_names.size() * rec.n_samples;
  if (payload.extension() == ".csv")
    rec.samples = read_csv(payload, rec.channel_names.size(), rec.n_samples);
  else
    rec.samples = read_binary(payload, n);
  validate(rec);
  return rec;
}

void save_recording(const Recording& rec, const fs::path& payload) {
  validate(rec);
  if (payload.has_parent_path()) fs::create_directories(payload.parent_path());
  {
    std::ofstream out(payload, std::ios::binary);
    if (!out) throw Error("write_failed", "cannot write " + payload.string());
    out.write(reinterpret_cast<const char*>(rec.samples.data()),
              static_cast<std::streamsize>(rec.samples.size() * sizeof(float)));
    if (!out) throw Error("write_failed", "write failed for " + payload.string());
  }
  json meta = {{"subject_id", rec.subject_id},
               {"group", to_string(rec.group)},
               {"sampling_rate_hz", rec.sampling_rate_hz},
               {"channel_names", rec.channel_names},
               {"n_samp", rec.n_samples}};
  std::ofstream side(sidecar_for(payload));
  side << meta.dump(2) << '\n';
  if (!side) throw Error("write_failed", "cannot write sidecar for " + payload.string());
}

std::vector<Band> default_bands() {
  return {{"all", 0.5, 44.0},  {"delta", 0.5, 4.0}, {"theta", 4.0, 8.0},
          {"alpha", 8.0, 13.0}, {"beta", 13.0, 30.0}, {"gamma", 31.0, 44.0}};
}

void validate_band(const Band& band, double sampling_rate_hz) {
  if (!(band.low_hz > 0.0) || !(band.high_hz > band.low_hz))
    throw Error("bad_band", "band '" + band.name + "' needs 0 < low_hz < high_hz");
  if (sampling_rate_hz > 0.0 && !(band.high_hz < sampling_rate_hz / 2.0))
    throw Error("bad_band", "band '" + band.name + "' reaches the Nyquist frequency");
}

const Band& CohortManifest::band(std::string_view name) const {
  for (const Band& b : bands)
    if (b.name == name) return b;
  throw Error("unknown_band", "band '" + std::string(name) + "' is not defined in the manifest");
}

CohortManifest load_manifest(const fs::path& path) {
  const json doc = read_json(path);
  const fs::path base = fs::absolute(path).parent_path();
  CohortManifest m;
  try {
    if (doc.contains("sampling_rate_hz")) m.sampling_rate_hz = doc.at("sampling_rate_hz").get<double>();
    std::set<std::string> seen;
    for (const json& e : doc.at("entries")) {
      ManifestEntry entry;
      entry.subject_id = e.at("subject_id").get<std::string>();
      entry.group = parse_group(e.at("group").get<std::string>());
      fs::path p = e.at("path").get<std::string>();
      entry.path = p.is_absolute() ? p : base / p;
      if (!seen.insert(entry.subject_id).second)
        throw Error("duplicate_subject", "duplicate subject id '" + entry.subject_id + "'");
      if (!fs::exists(entry.path))
        throw Error("missing_file", "missing file for subject '" + entry.subject_id + "': " + entry.path.string());
      m.entries.push_back(std::move(entry));
    }
    if (doc.contains("bands")) {
      std::set<std::string> names;
      for (const json& b : doc.at("bands")) {
        Band band{b.at("name").get<std::string>(), b.at("low_hz").get<double>(), b.at("high_hz").get<double>()};
        validate_band(band, m.sampling_rate_hz.value_or(0.0));
        if (!names.insert(band.name).second) throw Error("bad_band", "duplicate band '" + band.name + "'");
        m.bands.push_back(std::move(band));
      }
    } else {
      m.bands = default_bands();
    }
  } catch (const json::exception& e) {
    throw Error("malformed_manifest", path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const CohortManifest& manifest, const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path();
  json entries = json::array();
  for (const ManifestEntry& e : manifest.entries) {
    fs::path p = fs::absolute(e.path).lexically_relative(base);
    if (p.empty() || *p.begin() == "..") p = fs::absolute(e.path);
    entries.push_back({{"subject_id", e.subject_id}, {"group", to_string(e.group)}, {"path", p.generic_string()}});
  }
  json bands = json::array();
  for (const Band& b : manifest.bands) bands.push_back({{"name", b.name}, {"low_hz", b.low_hz}, {"high_hz", b.high_hz}});
  json doc = {{"entries", entries}, {"bands", bands}};
  if (manifest.sampling_rate_hz) doc["sampling_rate_hz"] = *manifest.sampling_rate_hz;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error("write_failed", "cannot write manifest " + path.string());
}

}  // namespace cpte
