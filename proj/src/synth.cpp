#include "cpte/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cpte/error.hpp"
#include "cpte/parallel.hpp"
#include "cpte/random.hpp"
#include "cpte/signal.hpp"

namespace cpte {

void CouplingSpec::validate() const {
  if (!(coupling >= 0.0 && coupling <= 1.0)) throw Error("bad_coupling", "coupling must lie in [0, 1]");
  if (n_channels < 2) throw Error("bad_spec", "need at least 2 channels");
  if (n_samples < 2) throw Error("bad_spec", "need at least 2 samples");
  if (!(sampling_rate_hz > 0.0)) throw Error("bad_spec", "sampling rate must be positive");
  if (!(band_low_hz > 0.0) || !(band_low_hz < band_high_hz) || !(band_high_hz < sampling_rate_hz / 2.0))
    throw Error("bad_band", "source band must satisfy 0 < low < high < Nyquist");
  if (!(amplitude > 0.0)) throw Error("bad_spec", "amplitude must be positive");
}

std::vector<double> band_limited_noise(const CouplingSpec& spec, std::uint64_t seed) {
  const BandFilter filter = design_bandpass(spec.band_low_hz, spec.band_high_hz, 4, spec.sampling_rate_hz);
  const auto burn_in = static_cast<std::size_t>(spec.sampling_rate_hz);
  Rng rng(seed);
  std::vector<double> w(spec.n_samples + burn_in);
  for (double& v : w) v = rng.normal();
  std::vector<double> y = sosfilt(w, filter);
  y.erase(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(burn_in));

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(y.size()));
  for (double& v : y) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return y;
}

std::pair<std::vector<double>, std::vector<double>> gen_coupled_pair(const CouplingSpec& spec) {
  spec.validate();
  const double c = spec.coupling;
  const std::vector<double> s = band_limited_noise(spec, derive_seed(spec.seed, {0}));
  const std::vector<double> xi1 = band_limited_noise(spec, derive_seed(spec.seed, {1}));
  const std::vector<double> xi2 = band_limited_noise(spec, derive_seed(spec.seed, {2}));
  std::vector<double> x(spec.n_samples), y(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    x[i] = spec.amplitude * ((1.0 - c) * xi1[i] + c * s[i]);
    y[i] = spec.amplitude * ((1.0 - c) * xi2[i] + c * s[i]);
  }
  return {std::move(x), std::move(y)};
}

std::pair<std::vector<double>, std::vector<double>> gen_henon_pair(double coupling, std::size_t n_samples,
                                                                   std::uint64_t seed) {
  if (!(coupling >= 0.0 && coupling <= 1.0)) throw Error("bad_coupling", "coupling must lie in [0, 1]");
  if (n_samples < 2) throw Error("bad_spec", "need at least 2 samples");
  constexpr std::size_t kTransient = 1000;
  Rng rng(seed);
  double x1 = 0.1 * rng.uniform(), x2 = 0.1 * rng.uniform();
  double y1 = 0.1 * rng.uniform(), y2 = 0.1 * rng.uniform();
  std::vector<double> xs, ys;
  xs.reserve(n_samples);
  ys.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples + kTransient; ++i) {
    const double nx1 = 1.4 - x1 * x1 + 0.3 * x2;
    const double ny1 = 1.4 - (coupling * x1 + (1.0 - coupling) * y1) * y1 + 0.3 * y2;
    x2 = x1;
    x1 = nx1;
    y2 = y1;
    y1 = ny1;
    if (!std::isfinite(y1)) throw Error("henon_diverged", "response map diverged; try another seed");
    if (i >= kTransient) {
      xs.push_back(x1);
      ys.push_back(y1);
    }
  }
  return {std::move(xs), std::move(ys)};
}

std::vector<double> channel_couplings(double coupling, std::size_t n_channels) {
  std::vector<double> c(n_channels);
  for (std::size_t k = 0; k < n_channels; ++k) {
    const double w = n_channels == 1 ? 1.0 : 0.4 + 1.2 * static_cast<double>(k) / static_cast<double>(n_channels - 1);
    c[k] = std::min(1.0, coupling * w);
  }
  return c;
}

std::vector<std::string> default_channel_names(std::size_t n_channels) {
  static const std::vector<std::string> ten_twenty = {"Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T3", "C3", "Cz",
                                                      "C4",  "T4",  "T5", "P3", "Pz", "P4", "T6", "O1", "O2"};
  if (n_channels == ten_twenty.size()) return ten_twenty;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < n_channels; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ch%02zu", k);
    names.emplace_back(buf);
  }
  return names;
}

Recording gen_subject(const CouplingSpec& spec, const std::string& subject_id, Group group) {
  spec.validate();
  const std::vector<double> s = band_limited_noise(spec, derive_seed(spec.seed, {0}));
  const std::vector<double> ck = channel_couplings(spec.coupling, spec.n_channels);
  Recording rec;
  rec.subject_id = subject_id;
  rec.group = group;
  rec.sampling_rate_hz = spec.sampling_rate_hz;
  rec.channel_names = default_channel_names(spec.n_channels);
  rec.n_samples = spec.n_samples;
  rec.samples.resize(spec.n_channels * spec.n_samples);
  for (std::size_t k = 0; k < spec.n_channels; ++k) {
    const std::vector<double> xi = band_limited_noise(spec, derive_seed(spec.seed, {k + 1}));
    auto out = rec.channel(k);
    for (std::size_t i = 0; i < spec.n_samples; ++i)
      out[i] = static_cast<float>(spec.amplitude * ((1.0 - ck[k]) * xi[i] + ck[k] * s[i]));
  }
  return rec;
}

std::size_t cohort_size(const CohortSpec& spec) { return spec.group_a.subjects + spec.group_b.subjects; }

std::string cohort_subject_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sub-%03zu", index + 1);
  return buf;
}

Recording gen_cohort_subject(const CohortSpec& spec, std::size_t index) {
  if (index >= cohort_size(spec)) throw Error("bad_index", "subject index out of range");
  const bool in_a = index < spec.group_a.subjects;
  CouplingSpec s = spec.subject;
  s.coupling = in_a ? spec.group_a.coupling : spec.group_b.coupling;
  s.seed = derive_seed(spec.seed, {index});
  return gen_subject(s, cohort_subject_id(index), in_a ? Group::A : Group::B);
}

CohortManifest gen_cohort(const CohortSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.group_a.subjects < 1 || spec.group_b.subjects < 1)
    throw Error("bad_cohort", "each group needs at least one subject");
  spec.subject.validate();
  std::filesystem::create_directories(out_dir);
  const std::size_t n = cohort_size(spec);
  CohortManifest manifest;
  manifest.entries.resize(n);
  for (const Band& b : default_bands())
    if (b.high_hz < spec.subject.sampling_rate_hz / 2.0) manifest.bands.push_back(b);
  manifest.sampling_rate_hz = spec.subject.sampling_rate_hz;
  parallel_for(n, [&](std::size_t i) {
    const Recording rec = gen_cohort_subject(spec, i);
    const std::filesystem::path payload = out_dir / (rec.subject_id + ".f32");
    save_recording(rec, payload);
    manifest.entries[i] = {rec.subject_id, rec.group, std::filesystem::absolute(payload)};
  }, true);
  save_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace cpte
