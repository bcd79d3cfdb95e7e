#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cpte/ingest.hpp"

namespace cpte {

struct CouplingSpec {
  double coupling = 0.0;  // c in [0, 1]
  std::size_t n_channels = 2;
  std::size_t n_samples = 2000;
  double sampling_rate_hz = 500.0;
  double band_low_hz = 1.0;  // source spectrum
  double band_high_hz = 40.0;
  double amplitude = 1.0;  // output scale
  std::uint64_t seed = 0;

  void validate() const;
};

// White Gaussian noise through the spec's band-pass, rescaled to zero mean
// and unit variance. A burn-in of one second is discarded.
std::vector<double> band_limited_noise(const CouplingSpec& spec, std::uint64_t seed);

// x = (1-c) xi1 + c s, y = (1-c) xi2 + c s with a shared source s and
// independent xi1, xi2, all unit variance before mixing, times amplitude.
std::pair<std::vector<double>, std::vector<double>> gen_coupled_pair(const CouplingSpec& spec);

// Henon driver x and response y with x-to-y coupling strength c in [0, 1].
std::pair<std::vector<double>, std::vector<double>> gen_henon_pair(double coupling, std::size_t n_samples,
                                                                   std::uint64_t seed);

// Per-channel mixing weights for a subject of group coupling c:
// c_k = min(1, c * w_k) with w_k spaced linearly over [0.4, 1.6] (mean 1).
std::vector<double> channel_couplings(double coupling, std::size_t n_channels);

// Standard 10-20 names for 19 channels, "ch00".. otherwise.
std::vector<std::string> default_channel_names(std::size_t n_channels);

// Channel k = (1 - c_k) xi_k + c_k s with one shared source per subject.
Recording gen_subject(const CouplingSpec& spec, const std::string& subject_id, Group group);

struct CohortGroup {
  std::size_t subjects = 1;
  double coupling = 0.0;
};

struct CohortSpec {
  CohortGroup group_a;
  CohortGroup group_b;
  CouplingSpec subject;  // coupling and seed are overridden per subject
  std::uint64_t seed = 0;

  CohortSpec() {
    subject.n_channels = 19;
    subject.n_samples = 120000;
    subject.amplitude = 10.0;
  }
};

// Subject i (GroupA first, then GroupB) is seeded with derive_seed(seed, {i}).
std::string cohort_subject_id(std::size_t index);
Recording gen_cohort_subject(const CohortSpec& spec, std::size_t index);
std::size_t cohort_size(const CohortSpec& spec);

// Writes every subject as <out_dir>/<id>.f32 (+ .json sidecar) and
// <out_dir>/manifest.json; returns the manifest.
CohortManifest gen_cohort(const CohortSpec& spec, const std::filesystem::path& out_dir);

}  // namespace cpte
