#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cpte/ingest.hpp"

namespace cpte {

// One second-order section, a[0] == 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{};
};

struct BandFilter {
  double low_hz = 0.0;
  double high_hz = 0.0;
  double sampling_rate_hz = 0.0;
  int order = 0;  // order of the low-pass prototype; the band-pass has 2*order poles
  std::vector<Biquad> sections;

  // Length of the odd-reflection padding used by filtfilt.
  std::size_t pad_length() const { return 3 * static_cast<std::size_t>(order + 1); }
};

// Digital Butterworth band-pass by bilinear transform of the analog prototype,
// one section per conjugate pole pair. Unit gain at the band's centre frequency.
BandFilter design_bandpass(double low_hz, double high_hz, int order, double sampling_rate_hz);

// Magnitude of the frequency response at `freq_hz`.
double magnitude_response(const BandFilter& filter, double freq_hz);

// Causal single pass, zero initial state.
std::vector<double> sosfilt(std::span<const double> x, const BandFilter& filter);

// Zero-phase forward-backward filtering with odd-reflection padding and
// steady-state initial conditions.
std::vector<double> filtfilt(std::span<const double> x, const BandFilter& filter);

// Dense channel-major matrix of doubles.
struct SignalMatrix {
  std::size_t n_channels = 0;
  std::size_t n_samples = 0;
  std::vector<double> data;

  std::span<const double> channel(std::size_t ch) const { return {data.data() + ch * n_samples, n_samples}; }
  std::span<double> channel(std::size_t ch) { return {data.data() + ch * n_samples, n_samples}; }
};

SignalMatrix to_signal(const Recording& rec);

// Every channel through filtfilt; channels run in parallel and the result
// does not depend on the schedule.
SignalMatrix filter_channels(const Recording& rec, const BandFilter& filter);

struct SegmentParams {
  std::size_t segment_length = 4000;
  std::size_t window_length = 2000;
  std::size_t step = 500;

  void validate() const;
  std::size_t windows_per_segment() const { return (segment_length - window_length) / step + 1; }
};

struct Epoch {
  std::string subject_id;
  Group group = Group::A;
  std::string band;
  std::size_t epoch_index = 0;
  std::size_t n_channels = 0;
  std::size_t window_length = 0;
  std::vector<double> samples;  // channel-major, n_channels * window_length

  std::span<const double> channel(std::size_t ch) const {
    return {samples.data() + ch * window_length, window_length};
  }
};

std::size_t epoch_count(std::size_t n_samples, const SegmentParams& params);

// Windows never cross segment boundaries; samples after the last whole
// segment are dropped.
std::vector<Epoch> segment(const SignalMatrix& signal, const SegmentParams& params,
                           const std::string& subject_id = {}, Group group = Group::A,
                           const std::string& band = {});
std::vector<Epoch> segment(const Recording& rec, const SegmentParams& params = {});

}  // namespace cpte
