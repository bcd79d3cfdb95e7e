#include "cpte/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "cpte/error.hpp"

namespace cpte {

using cd = std::complex<double>;

BandFilter design_bandpass(double low_hz, double high_hz, int order, double sampling_rate_hz) {
  if (!(sampling_rate_hz > 0.0)) throw Error("bad_band", "sampling rate must be positive");
  if (!(low_hz > 0.0) || !(high_hz < sampling_rate_hz / 2.0))
    throw Error("bad_band", "band outside (0, Nyquist)");
  if (!(low_hz < high_hz)) throw Error("bad_band", "band needs low < high");
  if (order < 2 || order % 2 != 0) throw Error("bad_order", "filter order must be even and >= 2");

  const double fs2 = 2.0 * sampling_rate_hz;
  const double w1 = fs2 * std::tan(std::numbers::pi * low_hz / sampling_rate_hz);
  const double w2 = fs2 * std::tan(std::numbers::pi * high_hz / sampling_rate_hz);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // Upper-half-plane analog band-pass poles; their conjugates complete each section.
  std::vector<cd> poles;
  for (int k = 1; k <= order; ++k) {
    const cd p = std::polar(1.0, std::numbers::pi * (2.0 * k + order - 1) / (2.0 * order));
    const cd half = p * (bw / 2.0);
    const cd d = std::sqrt(half * half - w0sq);
    for (const cd s : {half + d, half - d})
      if (s.imag() > 0.0) poles.push_back(s);
  }
  if (poles.size() != static_cast<std::size_t>(order))
    throw Error("unstable_design", "band-pass pole placement failed");

  BandFilter f{low_hz, high_hz, sampling_rate_hz, order, {}};
  for (const cd s : poles) {
    const cd z = (fs2 + s) / (fs2 - s);
    if (!(std::abs(z) < 1.0)) throw Error("unstable_design", "designed pole outside the unit circle");
    Biquad q;
    q.b = {1.0, 0.0, -1.0};
    q.a = {1.0, -2.0 * z.real(), std::norm(z)};
    f.sections.push_back(q);
  }
  std::sort(f.sections.begin(), f.sections.end(),
            [](const Biquad& x, const Biquad& y) { return x.a[2] < y.a[2]; });

  // Normalise to unit gain at the digital image of the analog centre frequency.
  const double centre_hz = std::atan(std::sqrt(w0sq) / fs2) * sampling_rate_hz / std::numbers::pi;
  const double per_section = std::pow(magnitude_response(f, centre_hz), -1.0 / order);
  for (Biquad& q : f.sections)
    for (double& c : q.b) c *= per_section;
  return f;
}

double magnitude_response(const BandFilter& filter, double freq_hz) {
  const cd z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / filter.sampling_rate_hz);
  const cd z2 = z1 * z1;
  cd h = 1.0;
  for (const Biquad& q : filter.sections)
    h *= (q.b[0] + q.b[1] * z1 + q.b[2] * z2) / (q.a[0] + q.a[1] * z1 + q.a[2] * z2);
  return std::abs(h);
}

namespace {

// Transposed direct form II, in place. `init` scales the steady-state state
// for a constant input of that value; 0 means zero initial state.
void run_sections(std::vector<double>& x, const std::vector<Biquad>& sections, double init) {
  double level = init;  // steady-state input seen by the current section
  for (const Biquad& q : sections) {
    const double dc = (q.b[0] + q.b[1] + q.b[2]) / (1.0 + q.a[1] + q.a[2]);
    const double out_level = dc * level;
    double z1 = out_level - q.b[0] * level;
    double z2 = q.b[2] * level - q.a[2] * out_level;
    for (double& v : x) {
      const double in = v;
      const double y = q.b[0] * in + z1;
      z1 = q.b[1] * in - q.a[1] * y + z2;
      z2 = q.b[2] * in - q.a[2] * y;
      v = y;
    }
    level = out_level;
  }
}

}  // namespace

std::vector<double> sosfilt(std::span<const double> x, const BandFilter& filter) {
  std::vector<double> y(x.begin(), x.end());
  run_sections(y, filter.sections, 0.0);
  return y;
}

std::vector<double> filtfilt(std::span<const double> x, const BandFilter& filter) {
  const std::size_t n = x.size();
  const std::size_t pad = filter.pad_length();
  if (n <= pad)
    throw Error("sequence_too_short", "sequence too short for edge padding (" + std::to_string(n) +
                                          " <= " + std::to_string(pad) + ")");

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_sections(ext, filter.sections, ext.front());
  std::reverse(ext.begin(), ext.end());
  run_sections(ext, filter.sections, ext.front());
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

SignalMatrix to_signal(const Recording& rec) {
  SignalMatrix m{rec.n_channels(), rec.n_samples, {}};
  m.data.assign(rec.samples.begin(), rec.samples.end());
  return m;
}

SignalMatrix filter_channels(const Recording& rec, const BandFilter& filter) {
  SignalMatrix m = to_signal(rec);
  const auto n_ch = static_cast<std::ptrdiff_t>(m.n_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ch = 0; ch < n_ch; ++ch) {
    auto span = m.channel(static_cast<std::size_t>(ch));
    const std::vector<double> y = filtfilt(span, filter);
    std::copy(y.begin(), y.end(), span.begin());
  }
  return m;
}

void SegmentParams::validate() const {
  if (step == 0) throw Error("bad_segmentation", "step must be positive");
  if (window_length == 0 || window_length > segment_length)
    throw Error("bad_segmentation", "window length must be in [1, segment length]");
}

std::size_t epoch_count(std::size_t n_samples, const SegmentParams& params) {
  params.validate();
  return (n_samples / params.segment_length) * params.windows_per_segment();
}

std::vector<Epoch> segment(const SignalMatrix& signal, const SegmentParams& params,
                           const std::string& subject_id, Group group, const std::string& band) {
  params.validate();
  if (signal.n_samples < params.segment_length)
    throw Error("recording_too_short", "recording shorter than one segment");
  const std::size_t n_seg = signal.n_samples / params.segment_length;
  const std::size_t per_seg = params.windows_per_segment();
  std::vector<Epoch> epochs;
  epochs.reserve(n_seg * per_seg);
  for (std::size_t s = 0; s < n_seg; ++s) {
    for (std::size_t w = 0; w < per_seg; ++w) {
      const std::size_t start = s * params.segment_length + w * params.step;
      Epoch e{subject_id, group, band, epochs.size(), signal.n_channels, params.window_length, {}};
      e.samples.resize(signal.n_channels * params.window_length);
      for (std::size_t ch = 0; ch < signal.n_channels; ++ch) {
        const auto src = signal.channel(ch).subspan(start, params.window_length);
        std::copy(src.begin(), src.end(), e.samples.begin() + static_cast<std::ptrdiff_t>(ch * params.window_length));
      }
      epochs.push_back(std::move(e));
    }
  }
  return epochs;
}

std::vector<Epoch> segment(const Recording& rec, const SegmentParams& params) {
  return segment(to_signal(rec), params, rec.subject_id, rec.group, {});
}

}  // namespace cpte
