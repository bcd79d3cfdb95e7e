// Times one 19-channel, 2000-sample epoch matrix (171 pairs) three ways:
// the serial reference, the single-thread kernel, and the OpenMP builder.
//
//   bench_cpte [repetitions] [budget_ms]
//
// Exits nonzero if the single-thread kernel median exceeds the budget.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "cpte/cross_plot.hpp"
#include "cpte/synth.hpp"

namespace {

double median_ms(int reps, const std::function<void()>& body) {
  std::vector<double> t;
  body();  // warm-up
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 20;
  const double budget_ms = argc > 2 ? std::atof(argv[2]) : 200.0;

  cpte::CouplingSpec spec;
  spec.coupling = 0.4;
  spec.n_channels = 19;
  spec.n_samples = 2000;
  spec.amplitude = 10.0;
  spec.seed = 11;
  const cpte::Recording rec = cpte::gen_subject(spec, "bench", cpte::Group::A);
  const cpte::Epoch epoch = cpte::segment(rec, {2000, 2000, 500}).front();
  const cpte::PartitionConfig cfg;

  volatile double sink = 0.0;
  const double serial = median_ms(reps, [&] { sink = sink + cpte::serial::epoch_matrix(epoch, cfg).values[1]; });
  const double kernel = median_ms(reps, [&] { sink = sink + cpte::raw_pair_values(epoch, cfg)[0]; });
  const double parallel = median_ms(reps, [&] { sink = sink + cpte::epoch_matrix(epoch, cfg).values[1]; });

  std::printf("epoch: %zu channels x %zu samples, %zu pairs, %d repetitions\n", epoch.n_channels,
              epoch.window_length, epoch.n_channels * (epoch.n_channels - 1) / 2, reps);
  std::printf("serial reference   %9.3f ms\n", serial);
  std::printf("kernel, 1 thread   %9.3f ms\n", kernel);
  std::printf("parallel, %2d thr   %9.3f ms\n", omp_get_max_threads(), parallel);
  std::printf("budget             %9.3f ms  %s\n", budget_ms, kernel <= budget_ms ? "ok" : "exceeded");
  return kernel <= budget_ms ? 0 : 1;
}
