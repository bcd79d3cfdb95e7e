// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   acceptance [criterion ...]     run a subset, e.g. "acceptance 1 4 11"
//
// Criterion 10 needs CPTE_CLINICAL_MANIFEST pointing at a converted clinical
// cohort manifest and reports SKIP without it.

#include <omp.h>

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpte/classify.hpp"
#include "cpte/cli.hpp"
#include "cpte/cross_plot.hpp"
#include "cpte/netmetrics.hpp"
#include "cpte/pipeline.hpp"
#include "cpte/stats.hpp"
#include "cpte/synth.hpp"
#include "support.hpp"

using namespace cpte;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240611;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
  bool skipped = false;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class SingleThread {
 public:
  SingleThread() : saved_(omp_get_max_threads()) { omp_set_num_threads(1); }
  ~SingleThread() { omp_set_num_threads(saved_); }

 private:
  int saved_;
};

// ---------------------------------------------------------------------------

Verdict coupling_monotonicity() {
  SingleThread one;
  const auto t0 = Clock::now();
  const double cs[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> means;
  for (std::size_t ci = 0; ci < 5; ++ci) {
    double sum = 0.0;
    for (std::uint64_t p = 0; p < 50; ++p) {
      CouplingSpec spec;
      spec.coupling = cs[ci];
      spec.n_samples = 2000;
      spec.seed = derive_seed(kSeed, {1, p});  // pair p keeps its sources at every c
      const auto [x, y] = gen_coupled_pair(spec);
      sum += cpte::cpte(x, y);
    }
    means.push_back(sum / 50.0);
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  for (std::size_t i = 1; i < means.size(); ++i) v.pass = v.pass && means[i] < means[i - 1];
  v.pass = v.pass && elapsed < 60.0;
  v.detail = fmt("means %.4f %.4f %.4f", means[0], means[1], means[2]) +
             fmt(" %.4f %.4f, %.2f s single-threaded", means[3], means[4], elapsed);
  return v;
}

Verdict symmetry_invariance() {
  Rng rng(derive_seed(kSeed, {2}));
  std::size_t sym = 0, shift = 0, scale = 0;
  for (int t = 0; t < 100; ++t) {
    const auto x = testing::uniform_series(rng, 2000, 10.0);
    const auto y = testing::uniform_series(rng, 2000, 10.0);
    const double h = cpte::cpte(x, y);
    sym += cpte::cpte(y, x) == h;
    std::vector<double> xs = x, ys = y, xk = x, yk = y;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xs[i] += 3.5;
      ys[i] -= 17.0;
      xk[i] *= 2.5;
      yk[i] *= 2.5;
    }
    shift += cpte::cpte(xs, ys) == h;
    scale += cpte::cpte(xk, yk) == h;
  }
  Verdict v;
  v.pass = sym == 100 && shift == 100 && scale == 100;
  v.detail = fmt("exact: symmetry %g/100, translation %g/100, scale %g/100", static_cast<double>(sym),
                 static_cast<double>(shift), static_cast<double>(scale));
  return v;
}

Verdict entropy_bounds() {
  Rng rng(derive_seed(kSeed, {3}));
  std::size_t inside = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.index(2000);
    const double h = cpte::cpte(testing::uniform_series(rng, n), testing::uniform_series(rng, n));
    inside += h >= 0.0 && h <= std::log2(static_cast<double>(n - 1)) + 1e-12;
  }
  const std::vector<double> c(500, 3.25), d(500, -1.0);
  const double constant = cpte::cpte(c, d);
  const std::vector<double> alt = {0, 1, 0, 1};
  const double example = cpte::cpte(alt, alt);
  Verdict v;
  v.pass = inside == 1000 && constant == 0.0 && std::abs(example - 0.9183) <= 1e-4;
  v.detail = fmt("%g/1000 within [0, log2(N-1)], constant pair %g, [0,1,0,1] -> %.6f", static_cast<double>(inside),
                 constant, example);
  return v;
}

Eigen::MatrixXd dense(const BinaryNetwork& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g.edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return a;
}

Verdict graph_oracles() {
  Rng rng(derive_seed(kSeed, {4}));
  std::size_t cc_ok = 0, sc_ok = 0, ec_ok = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.index(8);
    const BinaryNetwork g = testing::random_graph(rng, n);
    const auto cc = clustering_coefficients(g);
    const auto sc = subgraph_centrality(g);
    bool cc_match = true, sc_match = true;
    const Eigen::MatrixXd a = dense(g);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols()), series = term;
    for (int l = 1; l <= 30; ++l) {
      term = term * a / static_cast<double>(l);
      series += term;
    }
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t tri = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          tri += i != k && j != k && g.edge(k, i) && g.edge(k, j) && g.edge(i, j);
      const double p = static_cast<double>(g.degree(k));
      const double expected = p < 2 ? 0.0 : 2.0 * static_cast<double>(tri) / (p * (p - 1.0));
      cc_match = cc_match && cc[k] == expected;
      sc_match = sc_match && std::abs(sc[k] - series(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))) <= 1e-8;
    }
    cc_ok += cc_match;
    sc_ok += sc_match;
    const auto ec = eigenvector_centrality(g);
    if (ec.empty_network) {
      ec_ok += std::all_of(ec.values.begin(), ec.values.end(), [](double x) { return x == 0.0; });
    } else {
      const Eigen::Map<const Eigen::VectorXd> v(ec.values.data(), static_cast<Eigen::Index>(n));
      ec_ok += (a * v - ec.eigenvalue * v).norm() <= 1e-6 * v.norm();
    }
  }
  const auto k3 = BinaryNetwork::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  const double sc_k3 = subgraph_centrality(k3)[0];
  const auto star = eigenvector_centrality(BinaryNetwork::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}})).values;
  const std::vector<double> star_ref = {1, 0.5, 0.5, 0.5, 0.5};
  double star_err = 0.0;
  for (std::size_t k = 0; k < 5; ++k) star_err = std::max(star_err, std::abs(star[k] - star_ref[k]));
  Verdict v;
  v.pass = cc_ok == 200 && sc_ok == 200 && ec_ok == 200 && std::abs(sc_k3 - 2.7082) <= 1e-4 && star_err <= 1e-6;
  v.detail = fmt("CC %g/200, SC %g/200, EC %g/200", static_cast<double>(cc_ok), static_cast<double>(sc_ok),
                 static_cast<double>(ec_ok)) +
             fmt(", K3 SC %.6f, star EC max error %.2e", sc_k3, star_err);
  return v;
}

// ---------------------------------------------------------------------------
// Synthetic cohort shared by criteria 5, 6 and 7.

struct Cohort {
  CohortSpec spec;
  std::vector<SyncMatrix> matrices;
  std::vector<std::size_t> per_subject;
  double build_seconds = 0.0;
};

const Cohort& cohort() {
  static const Cohort c = [] {
    Cohort out;
    out.spec.group_a = {36, 0.2};
    out.spec.group_b = {23, 0.6};
    out.spec.seed = kSeed;
    const Band all{"all", 0.5, 44.0};
    const PipelineConfig cfg;
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < cohort_size(out.spec); ++i) {
      auto ms = recording_matrices(gen_cohort_subject(out.spec, i), all, cfg);
      out.per_subject.push_back(ms.size());
      out.matrices.insert(out.matrices.end(), std::make_move_iterator(ms.begin()), std::make_move_iterator(ms.end()));
    }
    out.build_seconds = seconds_since(t0);
    return out;
  }();
  return c;
}

Verdict density_properties() {
  const Cohort& c = cohort();
  std::size_t monotone = 0, full = 0, degenerate = 0;
  std::size_t np = 0;
  for (const SyncMatrix& m : c.matrices) {
    degenerate += m.degenerate;
    double prev = -1.0;
    bool ok = true;
    for (int i = 0; i <= 100; ++i) {
      const double nd = connectivity_density(binarize(m, i / 100.0));
      ok = ok && nd >= prev;
      prev = nd;
    }
    monotone += ok;
    const BinaryNetwork top = binarize(m, 1.0);
    full += connectivity_density(top) == 1.0;
    np = std::max(np, top.edge_count());
  }
  const std::size_t total = c.matrices.size();
  Verdict v;
  v.pass = total > 0 && monotone == total && full == total && np == 171;
  v.detail = fmt("%g epochs: N_d nondecreasing on %g, N_d(1) = 1 on %g, N_p = %g", static_cast<double>(total),
                 static_cast<double>(monotone), static_cast<double>(full), static_cast<double>(np));
  if (degenerate) v.detail += fmt(", %g degenerate", static_cast<double>(degenerate));
  return v;
}

Verdict epoch_arithmetic() {
  const Cohort& c = cohort();
  std::size_t a = 0, b = 0;
  bool each = true;
  for (std::size_t i = 0; i < c.per_subject.size(); ++i) {
    each = each && c.per_subject[i] == 150;
    (i < c.spec.group_a.subjects ? a : b) += c.per_subject[i];
  }
  Verdict v;
  v.pass = each && epoch_count(120000, {}) == 150 && a == 5400 && b == 3450 && a + b == 8850;
  v.detail = fmt("150 per recording: %s, GroupA %zu + GroupB %zu = %zu", each ? "yes" : "no", a, b, a + b);
  return v;
}

Verdict discrimination() {
  const auto t0 = Clock::now();
  const Cohort& c = cohort();
  const auto measures = parse_measures("all");
  const FeatureTable table = build_feature_table(c.matrices, 0.6, measures, default_channel_names(19));
  CvOptions opt;
  opt.seed = kSeed;
  ClassifierSpec rf;
  rf.kind = ClassifierSpec::Kind::RandomForest;
  ClassifierSpec knn;
  knn.kind = ClassifierSpec::Kind::Knn;
  knn.k = 5;
  const CvReport r_rf = cross_validate(table, rf, opt);
  const CvReport r_knn = cross_validate(table, knn, opt);
  const FeatureTable shuffled = shuffle_labels(table, derive_seed(kSeed, {7}));
  const CvReport r_shuf = cross_validate(shuffled, rf, opt);
  const double majority = 5400.0 / 8850.0;
  const double elapsed = c.build_seconds + seconds_since(t0);

  Verdict v;
  v.pass = r_rf.accuracy.mean >= 0.90 && r_knn.accuracy.mean >= 0.90 &&
           std::abs(r_shuf.accuracy.mean - majority) <= 0.05 && elapsed < 1800.0;
  v.detail = fmt("RF %.2f%% +/- %.2f, kNN %.2f%% +/- %.2f", 100 * r_rf.accuracy.mean, 100 * r_rf.accuracy.stddev,
                 100 * r_knn.accuracy.mean, 100 * r_knn.accuracy.stddev) +
             fmt(", shuffled RF %.2f%% (majority %.2f%%), %.0f s on %d threads", 100 * r_shuf.accuracy.mean,
                 100 * majority, elapsed, omp_get_max_threads());
  return v;
}

Verdict statistics_oracle() {
  using Big = boost::multiprecision::cpp_bin_float_50;
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = -10.0 + 0.2 * i;
    for (int j = 0; j <= 60; ++j) {
      const double df = std::pow(1000.0, j / 60.0);
      const boost::math::students_t_distribution<Big> dist{Big(df)};
      const double ref = static_cast<double>(
          2 * boost::math::cdf(boost::math::complement(dist, boost::multiprecision::abs(Big(t)))));
      worst = std::max(worst, std::abs(student_t_two_sided(t, df) - ref));
    }
  }
  const std::vector<double> g = {1.5, 2.0, 4.25, 3.0, 0.5};
  const double p_same = welch_ttest(g, g).p_value;
  Verdict v;
  v.pass = worst <= 1e-9 && p_same == 1.0;
  v.detail = fmt("max |p - reference| = %.2e over 101 x 61 (t, df) points, identical groups p = %g", worst, p_same);
  return v;
}

Verdict determinism() {
  testing::TempDir dir("acceptance_determinism");
  cli::SynthConfig synth;
  synth.cohort.group_a = {4, 0.2};
  synth.cohort.group_b = {3, 0.6};
  synth.cohort.subject.n_samples = 12000;
  synth.out_dir = dir / "cohort";
  synth.seed = kSeed;
  const fs::path manifest = cli::cmd_synth(synth);

  cli::RunConfig cfg;
  cfg.command = "classify";
  cfg.manifest = manifest;
  cfg.out_dir = dir / "out";
  cfg.bands = {"all", "gamma"};
  cfg.measure_sets = {"all"};
  cfg.seed = kSeed;
  cfg.use_cache = false;

  const fs::path report = cli::cmd_classify(cfg);
  const std::string first = testing::slurp(report);
  const std::string first_csv = testing::slurp(cfg.out_dir / "classify.csv");
  cli::cmd_classify(cfg);
  const std::string second = testing::slurp(report);
  const std::string second_csv = testing::slurp(cfg.out_dir / "classify.csv");
  Verdict v;
  v.pass = !first.empty() && first == second && first_csv == second_csv;
  v.detail = fmt("classify.json %g bytes, classify.csv %g bytes, identical: ", static_cast<double>(first.size()),
                 static_cast<double>(first_csv.size()));
  v.detail += v.pass ? "yes" : "no";
  return v;
}

Verdict clinical_replication() {
  Verdict v;
  const char* env = std::getenv("CPTE_CLINICAL_MANIFEST");
  if (!env || !*env) {
    v.skipped = true;
    v.detail = "set CPTE_CLINICAL_MANIFEST to a converted clinical cohort manifest to run";
    return v;
  }
  const CohortManifest manifest = load_manifest(env);
  const PipelineConfig cfg;
  const auto measures = parse_measures("all");
  ClassifierSpec rf;
  CvOptions opt;
  opt.seed = kSeed;
  const struct {
    const char* band;
    double target;
  } checks[] = {{"all", 0.8758}, {"gamma", 0.9287}};
  for (const auto& check : checks) {
    const BandMatrices bm = cohort_matrices(manifest, manifest.band(check.band), cfg);
    const FeatureTable t = build_feature_table(bm.matrices, 0.6, measures, bm.channel_names);
    const double acc = cross_validate(t, rf, opt).accuracy.mean;
    v.pass = v.pass && std::abs(acc - check.target) <= 0.05;
    v.detail += fmt("%s RF %.2f%% (target %.2f%%); ", check.band, 100 * acc, 100 * check.target);
  }
  return v;
}

Verdict matrix_performance() {
  SingleThread one;
  CouplingSpec spec;
  spec.coupling = 0.4;
  spec.n_channels = 19;
  spec.n_samples = 2000;
  spec.amplitude = 10.0;
  spec.seed = kSeed;
  const Recording rec = gen_subject(spec, "bench", Group::A);
  const Epoch epoch = segment(rec, {2000, 2000, 500}).front();
  const PartitionConfig cfg;
  std::vector<double> times;
  volatile double sink = 0.0;
  sink = sink + raw_pair_values(epoch, cfg)[0];
  for (int r = 0; r < 21; ++r) {
    const auto t0 = Clock::now();
    sink = sink + epoch_matrix(epoch, cfg).values[1];
    times.push_back(1000.0 * seconds_since(t0));
  }
  std::sort(times.begin(), times.end());
  Verdict v;
  v.pass = times[10] <= 200.0;
  v.detail = fmt("171-pair matrix, 19 x 2000 epoch: median %.2f ms single-threaded (budget 200 ms)", times[10]);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"CPTE coupling monotonicity", coupling_monotonicity},
      {"CPTE symmetry and invariance", symmetry_invariance},
      {"entropy bounds", entropy_bounds},
      {"graph-metric oracles", graph_oracles},
      {"density properties", density_properties},
      {"epoch arithmetic", epoch_arithmetic},
      {"end-to-end discrimination", discrimination},
      {"statistics oracle", statistics_oracle},
      {"determinism", determinism},
      {"clinical replication", clinical_replication},
      {"matrix performance", matrix_performance},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const char* status = v.skipped ? "SKIP" : v.pass ? "PASS" : "FAIL";
    if (!v.skipped && !v.pass) ++failures;
    std::printf("%s criterion %2d  %-30s %s\n", status, id, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
