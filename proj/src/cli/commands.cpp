#include "cpte/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "cpte/error.hpp"
#include "cpte/netmetrics.hpp"
#include "cpte/random.hpp"

namespace cpte::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("write_failed", "cannot write " + path.string());
}

ojson band_json(const Band& b) { return {{"name", b.name}, {"low_hz", b.low_hz}, {"high_hz", b.high_hz}}; }

ojson summary_json(const MetricSummary& s) { return {{"mean", s.mean}, {"std", s.stddev}}; }

ClassifierSpec classifier_spec(const std::string& name, const RunConfig& cfg) {
  ClassifierSpec spec;
  const std::string n = lower(name);
  if (n == "rf") {
    spec.kind = ClassifierSpec::Kind::RandomForest;
    spec.forest = cfg.forest;
  } else if (n == "knn") {
    spec.kind = ClassifierSpec::Kind::Knn;
    spec.k = cfg.knn_k;
  } else {
    throw Error("bad_classifier", "unknown classifier '" + name + "' (expected rf or knn)");
  }
  return spec;
}

CvOptions cv_options(const RunConfig& cfg) {
  CvOptions o;
  o.folds = cfg.folds;
  o.repeats = cfg.repeats;
  o.seed = *cfg.seed;
  o.mode = cfg.cv_mode;
  return o;
}

// Loaded manifest, resolved bands and the matrix cache for one command.
struct Session {
  const RunConfig& cfg;
  CohortManifest manifest;
  std::vector<Band> bands;
  std::optional<MatrixCache> cache;

  explicit Session(const RunConfig& c) : cfg(c) {
    cfg.validate();
    manifest = load_manifest(cfg.manifest);
    if (cfg.bands.empty()) bands = manifest.bands;
    else
      for (const std::string& name : cfg.bands) bands.push_back(manifest.band(name));
    if (cfg.use_cache) cache.emplace(cfg.out_dir / "cache");
  }

  BandMatrices matrices(const Band& band) const {
    return cohort_matrices(manifest, band, cfg.pipeline, cache ? &*cache : nullptr);
  }

  // The RunConfig plus the band definitions actually used.
  ojson provenance() const {
    ojson j = cfg.to_json();
    ojson bs = ojson::array();
    for (const Band& b : bands) bs.push_back(band_json(b));
    j["bands"] = bs;
    return j;
  }

  std::string csv_preamble() const { return "# run_config: " + provenance().dump() + "\n"; }
};

ojson report_json(const CvReport& r, const FeatureTable& table) {
  std::size_t n_b = 0;
  for (Group g : table.labels) n_b += g == Group::B;
  ojson folds = ojson::array();
  for (const FoldResult& f : r.fold_results)
    folds.push_back({{"repeat", f.repeat}, {"fold", f.fold}, {"tp", f.tp}, {"fn", f.fn}, {"tn", f.tn}, {"fp", f.fp}});
  return {{"classifier", r.classifier},
          {"band", r.band},
          {"measures", r.measures},
          {"threshold", r.threshold},
          {"n_rows", r.n_rows},
          {"n_features", r.n_features},
          {"n_group_a", table.rows() - n_b},
          {"n_group_b", n_b},
          {"accuracy", summary_json(r.accuracy)},
          {"sensitivity", summary_json(r.sensitivity)},
          {"specificity", summary_json(r.specificity)},
          {"folds", folds}};
}

}  // namespace

void RunConfig::validate() const {
  if (!seed) throw Error("missing_seed", "a seed is required");
  pipeline.validate();
  if (threshold_grid.empty()) throw Error("bad_grid", "threshold grid is empty");
  for (double th : threshold_grid)
    if (!(th >= 0.0 && th <= 1.0)) throw Error("bad_threshold", "grid thresholds must lie in [0, 1]");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error("bad_threshold", "threshold must lie in [0, 1]");
  if (measure_sets.empty()) throw Error("bad_measure", "no measure sets given");
  for (const std::string& m : measure_sets) parse_measures(m);
  if (classifiers.empty()) throw Error("bad_classifier", "no classifiers given");
  for (const std::string& c : classifiers) classifier_spec(c, *this);
  if (folds < 2) throw Error("bad_folds", "need at least 2 folds");
  if (repeats < 1) throw Error("bad_repeats", "need at least one repeat");
  if (knn_k < 1) throw Error("bad_k", "k must be positive");
  if (forest.trees < 1) throw Error("bad_forest", "need at least one tree");
}

ojson RunConfig::to_json() const {
  const PartitionConfig& p = pipeline.partition;
  const SegmentParams& s = pipeline.segmentation;
  return {
      {"command", command},
      {"manifest", manifest.generic_string()},
      {"out_dir", out_dir.generic_string()},
      {"bands", bands},
      {"partition",
       {{"angular_ruler_deg", p.angular_ruler_deg},
        {"radial_mode", p.radial_mode == RadialMode::Normalized ? "normalized" : "absolute"},
        {"radial_rings", p.radial_rings},
        {"radial_ruler", p.radial_ruler}}},
      {"segmentation", {{"segment_length", s.segment_length}, {"window_length", s.window_length}, {"step", s.step}}},
      {"filter_order", pipeline.filter_order},
      {"threshold_grid", threshold_grid},
      {"threshold", threshold},
      {"measure_sets", measure_sets},
      {"classifiers", classifiers},
      {"forest", {{"trees", forest.trees}, {"max_features", forest.max_features}, {"min_split", forest.min_split}}},
      {"knn_k", knn_k},
      {"cv", {{"folds", folds}, {"repeats", repeats}, {"mode", cv_mode == CvMode::Epoch ? "epoch" : "subject"}}},
      {"stats_unit", stats_unit == SummaryUnit::Epoch ? "epoch" : "subject"},
      {"shuffle_labels", shuffle_labels},
      {"seed", seed ? ojson(*seed) : ojson(nullptr)},
  };
}

fs::path cmd_synth(const SynthConfig& cfg) {
  if (!cfg.seed) throw Error("missing_seed", "a seed is required");
  if (cfg.cohort.group_a.subjects < 1 || cfg.cohort.group_b.subjects < 1)
    throw Error("bad_cohort", "each group needs at least one subject");
  CohortSpec spec = cfg.cohort;
  spec.seed = *cfg.seed;
  gen_cohort(spec, cfg.out_dir);
  return cfg.out_dir / "manifest.json";
}

fs::path cmd_cpte(const RunConfig& cfg) {
  const Session session(cfg);
  const fs::path root = cfg.out_dir / "matrices";
  const ojson prov = session.provenance();
  const std::string config_hash = hex64(fnv1a64(prov.dump()));
  write_text(root / "run_config.json", prov.dump(2) + "\n");

  for (const Band& band : session.bands) {
    const BandMatrices bm = session.matrices(band);
    const std::size_t n = bm.channel_names.size();
    std::vector<double> sum[2];
    std::size_t epochs[2] = {0, 0};
    std::map<std::string, Group> subjects[2];

    for (const SyncMatrix& m : bm.matrices) {
      ojson rows = ojson::array();
      for (std::size_t i = 0; i < n; ++i)
        rows.push_back(std::vector<double>(m.values.begin() + i * n, m.values.begin() + (i + 1) * n));
      const ojson j = {{"subject_id", m.subject_id},
                       {"group", to_string(m.group)},
                       {"band", m.band},
                       {"epoch_index", m.epoch_index},
                       {"channel_names", bm.channel_names},
                       {"degenerate", m.degenerate},
                       {"raw_min", m.raw_min},
                       {"raw_max", m.raw_max},
                       {"run_config_hash", config_hash},
                       {"values", rows}};
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%03zu.json", m.epoch_index);
      write_text(root / band.name / m.subject_id / name, j.dump() + "\n");

      const int g = m.group == Group::B;
      if (sum[g].empty()) sum[g].assign(n * n, 0.0);
      for (std::size_t k = 0; k < n * n; ++k) sum[g][k] += m.values[k];
      ++epochs[g];
      subjects[g][m.subject_id] = m.group;
    }

    for (int g = 0; g < 2; ++g) {
      if (epochs[g] == 0) continue;
      const Group group = g ? Group::B : Group::A;
      ojson rows = ojson::array();
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(n);
        for (std::size_t j = 0; j < n; ++j) row[j] = sum[g][i * n + j] / static_cast<double>(epochs[g]);
        rows.push_back(row);
      }
      const ojson j = {{"band", band.name},
                       {"group", to_string(group)},
                       {"epoch_count", epochs[g]},
                       {"subject_count", subjects[g].size()},
                       {"channel_names", bm.channel_names},
                       {"values", rows},
                       {"run_config", prov}};
      write_text(cfg.out_dir / "group_mean" / (band.name + "_" + std::string(to_string(group)) + ".json"),
                 j.dump(2) + "\n");
    }
  }
  return root;
}

fs::path cmd_density(const RunConfig& cfg) {
  const Session session(cfg);
  std::string csv = session.csv_preamble() + "band,group,th,mean_nd\n";
  for (const Band& band : session.bands) {
    const BandMatrices bm = session.matrices(band);
    for (Group g : {Group::A, Group::B}) {
      std::vector<double> sum(cfg.threshold_grid.size(), 0.0);
      std::size_t count = 0;
      for (const SyncMatrix& m : bm.matrices) {
        if (m.group != g) continue;
        for (std::size_t t = 0; t < cfg.threshold_grid.size(); ++t)
          sum[t] += connectivity_density(binarize(m, cfg.threshold_grid[t]));
        ++count;
      }
      if (count == 0) continue;
      for (std::size_t t = 0; t < cfg.threshold_grid.size(); ++t)
        csv += band.name + "," + std::string(to_string(g)) + "," + num(cfg.threshold_grid[t]) + "," +
               num(sum[t] / static_cast<double>(count)) + "\n";
    }
  }
  const fs::path out = cfg.out_dir / "density.csv";
  write_text(out, csv);
  return out;
}

fs::path cmd_sweep(const RunConfig& cfg) {
  const Session session(cfg);
  ojson sweeps = ojson::array();
  std::string csv = session.csv_preamble() +
                    "band,classifier,measures,th,accuracy_mean,accuracy_std,sensitivity_mean,specificity_mean\n";
  for (const Band& band : session.bands) {
    const BandMatrices bm = session.matrices(band);
    for (const std::string& set : cfg.measure_sets) {
      const std::vector<Measure> measures = parse_measures(set);
      for (const std::string& c : cfg.classifiers) {
        const ClassifierSpec spec = classifier_spec(c, cfg);
        const SweepResult r =
            threshold_sweep(bm.matrices, measures, spec, cv_options(cfg), cfg.threshold_grid, bm.channel_names);
        ojson points = ojson::array();
        for (const SweepPoint& p : r.points) {
          points.push_back({{"threshold", p.threshold},
                            {"accuracy", summary_json(p.report.accuracy)},
                            {"sensitivity", summary_json(p.report.sensitivity)},
                            {"specificity", summary_json(p.report.specificity)}});
          csv += band.name + "," + spec.name() + "," + measures_label(measures) + "," + num(p.threshold) + "," +
                 num(p.report.accuracy.mean) + "," + num(p.report.accuracy.stddev) + "," +
                 num(p.report.sensitivity.mean) + "," + num(p.report.specificity.mean) + "\n";
        }
        sweeps.push_back({{"band", band.name},
                          {"classifier", spec.name()},
                          {"measures", measures_label(measures)},
                          {"best_threshold", r.best_threshold},
                          {"best_accuracy", r.best_accuracy},
                          {"points", points}});
      }
    }
  }
  const ojson doc = {{"run_config", session.provenance()}, {"sweeps", sweeps}};
  const fs::path out = cfg.out_dir / "sweep.json";
  write_text(out, doc.dump(2) + "\n");
  write_text(cfg.out_dir / "sweep.csv", csv);
  return out;
}

fs::path cmd_classify(const RunConfig& cfg) {
  const Session session(cfg);
  ojson reports = ojson::array();
  std::string csv = session.csv_preamble() +
                    "band,classifier,measures,th,n_rows,n_features,accuracy_mean,accuracy_std,"
                    "sensitivity_mean,sensitivity_std,specificity_mean,specificity_std\n";
  for (const Band& band : session.bands) {
    const BandMatrices bm = session.matrices(band);
    for (const std::string& set : cfg.measure_sets) {
      const std::vector<Measure> measures = parse_measures(set);
      FeatureTable table = build_feature_table(bm.matrices, cfg.threshold, measures, bm.channel_names);
      if (cfg.shuffle_labels) table = shuffle_labels(table, derive_seed(*cfg.seed, {fnv1a64("shuffle:" + band.name)}));
      for (const std::string& c : cfg.classifiers) {
        const CvReport r = cross_validate(table, classifier_spec(c, cfg), cv_options(cfg));
        reports.push_back(report_json(r, table));
        csv += band.name + "," + r.classifier + "," + r.measures + "," + num(r.threshold) + "," +
               std::to_string(r.n_rows) + "," + std::to_string(r.n_features) + "," + num(r.accuracy.mean) + "," +
               num(r.accuracy.stddev) + "," + num(r.sensitivity.mean) + "," + num(r.sensitivity.stddev) + "," +
               num(r.specificity.mean) + "," + num(r.specificity.stddev) + "\n";
      }
    }
  }
  const ojson doc = {{"run_config", session.provenance()}, {"reports", reports}};
  const fs::path out = cfg.out_dir / "classify.json";
  write_text(out, doc.dump(2) + "\n");
  write_text(cfg.out_dir / "classify.csv", csv);
  return out;
}

fs::path cmd_stats(const RunConfig& cfg) {
  const Session session(cfg);
  const std::vector<Measure> all = parse_measures("all");
  std::map<std::string, FeatureTable> tables;
  for (const Band& band : session.bands) {
    const BandMatrices bm = session.matrices(band);
    tables[band.name] = build_feature_table(bm.matrices, cfg.threshold, all, bm.channel_names);
  }
  ojson rows = ojson::array();
  std::string csv = session.csv_preamble() + "measure,band,n_a,n_b,median_a,median_b,t,df,p\n";
  for (Measure m : all) {
    for (const Band& band : session.bands) {
      const GroupSummary s = group_summary(tables.at(band.name), std::string(to_string(m)), cfg.stats_unit);
      rows.push_back({{"measure", to_string(m)},
                      {"band", band.name},
                      {"n_a", s.n_a},
                      {"n_b", s.n_b},
                      {"median_a", s.test.median_a},
                      {"median_b", s.test.median_b},
                      {"t", s.test.t_statistic},
                      {"df", s.test.degrees_of_freedom},
                      {"p", s.test.p_value}});
      csv += std::string(to_string(m)) + "," + band.name + "," + std::to_string(s.n_a) + "," + std::to_string(s.n_b) +
             "," + num(s.test.median_a) + "," + num(s.test.median_b) + "," + num(s.test.t_statistic) + "," +
             num(s.test.degrees_of_freedom) + "," + num(s.test.p_value) + "\n";
    }
  }
  const ojson doc = {{"run_config", session.provenance()}, {"rows", rows}};
  write_text(cfg.out_dir / "stats.json", doc.dump(2) + "\n");
  const fs::path out = cfg.out_dir / "stats.csv";
  write_text(out, csv);
  return out;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

void print_error(const std::string& command, const std::string& code, const std::string& message) {
  const ojson j = {{"error", {{"command", command}, {"code", code}, {"message", message}}}};
  std::cerr << j.dump() << std::endl;
}

CohortGroup parse_cohort_group(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("expected N:C, got '" + text + "'");
  CohortGroup g;
  try {
    std::size_t used = 0;
    const long n = std::stol(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("count");
    const std::string c = text.substr(colon + 1);
    g.coupling = std::stod(c, &used);
    if (used != c.size()) throw std::invalid_argument("coupling");
    if (n < 1) throw CLI::ValidationError("group needs at least one subject");
    g.subjects = static_cast<std::size_t>(n);
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("expected N:C, got '" + text + "'");
  }
  if (!(g.coupling >= 0.0 && g.coupling <= 1.0)) throw CLI::ValidationError("coupling must lie in [0, 1]");
  return g;
}

void add_run_options(CLI::App* sub, RunConfig& cfg, std::uint64_t& seed) {
  sub->add_option("--manifest", cfg.manifest, "Cohort manifest (JSON)")->required();
  sub->add_option("--out", cfg.out_dir, "Output directory")->required();
  sub->add_option("--seed", seed, "Master seed")->required();
  sub->add_option("--bands", cfg.bands, "Band names (default: every manifest band)");
  sub->add_option("--dtheta", cfg.pipeline.partition.angular_ruler_deg, "Angular ruler in degrees");
  sub->add_option("--radial", "Radial partition mode")
      ->check(CLI::IsMember({"normalized", "absolute"}))
      ->each([&cfg](const std::string& v) {
        cfg.pipeline.partition.radial_mode = v == "absolute" ? RadialMode::Absolute : RadialMode::Normalized;
      });
  sub->add_option("--rings", cfg.pipeline.partition.radial_rings, "Ring count in normalized mode");
  sub->add_option("--dr", cfg.pipeline.partition.radial_ruler, "Ring width in absolute mode");
  sub->add_option("--segment", cfg.pipeline.segmentation.segment_length, "Segment length in samples");
  sub->add_option("--window", cfg.pipeline.segmentation.window_length, "Epoch length in samples");
  sub->add_option("--step", cfg.pipeline.segmentation.step, "Window step in samples");
  sub->add_option("--filter-order", cfg.pipeline.filter_order, "Butterworth prototype order");
  sub->add_flag("!--no-cache", cfg.use_cache, "Recompute matrices instead of reading the cache");
}

void add_grid_option(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--grid", cfg.threshold_grid, "Binarization thresholds");
}

void add_model_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--measures", cfg.measure_sets, "Measure sets, e.g. cc sc ec all or cc,ec");
  sub->add_option("--classifiers", cfg.classifiers, "rf and/or knn");
  sub->add_option("--trees", cfg.forest.trees, "Random forest size");
  sub->add_option("--max-features", cfg.forest.max_features, "Features tried per split (0: sqrt)");
  sub->add_option("--k", cfg.knn_k, "Neighbours for kNN");
  sub->add_option("--folds", cfg.folds, "Cross-validation folds");
  sub->add_option("--repeats", cfg.repeats, "Cross-validation repeats");
  sub->add_option("--cv-mode", "Fold unit")
      ->check(CLI::IsMember({"epoch", "subject"}))
      ->each([&cfg](const std::string& v) { cfg.cv_mode = v == "subject" ? CvMode::Subject : CvMode::Epoch; });
}

int apply_thread_env() {
  const char* env = std::getenv("CPTE_NUM_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) return -1;
  omp_set_num_threads(static_cast<int>(n));
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Cross-plot transition entropy connectivity toolkit", "cpte"};
  app.require_subcommand(1);

  SynthConfig synth;
  std::uint64_t synth_seed = 0;
  auto* s = app.add_subcommand("synth", "Generate a synthetic two-group cohort");
  s->add_option_function<std::string>("--group-a", [&](const std::string& v) { synth.cohort.group_a = parse_cohort_group(v); },
                                       "GroupA as SUBJECTS:COUPLING")
      ->required();
  s->add_option_function<std::string>("--group-b", [&](const std::string& v) { synth.cohort.group_b = parse_cohort_group(v); },
                                      "GroupB as SUBJECTS:COUPLING")
      ->required();
  s->add_option("--seed", synth_seed, "Master seed")->required();
  s->add_option("--out", synth.out_dir, "Output directory")->default_val("cohort");
  s->add_option("--channels", synth.cohort.subject.n_channels, "Channels per subject")->check(CLI::Range(2, 4096));
  s->add_option("--samples", synth.cohort.subject.n_samples, "Samples per channel")->check(CLI::PositiveNumber);
  s->add_option("--fs", synth.cohort.subject.sampling_rate_hz, "Sampling rate in Hz")->check(CLI::PositiveNumber);
  s->add_option("--amplitude", synth.cohort.subject.amplitude, "Output scale")->check(CLI::PositiveNumber);

  RunConfig cfg;
  std::uint64_t seed = 0;
  std::string unit = "epoch";

  auto* c = app.add_subcommand("cpte", "Per-epoch CPTE matrices and group means");
  add_run_options(c, cfg, seed);

  auto* d = app.add_subcommand("density", "Connectivity density versus threshold");
  add_run_options(d, cfg, seed);
  add_grid_option(d, cfg);

  auto* w = app.add_subcommand("sweep", "Cross-validated accuracy across thresholds");
  add_run_options(w, cfg, seed);
  add_grid_option(w, cfg);
  add_model_options(w, cfg);

  auto* k = app.add_subcommand("classify", "Cross-validated classification at one threshold");
  add_run_options(k, cfg, seed);
  add_model_options(k, cfg);
  k->add_option("--th", cfg.threshold, "Binarization threshold");
  k->add_flag("--shuffle-labels", cfg.shuffle_labels, "Permute labels before cross-validation (control)");

  auto* t = app.add_subcommand("stats", "Group medians and Welch t-tests per measure and band");
  add_run_options(t, cfg, seed);
  t->add_option("--th", cfg.threshold, "Binarization threshold");
  t->add_option("--unit", unit, "Sample unit")->check(CLI::IsMember({"epoch", "subject"}));

  // Sweeps default to the single all-measure random forest curve.
  w->preparse_callback([&cfg](std::size_t) {
    cfg.measure_sets = {"all"};
    cfg.classifiers = {"rf"};
  });

  std::string command = "cpte";
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    for (const CLI::App* sub : app.get_subcommands()) command = sub->get_name();
    print_error(command, "usage", e.what());
    return 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  command = chosen->get_name();
  if (apply_thread_env() != 0) {
    print_error(command, "usage", "CPTE_NUM_THREADS must be a positive integer");
    return 2;
  }

  try {
    fs::path out;
    if (chosen == s) {
      synth.seed = synth_seed;
      out = cmd_synth(synth);
    } else {
      cfg.command = command;
      cfg.seed = seed;
      cfg.stats_unit = unit == "subject" ? SummaryUnit::SubjectMean : SummaryUnit::Epoch;
      if (chosen == c) out = cmd_cpte(cfg);
      else if (chosen == d) out = cmd_density(cfg);
      else if (chosen == w) out = cmd_sweep(cfg);
      else if (chosen == k) out = cmd_classify(cfg);
      else out = cmd_stats(cfg);
    }
    std::cout << out.string() << std::endl;
  } catch (const Error& e) {
    print_error(command, e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(command, "internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace cpte::cli
