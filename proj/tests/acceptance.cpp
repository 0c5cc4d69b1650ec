// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Exits nonzero when any criterion fails. The heavy criteria drive their
// corpora with every available core; results are identical at any worker
// count.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "metasel/metalearn.hpp"
#include "metasel/model_io.hpp"
#include "metasel/modelzoo.hpp"
#include "metasel/parallel.hpp"
#include "metasel/synthgen.hpp"
#include "oracles.hpp"

using namespace metasel;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
  void note(const std::string& text) {
    if (ok) detail = text;
  }
};

fs::path scratch_root() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "metasel_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Dataset from_arrays(Matrix x, std::vector<int> y, int c) {
  Dataset ds;
  ds.features = std::move(x);
  ds.target = std::move(y);
  ds.class_count = c;
  ds.feature_names.resize(ds.d());
  for (std::size_t f = 0; f < ds.d(); ++f)
    ds.feature_names[f] = "f" + std::to_string(f);
  for (int l = 0; l < c; ++l) ds.class_labels.push_back(std::to_string(l));
  return ds;
}

GenSpec easy_two_class_spec(std::uint64_t seed, int class_sep) {
  GenSpec spec;
  spec.n_samples = 800;
  spec.n_classes = 2;
  spec.n_features = 10;
  spec.n_informative = 3;
  spec.n_redundant = 2;
  spec.n_repeated = 1;
  spec.n_clusters_per_class = 1;
  spec.weights = {0.5, 0.5};
  spec.flip_y = 0.01;
  spec.hypercube = true;
  spec.class_sep = class_sep;
  spec.seed = seed;
  return spec;
}

/// Meta-dataset whose labels are a deterministic one-hot function of the
/// first meta-feature: label 1 below 0.5, label 17 above, with a margin
/// band around the boundary so the dependence is unambiguous. Features 1
/// and 2 are pure noise, feature 3 is constant, the rest are zero (also
/// constant).
MetaDataset driven_meta(std::size_t n, std::uint64_t seed) {
  MetaDataset md;
  md.feature_schema.assign(meta_feature_names().begin(),
                           meta_feature_names().end());
  md.label_schema = desk_grid().models;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    MetaInstance inst;
    inst.dataset_id = "driven_" + std::to_string(i);
    inst.labels.bits.assign(24, 0);
    inst.labels.accuracies.assign(24, 0.5);
    const double offset = 0.08 + 0.42 * rng.uniform();
    const bool low = rng.bernoulli(0.5);
    const double u = low ? 0.5 - offset : 0.5 + offset;
    inst.features[0] = u;
    inst.features[1] = rng.normal();
    inst.features[2] = rng.normal();
    inst.features[3] = 7.5;
    const std::size_t winner = low ? 1 : 17;
    inst.labels.bits[winner] = 1;
    inst.labels.accuracies[winner] = 0.9;
    md.instances.push_back(std::move(inst));
  }
  return md;
}

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

// ---------------------------------------------------------------------------

Check criterion_formula_oracles() {
  Check check;
  const auto start = Clock::now();
  Rng rng(0xACCE01);
  const double tol = 1e-9;

  for (int trial = 0; trial < 120 && check.ok; ++trial) {
    const int c = 2 + static_cast<int>(rng.index(3));
    const std::size_t n = 4 + rng.index(17);  // up to 20
    const std::size_t d = 1 + rng.index(5);

    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = static_cast<int>(i < 2 ? i % 2 : rng.index(c));

    check.require(std::abs(class_entropy(y, c) - oracles::entropy_bits(y, c)) <= tol,
                  "class_entropy deviates from the brute-force oracle");

    const auto dist = class_distribution_stats(y, c);
    const auto dist_oracle = oracles::class_distribution(y, c);
    check.require(std::abs(dist.min - dist_oracle.min) <= tol &&
                      std::abs(dist.max - dist_oracle.max) <= tol &&
                      std::abs(dist.mean - dist_oracle.mean) <= tol &&
                      std::abs(dist.std - dist_oracle.std) <= tol,
                  "class_distribution_stats deviates from the oracle");

    check.require(std::abs(dispersion(y, c) - oracles::dispersion(y, c)) <= tol,
                  "dispersion deviates from the oracle");

    std::vector<double> values(n);
    for (double& v : values)
      v = rng.bernoulli(0.2) ? 0.0 : rng.uniform(-3.0, 3.0);
    const SignedStats ss = signed_stats(values);
    const auto ss_oracle = oracles::signed_split(values);
    check.require(std::abs(ss.neg_extreme - ss_oracle.neg_extreme) <= tol &&
                      std::abs(ss.neg_mean - ss_oracle.neg_mean) <= tol &&
                      std::abs(ss.neg_std - ss_oracle.neg_std) <= tol &&
                      std::abs(ss.pos_extreme - ss_oracle.pos_extreme) <= tol &&
                      std::abs(ss.pos_mean - ss_oracle.pos_mean) <= tol &&
                      std::abs(ss.pos_std - ss_oracle.pos_std) <= tol,
                  "signed_stats deviates from the oracle");

    Matrix x(n, d);
    for (double& v : x.data) v = rng.uniform(-2.0, 2.0);
    const SignedStats cov = covariance_signed(x);
    const auto cov_oracle = oracles::signed_split(oracles::pairwise_covariances(x));
    check.require(std::abs(cov.neg_extreme - cov_oracle.neg_extreme) <= tol &&
                      std::abs(cov.pos_extreme - cov_oracle.pos_extreme) <= tol &&
                      std::abs(cov.pos_mean - cov_oracle.pos_mean) <= tol &&
                      std::abs(cov.neg_mean - cov_oracle.neg_mean) <= tol &&
                      std::abs(cov.pos_std - cov_oracle.pos_std) <= tol &&
                      std::abs(cov.neg_std - cov_oracle.neg_std) <= tol,
                  "covariance_signed deviates from the oracle");

    // exact arithmetic of the MI-derived ratios, on synthetic MI values
    std::vector<double> mi(d);
    for (double& v : mi) v = rng.uniform(0.0, 1.5);
    const double entropy = oracles::entropy_bits(y, c);
    if (entropy > 0.0) {
      const double q = n_equiv_features(entropy, mi);
      const double q_oracle = entropy / std::max(oracles::mean(mi), 1e-12);
      check.require(std::abs(q - q_oracle) <= tol,
                    "n_equiv_features deviates from the oracle");
      const auto u = uncertainty_stats(entropy, mi);
      std::vector<double> u_vals(d);
      for (std::size_t f = 0; f < d; ++f)
        u_vals[f] = std::clamp(mi[f] / entropy, 0.0, 1.05);
      check.require(
          std::abs(u.min - *std::min_element(u_vals.begin(), u_vals.end())) <= tol &&
              std::abs(u.max - *std::max_element(u_vals.begin(), u_vals.end())) <= tol &&
              std::abs(u.mean - oracles::mean(u_vals)) <= tol &&
              std::abs(u.std - oracles::pop_std(u_vals)) <= tol,
          "uncertainty_stats deviates from the oracle");
    }

    // evaluation metrics
    const std::size_t p = 2 + rng.index(7);
    Matrix scores(n, p);
    for (double& v : scores.data) v = rng.uniform();
    BitMatrix truth(n, std::vector<std::uint8_t>(p, 0));
    BitMatrix pred(n, std::vector<std::uint8_t>(p, 0));
    for (std::size_t i = 0; i < n; ++i) {
      truth[i][rng.index(p)] = 1;  // at least one positive
      for (std::size_t j = 0; j < p; ++j) {
        if (rng.bernoulli(0.3)) truth[i][j] = 1;
        pred[i][j] = rng.bernoulli(0.4) ? 1 : 0;
      }
    }
    check.require(
        std::abs(hit_rate(scores, truth) - oracles::hit_rate(scores, truth)) <= tol,
        "hit_rate deviates from the oracle");
    const EvalMetrics m = multilabel_metrics(pred, truth);
    const auto m_oracle = oracles::macro_metrics(pred, truth);
    check.require(std::abs(m.hamming_loss - m_oracle.hamming) <= tol &&
                      std::abs(m.macro_precision - m_oracle.precision) <= tol &&
                      std::abs(m.macro_recall - m_oracle.recall) <= tol &&
                      std::abs(m.macro_specificity - m_oracle.specificity) <= tol &&
                      std::abs(m.macro_f1 - m_oracle.f1) <= tol,
                  "multilabel metrics deviate from the oracle");
  }

  // MI-based features against the large-sample histogram oracle
  if (check.ok) {
    const std::size_t n = 5000;
    Rng gen(0xACCE02);
    for (double sigma : {0.1, 0.3}) {
      Matrix x(n, 2);
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 2);
        x.at(i, 0) = static_cast<double>(y[i]) + sigma * gen.normal();
        x.at(i, 1) = static_cast<double>(y[i]) + sigma * gen.normal();
      }
      const Dataset ds = from_arrays(x, y, 2);
      const auto mi = mutual_info_per_feature(ds, 3, 0xACCE03);
      std::vector<double> hist(2);
      for (std::size_t f = 0; f < 2; ++f) {
        hist[f] = oracles::histogram_mi(x.column(f), y, 2);
        check.require(std::abs(mi[f] - hist[f]) <= 0.1,
                      "kNN MI deviates from the histogram oracle by > 0.1");
      }
      const double entropy = class_entropy(ds.target, 2);
      const double q = n_equiv_features(entropy, mi);
      const double q_oracle =
          entropy / std::max(oracles::mean(hist), 1e-12);
      check.require(std::abs(q - q_oracle) <= 0.1,
                    "n_equiv_features deviates from the histogram oracle");
      const auto u = uncertainty_stats(entropy, mi);
      std::vector<double> u_oracle(2);
      for (std::size_t f = 0; f < 2; ++f)
        u_oracle[f] = std::clamp(hist[f] / entropy, 0.0, 1.05);
      check.require(
          std::abs(u.max - *std::max_element(u_oracle.begin(), u_oracle.end())) <= 0.1 &&
              std::abs(u.mean - oracles::mean(u_oracle)) <= 0.1,
          "uncertainty_stats deviates from the histogram oracle");
    }
    // an independent feature must carry next to nothing
    Matrix x(n, 1);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % 2);
      x.at(i, 0) = gen.normal();
    }
    const Dataset ds = from_arrays(x, y, 2);
    const auto mi = mutual_info_per_feature(ds, 3, 0xACCE04);
    check.require(std::abs(mi[0] - oracles::histogram_mi(x.column(0), y, 2)) <= 0.1,
                  "independent-feature MI deviates from the histogram oracle");
  }

  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  check.require(seconds < 120.0, "runtime exceeded 2 minutes");
  if (check.ok) {
    std::ostringstream os;
    os << "120 random instances + 5 large-sample MI comparisons in "
       << static_cast<int>(seconds) << "s";
    check.note(os.str());
  }
  return check;
}

Check criterion_metafeature_fuzz() {
  Check check;
  const auto start = Clock::now();
  const int fpc_index = MetaFeatureVector::index_of("fuzzy_part_coeff");
  const std::array<int, 4> landmark_index = {
      MetaFeatureVector::index_of("1nn_mean_acc"),
      MetaFeatureVector::index_of("lda_mean_acc"),
      MetaFeatureVector::index_of("nb_mean_acc"),
      MetaFeatureVector::index_of("dt_mean_acc")};

  std::vector<std::string> failures(100);
  parallel_for(100, hardware_jobs(), [&](std::size_t i) {
    const std::uint64_t seed = 2000 + i;
    try {
      const GenSpec spec = sample_spec(seed, GenProfile::kDesk);
      const Dataset ds = generate(spec);
      const MetaFeatureVector v = extract_all(ds, seed);
      for (std::size_t f = 0; f < kMetaFeatureCount; ++f)
        if (!std::isfinite(v[f])) {
          failures[i] = "non-finite " + meta_feature_names()[f];
          return;
        }
      const double fpc = v[static_cast<std::size_t>(fpc_index)];
      if (fpc < 1.0 / ds.class_count - 1e-9 || fpc > 1.0 + 1e-9) {
        failures[i] = "fuzzy_part_coeff out of [1/c, 1]";
        return;
      }
      for (int idx : landmark_index) {
        const double acc = v[static_cast<std::size_t>(idx)];
        if (acc < 0.0 || acc > 1.0) {
          failures[i] = "landmark accuracy outside [0,1]";
          return;
        }
      }
    } catch (const std::exception& e) {
      failures[i] = std::string("extract_all failed: ") + e.what();
    }
  });
  for (std::size_t i = 0; i < failures.size(); ++i)
    check.require(failures[i].empty(),
                  "seed " + std::to_string(2000 + i) + ": " + failures[i]);

  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  check.require(seconds < 600.0, "runtime exceeded 10 minutes");
  if (check.ok) {
    std::ostringstream os;
    os << "100 desk datasets, 62 finite features each, in "
       << static_cast<int>(seconds) << "s";
    check.note(os.str());
  }
  return check;
}

Check criterion_labeling_invariants() {
  Check check;
  const auto start = Clock::now();
  const ModelGrid grid = desk_grid();
  std::vector<std::string> failures(50);
  parallel_for(50, hardware_jobs(), [&](std::size_t i) {
    const std::uint64_t seed = 3000 + i;
    try {
      const GenSpec spec = sample_spec(seed, GenProfile::kDesk);
      const Dataset ds = generate(spec);
      const LabelVector lv = label_dataset(ds, grid, 0.01, seed, 1);
      int positives = 0;
      for (std::uint8_t b : lv.bits) positives += b;
      if (positives < 1) {
        failures[i] = "no positive label";
        return;
      }
      std::size_t arg = 0;
      for (std::size_t j = 1; j < lv.accuracies.size(); ++j)
        if (lv.accuracies[j] > lv.accuracies[arg]) arg = j;
      if (!lv.bits[arg]) {
        failures[i] = "best model not positive";
        return;
      }
      const double thresholds[4] = {0.005, 0.01, 0.02, 0.05};
      for (int t = 0; t + 1 < 4; ++t) {
        const LabelVector narrow = make_label_vector(lv.accuracies, thresholds[t]);
        const LabelVector wide = make_label_vector(lv.accuracies, thresholds[t + 1]);
        for (std::size_t j = 0; j < narrow.bits.size(); ++j)
          if (narrow.bits[j] && !wide.bits[j]) {
            failures[i] = "threshold monotonicity violated";
            return;
          }
      }
    } catch (const std::exception& e) {
      failures[i] = std::string("labeling failed: ") + e.what();
    }
  });
  for (std::size_t i = 0; i < failures.size(); ++i)
    check.require(failures[i].empty(),
                  "seed " + std::to_string(3000 + i) + ": " + failures[i]);

  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  check.require(seconds < 1200.0, "runtime exceeded 20 minutes");
  if (check.ok) {
    std::ostringstream os;
    os << "50 desk datasets x 24 models in " << static_cast<int>(seconds)
       << "s";
    check.note(os.str());
  }
  return check;
}

Check criterion_generator_fidelity() {
  Check check;

  // high separation is easy for 1NN
  for (std::uint64_t seed = 0; seed < 5 && check.ok; ++seed) {
    const Dataset ds = generate(easy_two_class_spec(6000 + seed, 5));
    const double acc = cross_val_accuracy(LearnerSpec::one_nn(), ds, 5, seed);
    check.require(acc >= 0.95,
                  "1NN accuracy " + format_double(acc) +
                      " below 0.95 at class_sep 5 (seed " +
                      std::to_string(6000 + seed) + ")");
  }

  // paired-seed separability monotonicity
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GenSpec spec = sample_spec(6100 + seed, GenProfile::kDesk);
    spec.n_samples = 800;
    GenSpec wide = spec;
    wide.class_sep = 5;
    GenSpec tight = spec;
    tight.class_sep = 1;
    const double acc_wide =
        cross_val_accuracy(LearnerSpec::one_nn(), generate(wide), 5, seed);
    const double acc_tight =
        cross_val_accuracy(LearnerSpec::one_nn(), generate(tight), 5, seed);
    if (acc_wide >= acc_tight) ++monotone;
  }
  check.require(monotone >= 18,
                "separability monotonicity held on only " +
                    std::to_string(monotone) + "/20 seed pairs");

  // bit-exact regeneration
  for (std::uint64_t seed = 0; seed < 5 && check.ok; ++seed) {
    const GenSpec spec = sample_spec(6200 + seed, GenProfile::kDesk);
    const Dataset a = generate(spec);
    const Dataset b = generate(spec);
    check.require(a.features.data == b.features.data && a.target == b.target,
                  "regeneration from the same seed is not bit-exact");
  }

  if (check.ok) {
    check.note("sep-5 accuracy >= 0.95 on 5 seeds; monotonicity " +
               std::to_string(monotone) + "/20; regeneration bit-exact");
  }
  return check;
}

Check criterion_metalearning_sanity() {
  Check check;
  const auto start = Clock::now();

  const fs::path corpus_dir = scratch_root() / "c5corpus";
  generate_corpus(300, 777, corpus_dir.string(), GenProfile::kDesk,
                  hardware_jobs());
  const CorpusManifest manifest =
      read_manifest((corpus_dir / "manifest.csv").string());
  BuildReport report;
  const MetaDataset md = build_meta_dataset(manifest, desk_grid(), 0.01, 99,
                                            &report, hardware_jobs());
  check.require(report.skipped == 0, "corpus builds must not skip datasets");
  check.require(md.size() == 300, "expected 300 meta-instances");

  double baseline = 0.0;
  for (const auto& inst : md.instances) {
    int positives = 0;
    for (std::uint8_t b : inst.labels.bits) positives += b;
    baseline += static_cast<double>(positives) / 24.0;
  }
  baseline /= static_cast<double>(md.size());

  MetaLearnerConfig config;
  config.kind = MetaLearnerKind::kMlknn;
  const EvalReport ev = cross_validate_meta(md, config, 5, 7);
  check.require(ev.averaged.hit_rate >= baseline + 0.10,
                "MLkNN hit rate " + format_double(ev.averaged.hit_rate) +
                    " does not beat the baseline " + format_double(baseline) +
                    " by 0.10");

  // constructed meta-dataset: labels decided by one meta-feature
  const MetaDataset driven = driven_meta(300, 0xD21);
  for (MetaLearnerKind kind : {MetaLearnerKind::kMlknn,
                               MetaLearnerKind::kBirel,
                               MetaLearnerKind::kRakel}) {
    MetaLearnerConfig cfg;
    cfg.kind = kind;
    const EvalReport driven_ev = cross_validate_meta(driven, cfg, 5, 3);
    check.require(driven_ev.averaged.hit_rate >= 0.9,
                  std::string(to_string(kind)) + " hit rate " +
                      format_double(driven_ev.averaged.hit_rate) +
                      " below 0.9 on the constructed meta-dataset");
  }

  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  check.require(seconds < 1800.0, "runtime exceeded 30 minutes");
  if (check.ok) {
    std::ostringstream os;
    os << "MLkNN hit " << ev.averaged.hit_rate << " vs baseline " << baseline
       << " on 300 datasets; constructed meta-dataset >= 0.9 for all three; "
       << static_cast<int>(seconds) << "s";
    check.note(os.str());
  }
  return check;
}

Check criterion_label_rule_example() {
  Check check;
  // 18 configurations, best 0.96, six more within one percentage point
  const std::vector<double> accuracies = {
      0.96, 0.955, 0.953, 0.952, 0.951, 0.950, 0.950, 0.94, 0.93,
      0.92, 0.91,  0.90,  0.89,  0.88,  0.87,  0.86,  0.85, 0.84};
  const LabelVector lv = make_label_vector(accuracies, 0.01);
  int positives = 0;
  for (std::uint8_t b : lv.bits) positives += b;
  check.require(positives == 7, "expected exactly 7 positive labels, got " +
                                    std::to_string(positives));
  check.require(static_cast<int>(lv.bits.size()) - positives == 11,
                "expected exactly 11 negative labels");
  for (int i = 0; i < 7; ++i)
    check.require(lv.bits[static_cast<std::size_t>(i)] == 1,
                  "a near-best configuration was not labeled positive");
  check.note("18-configuration grid labels 7 positive / 11 negative");
  return check;
}

Check criterion_importance_sanity() {
  Check check;
  const MetaDataset driven = driven_meta(300, 0xD21);
  const MetaLearnerModel model =
      fit_binary_relevance(driven, Criterion::kGini, MaxFeatures::kAll, 5);
  const ImportanceReport report = permutation_importance(model, driven, 10, 7);
  check.require(report.ranking.front().feature == meta_feature_names()[0],
                "top-ranked feature is " + report.ranking.front().feature +
                    ", expected " + meta_feature_names()[0]);
  for (const auto& entry : report.ranking) {
    const int idx = MetaFeatureVector::index_of(entry.feature);
    if (idx >= 3) {  // everything past the driver and the two noise columns
      check.require(entry.mean_drop == 0.0 && entry.std_drop == 0.0,
                    "constant feature " + entry.feature +
                        " has a nonzero permutation drop");
    }
  }
  if (check.ok)
    check.note("driver ranked first (mean drop " +
               format_double(report.ranking.front().mean_drop) +
               "); all 59 constant features drop exactly 0");
  return check;
}

Check criterion_end_to_end_determinism() {
  Check check;
  const char* cli = std::getenv("METASEL_CLI");
  check.require(cli != nullptr, "METASEL_CLI is not set");
  if (!check.ok) return check;

  const int jobs[2] = {hardware_jobs(), 1};
  std::array<std::string, 2> meta_bytes;
  std::array<std::string, 2> report_bytes;
  for (int run = 0; run < 2 && check.ok; ++run) {
    const fs::path dir = scratch_root() / ("e2e_run" + std::to_string(run));
    fs::create_directories(dir);
    const std::string corpus = (dir / "corpus").string();
    const std::string meta = (dir / "meta.csv").string();
    const std::string report = (dir / "report.json").string();
    const std::string model = (dir / "model.bin").string();
    const std::string jobs_arg = " --jobs " + std::to_string(jobs[run]);

    std::string cmd = std::string(cli) + " generate --count 50 --seed 909" +
                      " --profile desk --out " + corpus + jobs_arg;
    check.require(run_command(cmd) == 0, "generate failed");
    if (!check.ok) break;
    cmd = std::string(cli) + " build --manifest " + corpus +
          "/manifest.csv --threshold 0.01 --seed 303 --out " + meta + jobs_arg;
    check.require(run_command(cmd) == 0, "build failed");
    if (!check.ok) break;
    cmd = std::string(cli) + " train --meta " + meta +
          " --learner mlknn --folds 5 --seed 11 --report " + report +
          " --model " + model;
    check.require(run_command(cmd) == 0, "train failed");
    if (!check.ok) break;

    meta_bytes[static_cast<std::size_t>(run)] = read_bytes(meta);
    report_bytes[static_cast<std::size_t>(run)] = read_bytes(report);
    check.require(!meta_bytes[static_cast<std::size_t>(run)].empty(),
                  "meta-dataset file is empty");
  }
  if (check.ok) {
    check.require(meta_bytes[0] == meta_bytes[1],
                  "meta-dataset CSVs differ between identical runs");
    check.require(report_bytes[0] == report_bytes[1],
                  "report JSONs differ between identical runs");
  }
  if (check.ok)
    check.note("generate(50) -> build -> train twice: meta.csv and "
               "report.json byte-identical (jobs " +
               std::to_string(jobs[0]) + " vs 1)");
  return check;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria = {
      {"formula-oracles", criterion_formula_oracles},
      {"metafeature-fuzz", criterion_metafeature_fuzz},
      {"labeling-invariants", criterion_labeling_invariants},
      {"generator-fidelity", criterion_generator_fidelity},
      {"metalearning-sanity", criterion_metalearning_sanity},
      {"label-rule-example", criterion_label_rule_example},
      {"importance-sanity", criterion_importance_sanity},
      {"end-to-end-determinism", criterion_end_to_end_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = Clock::now();
    Check result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("%s  %-24s (%.1fs)  %s\n", result.ok ? "PASS" : "FAIL",
                criterion.name, seconds, result.detail.c_str());
    std::fflush(stdout);
    if (!result.ok) ++failures;
  }
  if (failures > 0)
    std::printf("%d of %zu acceptance criteria failed\n", failures,
                criteria.size());
  else
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return failures == 0 ? 0 : 1;
}
