#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "metasel/matrix.hpp"
#include "metasel/metafeatures.hpp"
#include "metasel/metrics.hpp"
#include "metasel/modelzoo.hpp"
#include "metasel/rng.hpp"
#include "metasel/tree.hpp"
#include "metasel/weak.hpp"

namespace metasel {

enum class MetaLearnerKind { kMlknn, kBirel, kRakel };

inline const char* to_string(MetaLearnerKind k) {
  switch (k) {
    case MetaLearnerKind::kMlknn: return "mlknn";
    case MetaLearnerKind::kBirel: return "birel";
    default: return "rakel";
  }
}
inline MetaLearnerKind meta_learner_from_string(const std::string& s) {
  if (s == "mlknn") return MetaLearnerKind::kMlknn;
  if (s == "birel") return MetaLearnerKind::kBirel;
  if (s == "rakel") return MetaLearnerKind::kRakel;
  throw Error("unknown meta-learner: " + s);
}

namespace detail {

inline Matrix meta_feature_matrix(const MetaDataset& md) {
  Matrix x(md.size(), kMetaFeatureCount);
  for (std::size_t i = 0; i < md.size(); ++i)
    for (std::size_t f = 0; f < kMetaFeatureCount; ++f)
      x.at(i, f) = md.instances[i].features[f];
  return x;
}

inline BitMatrix label_bits(const MetaDataset& md) {
  BitMatrix bits(md.size());
  for (std::size_t i = 0; i < md.size(); ++i)
    bits[i] = md.instances[i].labels.bits;
  return bits;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fitted learner states

struct MlknnState {
  int k = 0;
  double smoothing = 1.0;
  Matrix train_x;    // standardized meta-features
  BitMatrix train_y;
  std::vector<double> prior_pos;  // P(H_j)
  Matrix cond_pos;   // p x (k+1): P(E_m | H_j)
  Matrix cond_neg;   // p x (k+1): P(E_m | not H_j)
};

struct BirelState {
  std::vector<TreeModel> trees;  // one per label
};

struct RakelState {
  std::vector<std::vector<std::size_t>> subsets;       // member -> label ids
  std::vector<std::vector<std::uint32_t>> patterns;    // member -> class id -> bits
  std::vector<TreeModel> trees;                        // member powerset trees
};

/// A fitted multilabel meta-learner with its schemas and the feature
/// standardization baked in. predict_scores always returns one score per
/// label of the label schema.
struct MetaLearnerModel {
  MetaLearnerKind kind = MetaLearnerKind::kMlknn;
  std::vector<std::string> feature_schema;
  std::vector<ModelId> label_schema;
  Standardizer standardizer;

  MlknnState mlknn;
  BirelState birel;
  RakelState rakel;

  std::size_t label_count() const { return label_schema.size(); }

  std::vector<double> predict_scores(std::span<const double> raw) const {
    const std::vector<double> x = standardizer.apply_row(raw);
    switch (kind) {
      case MetaLearnerKind::kMlknn: return scores_mlknn(x);
      case MetaLearnerKind::kBirel: return scores_birel(x);
      default: return scores_rakel(x);
    }
  }

  Matrix predict_scores(const Matrix& raw) const {
    Matrix out(raw.rows, label_count());
    for (std::size_t i = 0; i < raw.rows; ++i) {
      const auto s = predict_scores(raw.row(i));
      std::copy(s.begin(), s.end(), out.row(i).begin());
    }
    return out;
  }

 private:
  std::vector<double> scores_mlknn(std::span<const double> x) const {
    const std::size_t p = label_count();
    std::vector<double> out(p);
    const auto neighbors = detail::nearest_rows(
        mlknn.train_x, x, static_cast<std::size_t>(mlknn.k));
    for (std::size_t j = 0; j < p; ++j) {
      std::size_t count = 0;
      for (std::size_t i : neighbors)
        if (mlknn.train_y[i][j]) ++count;
      const double pos = mlknn.prior_pos[j] * mlknn.cond_pos.at(j, count);
      const double neg =
          (1.0 - mlknn.prior_pos[j]) * mlknn.cond_neg.at(j, count);
      out[j] = pos / (pos + neg);
    }
    return out;
  }

  std::vector<double> scores_birel(std::span<const double> x) const {
    const std::size_t p = label_count();
    std::vector<double> out(p);
    for (std::size_t j = 0; j < p; ++j)
      out[j] = birel.trees[j].leaf_for(x).class_fraction[1];
    return out;
  }

  std::vector<double> scores_rakel(std::span<const double> x) const {
    const std::size_t p = label_count();
    std::vector<double> votes(p, 0.0), members(p, 0.0);
    for (std::size_t m = 0; m < rakel.trees.size(); ++m) {
      const int cls = rakel.trees[m].predict(x);
      const std::uint32_t bits =
          rakel.patterns[m][static_cast<std::size_t>(cls)];
      const auto& subset = rakel.subsets[m];
      for (std::size_t s = 0; s < subset.size(); ++s) {
        members[subset[s]] += 1.0;
        if ((bits >> s) & 1) votes[subset[s]] += 1.0;
      }
    }
    std::vector<double> out(p, 0.0);
    for (std::size_t j = 0; j < p; ++j)
      if (members[j] > 0.0) out[j] = votes[j] / members[j];
    return out;
  }
};

// ---------------------------------------------------------------------------
// Fitting

/// Multi-label kNN with Laplace-smoothed label priors and
/// neighbourhood-count conditionals.
inline MetaLearnerModel fit_mlknn(const MetaDataset& md, int k,
                                  double smoothing = 1.0) {
  const std::size_t n = md.size();
  if (k < 1) throw Error("fit_mlknn: k must be positive");
  if (static_cast<std::size_t>(k) >= n)
    throw Error("fit_mlknn: k must be smaller than the instance count");

  MetaLearnerModel model;
  model.kind = MetaLearnerKind::kMlknn;
  model.feature_schema = md.feature_schema;
  model.label_schema = md.label_schema;
  const Matrix raw = detail::meta_feature_matrix(md);
  model.standardizer = Standardizer::fit(raw);

  MlknnState& st = model.mlknn;
  st.k = k;
  st.smoothing = smoothing;
  st.train_x = model.standardizer.apply(raw);
  st.train_y = detail::label_bits(md);

  const std::size_t p = md.label_count();
  const double s = smoothing;
  st.prior_pos.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (st.train_y[i][j]) ++pos;
    st.prior_pos[j] =
        (s + static_cast<double>(pos)) / (2.0 * s + static_cast<double>(n));
  }

  // membership counts within each instance's own neighbourhood
  Matrix count_pos(p, static_cast<std::size_t>(k) + 1);
  Matrix count_neg(p, static_cast<std::size_t>(k) + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto neighbors =
        detail::nearest_rows(st.train_x, st.train_x.row(i),
                             static_cast<std::size_t>(k),
                             static_cast<std::ptrdiff_t>(i));
    for (std::size_t j = 0; j < p; ++j) {
      std::size_t c = 0;
      for (std::size_t a : neighbors)
        if (st.train_y[a][j]) ++c;
      if (st.train_y[i][j]) count_pos.at(j, c) += 1.0;
      else count_neg.at(j, c) += 1.0;
    }
  }
  st.cond_pos = Matrix(p, static_cast<std::size_t>(k) + 1);
  st.cond_neg = Matrix(p, static_cast<std::size_t>(k) + 1);
  for (std::size_t j = 0; j < p; ++j) {
    double total_pos = 0.0, total_neg = 0.0;
    for (int m = 0; m <= k; ++m) {
      total_pos += count_pos.at(j, static_cast<std::size_t>(m));
      total_neg += count_neg.at(j, static_cast<std::size_t>(m));
    }
    for (int m = 0; m <= k; ++m) {
      st.cond_pos.at(j, static_cast<std::size_t>(m)) =
          (s + count_pos.at(j, static_cast<std::size_t>(m))) /
          (s * static_cast<double>(k + 1) + total_pos);
      st.cond_neg.at(j, static_cast<std::size_t>(m)) =
          (s + count_neg.at(j, static_cast<std::size_t>(m))) /
          (s * static_cast<double>(k + 1) + total_neg);
    }
  }
  return model;
}

/// Binary relevance: one decision tree per label, scored by the positive
/// fraction in the reached leaf.
inline MetaLearnerModel fit_binary_relevance(const MetaDataset& md,
                                             Criterion criterion,
                                             MaxFeatures max_features,
                                             std::uint64_t seed) {
  MetaLearnerModel model;
  model.kind = MetaLearnerKind::kBirel;
  model.feature_schema = md.feature_schema;
  model.label_schema = md.label_schema;
  const Matrix raw = detail::meta_feature_matrix(md);
  model.standardizer = Standardizer::fit(raw);
  const Matrix x = model.standardizer.apply(raw);

  const std::size_t p = md.label_count();
  std::vector<int> y(md.size());
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < md.size(); ++i)
      y[i] = md.instances[i].labels.bits[j] ? 1 : 0;
    const TreeConfig cfg{criterion, max_features, mix_seed(seed, j)};
    model.birel.trees.push_back(fit_tree(x, y, 2, cfg));
  }
  return model;
}

/// Random k-labelsets: label-powerset decision trees over random label
/// subsets. Sampling retries until every label is covered by at least one
/// member; a per-member patch pass guarantees termination.
inline MetaLearnerModel fit_rakel(const MetaDataset& md, int subset_size,
                                  int model_count, Criterion criterion,
                                  MaxFeatures max_features,
                                  std::uint64_t seed) {
  const std::size_t p = md.label_count();
  if (subset_size < 1 || static_cast<std::size_t>(subset_size) > p)
    throw Error("fit_rakel: subset size must lie in [1, label count]");
  if (model_count <= 0)
    model_count = static_cast<int>((2 * p + static_cast<std::size_t>(subset_size) - 1) /
                                   static_cast<std::size_t>(subset_size));

  MetaLearnerModel model;
  model.kind = MetaLearnerKind::kRakel;
  model.feature_schema = md.feature_schema;
  model.label_schema = md.label_schema;
  const Matrix raw = detail::meta_feature_matrix(md);
  model.standardizer = Standardizer::fit(raw);
  const Matrix x = model.standardizer.apply(raw);

  Rng rng(mix_seed(seed, 0x4a6b));
  RakelState& st = model.rakel;
  const std::size_t k = static_cast<std::size_t>(subset_size);
  auto draw_subsets = [&] {
    st.subsets.clear();
    for (int m = 0; m < model_count; ++m) {
      auto subset = rng.sample_without_replacement(p, k);
      std::sort(subset.begin(), subset.end());
      st.subsets.push_back(std::move(subset));
    }
  };
  auto covered = [&] {
    std::vector<bool> seen(p, false);
    for (const auto& subset : st.subsets)
      for (std::size_t j : subset) seen[j] = true;
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  bool ok = false;
  for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
    draw_subsets();
    ok = covered();
  }
  if (!ok) {
    // deterministic patch: rewrite members over the uncovered labels
    std::vector<std::size_t> uncovered;
    std::vector<bool> seen(p, false);
    for (const auto& subset : st.subsets)
      for (std::size_t j : subset) seen[j] = true;
    for (std::size_t j = 0; j < p; ++j)
      if (!seen[j]) uncovered.push_back(j);
    std::size_t member = 0;
    while (!uncovered.empty() && member < st.subsets.size()) {
      auto& subset = st.subsets[member++];
      for (std::size_t s = 0; s < subset.size() && !uncovered.empty(); ++s) {
        subset[s] = uncovered.back();
        uncovered.pop_back();
      }
      std::sort(subset.begin(), subset.end());
    }
    if (!uncovered.empty())
      throw Error("fit_rakel: cannot cover all labels with these settings");
  }

  std::vector<int> y(md.size());
  for (const auto& subset : st.subsets) {
    // label powerset over this subset
    std::vector<std::uint32_t> patterns;
    for (std::size_t i = 0; i < md.size(); ++i) {
      std::uint32_t bits = 0;
      for (std::size_t s = 0; s < subset.size(); ++s)
        if (md.instances[i].labels.bits[subset[s]])
          bits |= static_cast<std::uint32_t>(1) << s;
      auto it = std::find(patterns.begin(), patterns.end(), bits);
      if (it == patterns.end()) {
        patterns.push_back(bits);
        y[i] = static_cast<int>(patterns.size()) - 1;
      } else {
        y[i] = static_cast<int>(it - patterns.begin());
      }
    }
    const TreeConfig cfg{criterion, max_features,
                         mix_seed(seed, st.trees.size() + 1)};
    st.trees.push_back(
        fit_tree(x, y, static_cast<int>(patterns.size()), cfg));
    st.patterns.push_back(std::move(patterns));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Cross-validation with nested hyperparameter selection

struct MetaLearnerConfig {
  MetaLearnerKind kind = MetaLearnerKind::kMlknn;
  int rakel_subset_size = 3;
};

struct EvalReport {
  EvalMetrics averaged;
  std::vector<EvalMetrics> per_fold;
  std::vector<std::string> selected_configs;
  int fold_count = 0;
  std::uint64_t seed = 0;
};

namespace detail {

struct Candidate {
  std::string name;
  int mlknn_k = 0;
  Criterion criterion = Criterion::kGini;
  MaxFeatures max_features = MaxFeatures::kSqrt;
};

inline std::vector<Candidate> candidate_configs(MetaLearnerKind kind) {
  std::vector<Candidate> out;
  if (kind == MetaLearnerKind::kMlknn) {
    for (int k : {3, 5, 7, 10})
      out.push_back({"k=" + std::to_string(k), k, Criterion::kGini,
                     MaxFeatures::kSqrt});
    return out;
  }
  for (Criterion crit : {Criterion::kGini, Criterion::kEntropy})
    for (MaxFeatures mf : {MaxFeatures::kSqrt, MaxFeatures::kLog2})
      out.push_back({std::string("criterion=") + to_string(crit) +
                         ",max_features=" + to_string(mf),
                     0, crit, mf});
  return out;
}

inline MetaDataset meta_subset(const MetaDataset& md,
                               std::span<const std::size_t> rows) {
  MetaDataset out;
  out.feature_schema = md.feature_schema;
  out.label_schema = md.label_schema;
  out.instances.reserve(rows.size());
  for (std::size_t r : rows) out.instances.push_back(md.instances[r]);
  return out;
}

inline MetaLearnerModel fit_candidate(const MetaDataset& train,
                                      const MetaLearnerConfig& config,
                                      const Candidate& c, std::uint64_t seed) {
  switch (config.kind) {
    case MetaLearnerKind::kMlknn:
      return fit_mlknn(train, c.mlknn_k);
    case MetaLearnerKind::kBirel:
      return fit_binary_relevance(train, c.criterion, c.max_features, seed);
    default:
      return fit_rakel(train, config.rakel_subset_size, 0, c.criterion,
                       c.max_features, seed);
  }
}

inline double holdout_hit_rate(const MetaLearnerModel& model,
                               const MetaDataset& holdout) {
  const Matrix scores =
      model.predict_scores(meta_feature_matrix(holdout));
  std::vector<LabelVector> truth;
  truth.reserve(holdout.size());
  for (const auto& inst : holdout.instances) truth.push_back(inst.labels);
  return hit_rate(scores, truth);
}

}  // namespace detail

/// Fits one learner with the given hyperparameters on the whole
/// meta-dataset after selecting them by hit rate on an internal 80/20 split.
inline MetaLearnerModel fit_meta_learner(const MetaDataset& md,
                                         const MetaLearnerConfig& config,
                                         std::uint64_t seed,
                                         std::string* chosen = nullptr) {
  if (md.size() < 2)
    throw Error("fit_meta_learner: need at least 2 meta-instances");
  std::vector<std::size_t> order(md.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x99));
  rng.shuffle(order);
  const std::size_t val_n = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(0.2 * static_cast<double>(md.size()))));
  const std::span<const std::size_t> val_rows(order.data(), val_n);
  const std::span<const std::size_t> train_rows(order.data() + val_n,
                                                md.size() - val_n);
  const MetaDataset inner_train = detail::meta_subset(md, train_rows);
  const MetaDataset inner_val = detail::meta_subset(md, val_rows);

  const auto candidates = detail::candidate_configs(config.kind);
  int best = -1;
  double best_score = -1.0;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    try {
      const auto model = detail::fit_candidate(inner_train, config,
                                               candidates[ci],
                                               mix_seed(seed, 0x77, ci));
      const double score = detail::holdout_hit_rate(model, inner_val);
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(ci);
      }
    } catch (const Error&) {
      // infeasible candidate (e.g. k too large for the split); skip
    }
  }
  if (best < 0)
    throw Error("fit_meta_learner: no feasible hyperparameter setting");
  if (chosen) *chosen = candidates[static_cast<std::size_t>(best)].name;
  return detail::fit_candidate(md, config,
                               candidates[static_cast<std::size_t>(best)],
                               mix_seed(seed, 0x88));
}

/// k-fold protocol over meta-instances (plain shuffled partition), with the
/// per-fold hyperparameters picked by hit rate on a nested 80/20 split of
/// the training fold.
inline EvalReport cross_validate_meta(const MetaDataset& md,
                                      const MetaLearnerConfig& config,
                                      int folds, std::uint64_t seed) {
  if (folds < 2) throw Error("cross_validate_meta: need at least 2 folds");
  if (md.size() < static_cast<std::size_t>(folds))
    throw Error("cross_validate_meta: fewer meta-instances than folds");

  std::vector<std::size_t> order(md.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0xf01d));
  rng.shuffle(order);
  std::vector<int> fold_of(md.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));

  EvalReport report;
  report.fold_count = folds;
  report.seed = seed;
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < md.size(); ++i)
      (fold_of[i] == fold ? test_rows : train_rows).push_back(i);
    const MetaDataset train = detail::meta_subset(md, train_rows);
    const MetaDataset test = detail::meta_subset(md, test_rows);

    std::string chosen;
    const MetaLearnerModel model = fit_meta_learner(
        train, config, mix_seed(seed, static_cast<std::uint64_t>(fold)),
        &chosen);

    const Matrix scores =
        model.predict_scores(detail::meta_feature_matrix(test));
    std::vector<LabelVector> truth;
    for (const auto& inst : test.instances) truth.push_back(inst.labels);
    EvalMetrics metrics =
        multilabel_metrics(threshold_scores(scores), detail::label_bits(test));
    metrics.hit_rate = hit_rate(scores, truth);
    report.per_fold.push_back(metrics);
    report.selected_configs.push_back(chosen);
  }

  auto& avg = report.averaged;
  for (const auto& m : report.per_fold) {
    avg.hit_rate += m.hit_rate;
    avg.hamming_loss += m.hamming_loss;
    avg.macro_precision += m.macro_precision;
    avg.macro_recall += m.macro_recall;
    avg.macro_specificity += m.macro_specificity;
    avg.macro_f1 += m.macro_f1;
  }
  const double k = static_cast<double>(folds);
  avg.hit_rate /= k;
  avg.hamming_loss /= k;
  avg.macro_precision /= k;
  avg.macro_recall /= k;
  avg.macro_specificity /= k;
  avg.macro_f1 /= k;
  return report;
}

// ---------------------------------------------------------------------------
// Permutation importance

struct ImportanceEntry {
  std::string feature;
  double mean_drop = 0.0;
  double std_drop = 0.0;
};

struct ImportanceReport {
  double baseline_hit_rate = 0.0;
  int repeats = 0;
  std::vector<ImportanceEntry> ranking;  // mean drop descending
};

/// Hit-rate drop when one meta-feature column is shuffled, averaged over
/// seeded repeats. A constant column shuffles to itself, so its drop is
/// exactly zero.
inline ImportanceReport permutation_importance(const MetaLearnerModel& model,
                                               const MetaDataset& md,
                                               int repeats,
                                               std::uint64_t seed) {
  if (repeats < 1) throw Error("permutation_importance: repeats must be >= 1");
  const Matrix x = detail::meta_feature_matrix(md);
  std::vector<LabelVector> truth;
  truth.reserve(md.size());
  for (const auto& inst : md.instances) truth.push_back(inst.labels);

  ImportanceReport report;
  report.repeats = repeats;
  report.baseline_hit_rate = hit_rate(model.predict_scores(x), truth);

  for (std::size_t f = 0; f < kMetaFeatureCount; ++f) {
    std::vector<double> drops;
    drops.reserve(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
      Matrix shuffled = x;
      std::vector<double> column = x.column(f);
      Rng rng(mix_seed(seed, f, static_cast<std::uint64_t>(r)));
      rng.shuffle(column);
      for (std::size_t i = 0; i < shuffled.rows; ++i)
        shuffled.at(i, f) = column[i];
      drops.push_back(report.baseline_hit_rate -
                      hit_rate(model.predict_scores(shuffled), truth));
    }
    ImportanceEntry entry;
    entry.feature = meta_feature_names()[f];
    entry.mean_drop = mean_of(drops);
    entry.std_drop = repeats >= 2 ? stddev_pop(drops) : 0.0;
    report.ranking.push_back(std::move(entry));
  }
  std::sort(report.ranking.begin(), report.ranking.end(),
            [](const ImportanceEntry& a, const ImportanceEntry& b) {
              if (a.mean_drop != b.mean_drop) return a.mean_drop > b.mean_drop;
              return a.feature < b.feature;
            });
  return report;
}

// ---------------------------------------------------------------------------
// Recommendation

/// Fails when a model was trained against a different grid than the one the
/// caller is working with.
inline void verify_label_schema(const MetaLearnerModel& model,
                                const ModelGrid& grid) {
  if (model.label_schema.size() != grid.size())
    throw Error("label schema mismatch: model has " +
                std::to_string(model.label_schema.size()) +
                " labels, grid has " + std::to_string(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (!(model.label_schema[j] == grid.models[j]))
      throw Error("label schema mismatch at grid index " + std::to_string(j));
}

/// All grid models ranked by predicted score for one dataset.
inline std::vector<std::pair<ModelId, double>> recommend(
    const MetaLearnerModel& model, const Dataset& ds, std::uint64_t seed) {
  if (model.feature_schema.size() != kMetaFeatureCount)
    throw Error("recommend: model feature schema is not the canonical set");
  const MetaFeatureVector features = extract_all(ds, seed);
  const auto scores = model.predict_scores(
      std::span<const double>(features.values.data(), kMetaFeatureCount));
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (scores[a] != scores[b]) return scores[a] > scores[b];
                     return a < b;
                   });
  std::vector<std::pair<ModelId, double>> out;
  out.reserve(scores.size());
  for (std::size_t j : order)
    out.emplace_back(model.label_schema[j], scores[j]);
  return out;
}

// ---------------------------------------------------------------------------
// JSON reports

inline nlohmann::json metrics_to_json(const EvalMetrics& m) {
  return {{"hit_rate", m.hit_rate},
          {"hamming_loss", m.hamming_loss},
          {"macro_precision", m.macro_precision},
          {"macro_recall", m.macro_recall},
          {"macro_specificity", m.macro_specificity},
          {"macro_f1", m.macro_f1}};
}

inline nlohmann::json report_to_json(const EvalReport& report,
                                     const std::string& learner) {
  nlohmann::json j;
  j["learner"] = learner;
  j["folds"] = report.fold_count;
  j["seed"] = report.seed;
  j["metrics"] = metrics_to_json(report.averaged);
  nlohmann::json per_fold = nlohmann::json::array();
  for (std::size_t i = 0; i < report.per_fold.size(); ++i) {
    nlohmann::json fold = metrics_to_json(report.per_fold[i]);
    fold["fold"] = i;
    fold["selected"] = report.selected_configs[i];
    per_fold.push_back(fold);
  }
  j["per_fold"] = per_fold;
  return j;
}

inline nlohmann::json importance_to_json(const ImportanceReport& report) {
  nlohmann::json j;
  j["baseline_hit_rate"] = report.baseline_hit_rate;
  j["repeats"] = report.repeats;
  nlohmann::json ranking = nlohmann::json::array();
  for (const auto& e : report.ranking)
    ranking.push_back({{"feature", e.feature},
                       {"mean_drop", e.mean_drop},
                       {"std_drop", e.std_drop}});
  j["ranking"] = ranking;
  return j;
}

}  // namespace metasel
