#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "metasel/dataset.hpp"
#include "metasel/matrix.hpp"
#include "metasel/rng.hpp"
#include "metasel/stats.hpp"
#include "metasel/weak.hpp"

namespace metasel {

constexpr std::size_t kMetaFeatureCount = 62;

/// Canonical meta-feature names, in the order every serialized vector uses.
inline const std::array<std::string, kMetaFeatureCount>& meta_feature_names() {
  static const std::array<std::string, kMetaFeatureCount> names = {
      "n_features", "n_instances", "n_classes", "n_normal_features",
      "max_eigenvalue", "class_entropy", "min_class_distribution",
      "max_class_distribution", "mean_class_distribution",
      "std_class_distribution", "min_corr_ff", "max_corr_ff", "mean_corr_ff",
      "std_corr_ff", "min_corr_fc", "max_corr_fc", "mean_corr_fc",
      "std_corr_fc", "fuzzy_part_coeff", "min_presum_correct",
      "max_presum_correct", "mean_presum_correct", "std_presum_correct",
      "neg_outlier_factor", "min_variance", "max_variance", "mean_variance",
      "std_variance", "max_neg_cov", "max_pos_cov", "mean_pos_cov",
      "mean_neg_cov", "std_pos_cov", "std_neg_cov", "max_neg_skew",
      "std_neg_skew", "mean_neg_skew", "max_pos_skew", "std_pos_skew",
      "mean_pos_skew", "max_neg_kurtosis", "std_neg_kurtosis",
      "mean_neg_kurtosis", "max_pos_kurtosis", "std_pos_kurtosis",
      "mean_pos_kurtosis", "dispersion", "n_equiv_features", "min_uncertainty",
      "max_uncertainty", "mean_uncertainty", "std_uncertainty", "1nn_mean_acc",
      "lda_mean_acc", "nb_mean_acc", "dt_mean_acc", "dt_leaves", "dt_depth",
      "max_gini_importance", "min_gini_importance", "mean_gini_importance",
      "std_gini_importance"};
  return names;
}

struct MetaFeatureVector {
  std::array<double, kMetaFeatureCount> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  static int index_of(const std::string& name) {
    const auto& names = meta_feature_names();
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }
};

// ---------------------------------------------------------------------------
// Target-side measures. Entropy and everything derived from it use base 2.

inline double class_entropy(std::span<const int> y, int n_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int v : y) counts[static_cast<std::size_t>(v)]++;
  const double n = static_cast<double>(y.size());
  double e = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    e -= p * std::log2(p);
  }
  return e;
}

inline SummaryStats class_distribution_stats(std::span<const int> y,
                                             int n_classes) {
  std::vector<double> ratios(static_cast<std::size_t>(n_classes), 0.0);
  for (int v : y) ratios[static_cast<std::size_t>(v)] += 1.0;
  for (double& r : ratios) r /= static_cast<double>(y.size());
  return summarize(ratios);
}

/// Index of dispersion of the class frequencies: values near 0 mean one
/// class dominates, balanced classes reach 1/c.
inline double dispersion(std::span<const int> y, int n_classes) {
  std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
  for (int v : y) counts[static_cast<std::size_t>(v)] += 1.0;
  const double n = static_cast<double>(y.size());
  double sum_sq = 0.0;
  for (double f : counts) sum_sq += f * f;
  return (n * n - sum_sq) / (n * n * static_cast<double>(n_classes - 1));
}

// ---------------------------------------------------------------------------
// Feature-feature association

/// min/max/mean/std of the absolute Pearson correlation over all feature
/// pairs; a constant feature contributes 0. d == 1 yields all zeros.
inline SummaryStats corr_ff_stats(const Matrix& x) {
  if (x.cols < 2) return {};
  std::vector<std::vector<double>> cols(x.cols);
  for (std::size_t c = 0; c < x.cols; ++c) cols[c] = x.column(c);
  std::vector<double> values;
  values.reserve(x.cols * (x.cols - 1) / 2);
  for (std::size_t i = 0; i < x.cols; ++i)
    for (std::size_t j = i + 1; j < x.cols; ++j)
      values.push_back(std::abs(pearson(cols[i], cols[j])));
  return summarize(values);
}

// ---------------------------------------------------------------------------
// Feature-target mutual information (nearest-neighbour estimator for a
// continuous variable against a discrete target), in bits.

inline double mutual_info_fc(std::span<const double> x, std::span<const int> y,
                             int n_classes, int k = 3, std::uint64_t seed = 0) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) return 0.0;  // constant feature carries no information
  const double sd = stddev_pop(x);
  if (sd <= 0.0) return 0.0;

  std::vector<double> xj(x.begin(), x.end());
  Rng rng(seed);
  for (double& v : xj) v += 1e-10 * sd * rng.normal();  // tie breaking

  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int v : y) counts[static_cast<std::size_t>(v)]++;
  std::size_t min_size = n;
  for (std::size_t c : counts)
    if (c > 0) min_size = std::min(min_size, c);
  std::size_t k_eff = static_cast<std::size_t>(k);
  if (min_size < k_eff + 1)
    k_eff = std::max<std::size_t>(1, min_size - 1);

  // global order for radius counting
  std::vector<double> sorted_x(xj);
  std::sort(sorted_x.begin(), sorted_x.end());
  // per-class sorted values for the same-class k-th neighbour
  std::vector<std::vector<double>> class_sorted(
      static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < n; ++i)
    class_sorted[static_cast<std::size_t>(y[i])].push_back(xj[i]);
  for (auto& v : class_sorted) std::sort(v.begin(), v.end());

  double sum_dig_m = 0.0;
  double sum_dig_nx = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cls = class_sorted[static_cast<std::size_t>(y[i])];
    if (cls.size() < 2) continue;  // singleton class: no neighbour, skip
    const std::size_t kk = std::min(k_eff, cls.size() - 1);

    // two-pointer walk outward from this value's position in its class
    const auto it = std::lower_bound(cls.begin(), cls.end(), xj[i]);
    std::ptrdiff_t pos = it - cls.begin();
    if (pos == static_cast<std::ptrdiff_t>(cls.size()) || cls[static_cast<std::size_t>(pos)] != xj[i]) --pos;
    std::ptrdiff_t lo = pos - 1, hi = pos + 1;
    double dist = 0.0;
    for (std::size_t step = 0; step < kk; ++step) {
      const double dl = lo >= 0 ? xj[i] - cls[static_cast<std::size_t>(lo)]
                                : std::numeric_limits<double>::infinity();
      const double dh = hi < static_cast<std::ptrdiff_t>(cls.size())
                            ? cls[static_cast<std::size_t>(hi)] - xj[i]
                            : std::numeric_limits<double>::infinity();
      if (dl <= dh) {
        dist = dl;
        --lo;
      } else {
        dist = dh;
        ++hi;
      }
    }

    // strictly-closer count over the full sample, self included; distances
    // use the same subtraction forms that produced `dist`, so the k-th
    // neighbour can never slip back in through rounding
    const auto first_ge =
        std::lower_bound(sorted_x.begin(), sorted_x.end(), xj[i]);
    const auto idx = static_cast<std::size_t>(first_ge - sorted_x.begin());
    std::size_t within = 0;
    for (std::size_t r = idx; r < n && sorted_x[r] - xj[i] < dist; ++r)
      ++within;
    for (std::size_t l = idx; l > 0;) {
      --l;
      if (!(xj[i] - sorted_x[l] < dist)) break;
      ++within;
    }
    sum_dig_m += digamma(static_cast<double>(std::max<std::size_t>(within, 1)));
    sum_dig_nx += digamma(static_cast<double>(cls.size())) -
                  digamma(static_cast<double>(kk));
    ++used;
  }
  if (used == 0) return 0.0;

  const double nats = digamma(static_cast<double>(used)) -
                      (sum_dig_nx + sum_dig_m) / static_cast<double>(used);
  return std::max(0.0, nats / std::numbers::ln2);
}

/// One MI value per feature, with a per-feature jitter stream.
inline std::vector<double> mutual_info_per_feature(const Dataset& ds, int k,
                                                   std::uint64_t seed) {
  std::vector<double> mi(ds.d());
  for (std::size_t f = 0; f < ds.d(); ++f) {
    mi[f] = mutual_info_fc(ds.features.column(f), ds.target, ds.class_count, k,
                           mix_seed(seed, f));
  }
  return mi;
}

inline SummaryStats corr_fc_stats(std::span<const double> mi_values) {
  return summarize(mi_values);
}

inline double n_equiv_features(double entropy, std::span<const double> mi_values) {
  const double mean_mi = std::max(mean_of(mi_values), 1e-12);
  return entropy / mean_mi;
}

inline SummaryStats uncertainty_stats(double entropy,
                                      std::span<const double> mi_values) {
  std::vector<double> u(mi_values.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = std::clamp(mi_values[i] / entropy, 0.0, 1.05);
  return summarize(u);
}

// ---------------------------------------------------------------------------
// Cluster structure and neighbourhood agreement

inline double fuzzy_partition_coefficient(const Dataset& ds,
                                          std::uint64_t seed) {
  const Matrix x = Standardizer::fit(ds.features).apply(ds.features);
  return fuzzy_cmeans(x, ds.class_count, 2.0, 1e-5, 300, seed)
      .partition_coefficient();
}

/// Per-class share of instances whose neighbourhood majority matches their
/// own class, summarized across classes. The neighbourhood holds c nearest
/// rows (self excluded). Returns zeros when n <= c.
inline SummaryStats presum_correct_stats(const Dataset& ds) {
  const std::size_t c = static_cast<std::size_t>(ds.class_count);
  if (ds.n() <= c) return {};
  const Matrix x = Standardizer::fit(ds.features).apply(ds.features);
  std::vector<double> correct(c, 0.0), total(c, 0.0);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto idx = detail::nearest_rows(x, x.row(i), c,
                                          static_cast<std::ptrdiff_t>(i));
    std::vector<int> votes(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) votes[j] = ds.target[idx[j]];
    const int g = detail::majority_class(votes, ds.class_count);
    const auto l = static_cast<std::size_t>(ds.target[i]);
    total[l] += 1.0;
    if (g == ds.target[i]) correct[l] += 1.0;
  }
  std::vector<double> ratios(c, 0.0);
  for (std::size_t l = 0; l < c; ++l)
    if (total[l] > 0.0) ratios[l] = correct[l] / total[l];
  return summarize(ratios);
}

inline double neg_outlier_factor(const Dataset& ds) {
  if (ds.n() < 3) return 0.0;
  const Matrix x = Standardizer::fit(ds.features).apply(ds.features);
  const auto scores = lof_scores(x);
  return mean_of(scores);
}

// ---------------------------------------------------------------------------
// Moment-based measures on raw features

inline SummaryStats variance_stats(const Matrix& x) {
  std::vector<double> vars(x.cols);
  for (std::size_t c = 0; c < x.cols; ++c) vars[c] = variance_pop(x.column(c));
  return summarize(vars);
}

inline SignedStats covariance_signed(const Matrix& x) {
  if (x.cols < 2) return {};
  std::vector<std::vector<double>> cols(x.cols);
  for (std::size_t c = 0; c < x.cols; ++c) cols[c] = x.column(c);
  std::vector<double> covs;
  covs.reserve(x.cols * (x.cols - 1) / 2);
  for (std::size_t i = 0; i < x.cols; ++i)
    for (std::size_t j = i + 1; j < x.cols; ++j)
      covs.push_back(covariance_pop(cols[i], cols[j]));
  return signed_stats(covs);
}

struct SkewKurtosisSigned {
  SignedStats skew;
  SignedStats kurtosis;  // excess
};

inline SkewKurtosisSigned skew_kurtosis_signed(const Matrix& x) {
  std::vector<double> skews(x.cols), kurts(x.cols);
  for (std::size_t c = 0; c < x.cols; ++c) {
    const auto col = x.column(c);
    skews[c] = skewness_pop(col);
    kurts[c] = excess_kurtosis_pop(col);
  }
  return {signed_stats(skews), signed_stats(kurts)};
}

/// Jarque-Bera normality count at the 5% level (chi-square(2) critical value
/// 5.991). Unreliable below 20 samples, where it reports 0; constant columns
/// are never counted.
inline int count_normal_features(const Matrix& x, double critical = 5.991) {
  if (x.rows < 20) return 0;
  int count = 0;
  const double n = static_cast<double>(x.rows);
  for (std::size_t c = 0; c < x.cols; ++c) {
    const auto col = x.column(c);
    if (variance_pop(col) <= 0.0) continue;
    const double g1 = skewness_pop(col);
    const double g2 = excess_kurtosis_pop(col);
    const double jb = n * (g1 * g1 / 6.0 + g2 * g2 / 24.0);
    if (jb <= critical) ++count;
  }
  return count;
}

/// Largest eigenvalue of the population covariance matrix, by power
/// iteration (tolerance 1e-9, at most 10000 steps).
inline double max_eigenvalue(const Matrix& x) {
  const Matrix cov = covariance_matrix(x);
  const std::size_t d = cov.rows;
  if (d == 0) return 0.0;

  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += cov.at(i, j) * v[j];
      out[i] = s;
    }
  };
  auto norm_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x_ : v) s += x_ * x_;
    return std::sqrt(s);
  };

  // deterministic start; fall back to basis vectors if the start happens to
  // be orthogonal to the leading eigenvector
  std::vector<std::vector<double>> starts;
  {
    Rng rng(0x6d65746173656cULL);
    std::vector<double> r(d);
    for (double& v : r) v = rng.normal();
    starts.push_back(std::move(r));
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<double> e(d, 0.0);
      e[i] = 1.0;
      starts.push_back(std::move(e));
    }
  }

  std::vector<double> w(d);
  for (auto& v : starts) {
    const double n0 = norm_of(v);
    if (n0 <= 0.0) continue;
    for (double& x_ : v) x_ /= n0;
    double lambda = 0.0;
    bool alive = true;
    for (int iter = 0; iter < 10000; ++iter) {
      apply(v, w);
      const double norm = norm_of(w);
      if (norm <= 1e-300) {
        alive = iter > 0;  // start vector in the null space: try next start
        break;
      }
      for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / norm;
      if (std::abs(norm - lambda) <= 1e-9 * std::max(1.0, norm)) {
        lambda = norm;
        break;
      }
      lambda = norm;
    }
    if (alive) return lambda;
  }
  return 0.0;  // covariance is identically zero
}

// ---------------------------------------------------------------------------
// Landmarking

struct LandmarkFeatures {
  double one_nn_acc = 0.0;
  double lda_acc = 0.0;
  double nb_acc = 0.0;
  double dt_acc = 0.0;
  double dt_leaves = 0.0;
  double dt_depth = 0.0;
  SummaryStats gini;  // of the full-data tree's importances
};

inline LandmarkFeatures landmark_features(const Dataset& ds,
                                          std::uint64_t seed, int folds = 5) {
  LandmarkFeatures out;
  out.one_nn_acc =
      cross_val_accuracy(LearnerSpec::one_nn(), ds, folds, mix_seed(seed, 1));
  out.lda_acc =
      cross_val_accuracy(LearnerSpec::lda(), ds, folds, mix_seed(seed, 2));
  out.nb_acc = cross_val_accuracy(LearnerSpec::gaussian_nb(), ds, folds,
                                  mix_seed(seed, 3));
  out.dt_acc = cross_val_accuracy(LearnerSpec::decision_tree(), ds, folds,
                                  mix_seed(seed, 4));
  const TreeModel tree =
      fit_tree(ds, Criterion::kGini, MaxFeatures::kAll, mix_seed(seed, 5));
  out.dt_leaves = static_cast<double>(tree.leaf_count);
  out.dt_depth = static_cast<double>(tree.depth);
  out.gini = summarize(tree.gini_importances);
  return out;
}

// ---------------------------------------------------------------------------
// Full extraction

inline MetaFeatureVector extract_all(const Dataset& ds, std::uint64_t seed) {
  MetaFeatureVector v;
  const Matrix& x = ds.features;
  std::size_t i = 0;
  auto put = [&](double value) { v[i++] = value; };
  auto put4 = [&](const SummaryStats& s) {
    put(s.min);
    put(s.max);
    put(s.mean);
    put(s.std);
  };
  auto guarded = [&](const char* feature, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      throw Error(std::string("extract_all: feature '") + feature +
                  "' failed: " + e.what());
    }
  };

  put(static_cast<double>(ds.d()));
  put(static_cast<double>(ds.n()));
  put(static_cast<double>(ds.class_count));
  put(static_cast<double>(count_normal_features(x)));
  guarded("max_eigenvalue", [&] { put(max_eigenvalue(x)); });

  const double entropy = class_entropy(ds.target, ds.class_count);
  put(entropy);
  put4(class_distribution_stats(ds.target, ds.class_count));
  put4(corr_ff_stats(x));

  const auto mi = mutual_info_per_feature(ds, 3, mix_seed(seed, 0x20));
  put4(corr_fc_stats(mi));

  guarded("fuzzy_part_coeff",
          [&] { put(fuzzy_partition_coefficient(ds, mix_seed(seed, 0x30))); });
  put4(presum_correct_stats(ds));
  guarded("neg_outlier_factor", [&] { put(neg_outlier_factor(ds)); });

  put4(variance_stats(x));

  const SignedStats cov = covariance_signed(x);
  put(cov.neg_extreme);  // max_neg_cov holds the most negative covariance
  put(cov.pos_extreme);
  put(cov.pos_mean);
  put(cov.neg_mean);
  put(cov.pos_std);
  put(cov.neg_std);

  const SkewKurtosisSigned sk = skew_kurtosis_signed(x);
  auto put_signed = [&](const SignedStats& s) {
    put(s.neg_extreme);
    put(s.neg_std);
    put(s.neg_mean);
    put(s.pos_extreme);
    put(s.pos_std);
    put(s.pos_mean);
  };
  put_signed(sk.skew);
  put_signed(sk.kurtosis);

  put(dispersion(ds.target, ds.class_count));
  put(n_equiv_features(entropy, mi));
  put4(uncertainty_stats(entropy, mi));

  guarded("landmarking", [&] {
    const LandmarkFeatures lm = landmark_features(ds, mix_seed(seed, 0x40));
    put(lm.one_nn_acc);
    put(lm.lda_acc);
    put(lm.nb_acc);
    put(lm.dt_acc);
    put(lm.dt_leaves);
    put(lm.dt_depth);
    put(lm.gini.max);
    put(lm.gini.min);
    put(lm.gini.mean);
    put(lm.gini.std);
  });

  if (i != kMetaFeatureCount)
    throw Error("extract_all: internal feature count mismatch");
  for (std::size_t f = 0; f < kMetaFeatureCount; ++f) {
    if (!std::isfinite(v[f]))
      throw Error("extract_all: feature '" + meta_feature_names()[f] +
                  "' is not finite");
  }
  return v;
}

}  // namespace metasel
