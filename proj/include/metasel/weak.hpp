#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "metasel/dataset.hpp"
#include "metasel/matrix.hpp"
#include "metasel/rng.hpp"
#include "metasel/tree.hpp"

namespace metasel {

// ---------------------------------------------------------------------------
// k-nearest neighbours

namespace detail {

/// Indices of the k nearest rows of `train` to `query` by Euclidean
/// distance, self excluded when exclude_row >= 0. Distance ties resolve to
/// the lowest row index.
inline std::vector<std::size_t> nearest_rows(const Matrix& train,
                                             std::span<const double> query,
                                             std::size_t k,
                                             std::ptrdiff_t exclude_row = -1) {
  std::vector<std::pair<double, std::size_t>> best;  // kept sorted, size <= k
  best.reserve(k + 1);
  for (std::size_t r = 0; r < train.rows; ++r) {
    if (static_cast<std::ptrdiff_t>(r) == exclude_row) continue;
    const double d2 = squared_distance(train.row(r), query);
    // rows arrive in increasing index order, so on equal distance the
    // incumbent (lower index) must win the tie
    if (best.size() == k && d2 >= best.back().first) continue;
    const std::pair<double, std::size_t> cand{d2, r};
    auto pos = std::lower_bound(best.begin(), best.end(), cand);
    best.insert(pos, cand);
    if (best.size() > k) best.pop_back();
  }
  std::vector<std::size_t> out(best.size());
  for (std::size_t i = 0; i < best.size(); ++i) out[i] = best[i].second;
  return out;
}

inline int majority_class(std::span<const int> votes, int n_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int v : votes) counts[static_cast<std::size_t>(v)]++;
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[best]) best = c;
  return static_cast<int>(best);
}

}  // namespace detail

/// Majority vote over the k nearest training rows; vote ties break to the
/// smallest class index, distance ties to the lowest row index.
inline std::vector<int> knn_classify(const Dataset& train, const Matrix& queries,
                                     std::size_t k) {
  if (train.n() == 0) throw Error("knn_classify: empty training set");
  if (k < 1 || k > train.n())
    throw Error("knn_classify: k out of range");
  std::vector<int> out(queries.rows);
  for (std::size_t q = 0; q < queries.rows; ++q) {
    const auto idx = detail::nearest_rows(train.features, queries.row(q), k);
    std::vector<int> votes(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) votes[i] = train.target[idx[i]];
    out[q] = detail::majority_class(votes, train.class_count);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

struct GaussianNbModel {
  std::vector<double> log_prior;         // c
  Matrix means;                          // c x d
  Matrix variances;                      // c x d, floored
  int class_count = 0;

  int predict(std::span<const double> row) const {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < class_count; ++l) {
      double score = log_prior[static_cast<std::size_t>(l)];
      for (std::size_t f = 0; f < row.size(); ++f) {
        const double var = variances.at(static_cast<std::size_t>(l), f);
        const double diff = row[f] - means.at(static_cast<std::size_t>(l), f);
        score -= 0.5 * (std::log(2.0 * M_PI * var) + diff * diff / var);
      }
      if (score > best_score) {
        best_score = score;
        best = l;
      }
    }
    return best;
  }

  std::vector<int> predict(const Matrix& x) const {
    std::vector<int> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict(x.row(r));
    return out;
  }
};

/// Per-class Gaussian densities with a variance floor of 1e-9 times the
/// largest overall feature variance.
inline GaussianNbModel fit_gaussian_nb(const Dataset& train) {
  const std::size_t c = static_cast<std::size_t>(train.class_count);
  const std::size_t d = train.d();
  GaussianNbModel model;
  model.class_count = train.class_count;
  model.means = Matrix(c, d);
  model.variances = Matrix(c, d);
  model.log_prior.resize(c);

  double max_var = 0.0;
  for (std::size_t f = 0; f < d; ++f)
    max_var = std::max(max_var, variance_pop(train.features.column(f)));
  const double floor = std::max(1e-9 * max_var, 1e-30);

  const auto counts = train.class_counts();
  for (std::size_t l = 0; l < c; ++l) {
    const double n_l = static_cast<double>(counts[l]);
    model.log_prior[l] =
        counts[l] > 0 ? std::log(n_l / static_cast<double>(train.n()))
                      : -1e30;
  }
  for (std::size_t r = 0; r < train.n(); ++r) {
    const std::size_t l = static_cast<std::size_t>(train.target[r]);
    for (std::size_t f = 0; f < d; ++f)
      model.means.at(l, f) += train.features.at(r, f);
  }
  for (std::size_t l = 0; l < c; ++l)
    if (counts[l] > 0)
      for (std::size_t f = 0; f < d; ++f)
        model.means.at(l, f) /= static_cast<double>(counts[l]);
  for (std::size_t r = 0; r < train.n(); ++r) {
    const std::size_t l = static_cast<std::size_t>(train.target[r]);
    for (std::size_t f = 0; f < d; ++f) {
      const double diff = train.features.at(r, f) - model.means.at(l, f);
      model.variances.at(l, f) += diff * diff;
    }
  }
  for (std::size_t l = 0; l < c; ++l)
    for (std::size_t f = 0; f < d; ++f) {
      if (counts[l] > 0) model.variances.at(l, f) /= static_cast<double>(counts[l]);
      model.variances.at(l, f) = std::max(model.variances.at(l, f), floor);
    }
  return model;
}

// ---------------------------------------------------------------------------
// Linear discriminant analysis

struct LdaModel {
  Matrix means;                    // c x d
  std::vector<double> log_prior;   // c
  Matrix coef;                     // c x d, rows are S^-1 mu_l
  std::vector<double> intercept;   // c
  int class_count = 0;

  int predict(std::span<const double> row) const {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < class_count; ++l) {
      double score = intercept[static_cast<std::size_t>(l)];
      const auto w = coef.row(static_cast<std::size_t>(l));
      for (std::size_t f = 0; f < row.size(); ++f) score += w[f] * row[f];
      if (score > best_score) {
        best_score = score;
        best = l;
      }
    }
    return best;
  }

  std::vector<int> predict(const Matrix& x) const {
    std::vector<int> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict(x.row(r));
    return out;
  }
};

/// Pooled-covariance LDA. The pooled matrix is regularized as
/// (1-shrinkage)*S + shrinkage*(trace(S)/d)*I before inversion.
inline LdaModel fit_lda(const Dataset& train, double shrinkage = 1e-4) {
  if (shrinkage < 0.0 || shrinkage > 1.0)
    throw Error("fit_lda: shrinkage must lie in [0,1]");
  const std::size_t c = static_cast<std::size_t>(train.class_count);
  const std::size_t d = train.d();
  const std::size_t n = train.n();

  LdaModel model;
  model.class_count = train.class_count;
  model.means = Matrix(c, d);
  model.log_prior.resize(c);
  const auto counts = train.class_counts();
  for (std::size_t l = 0; l < c; ++l)
    model.log_prior[l] =
        counts[l] > 0
            ? std::log(static_cast<double>(counts[l]) / static_cast<double>(n))
            : -1e30;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t l = static_cast<std::size_t>(train.target[r]);
    for (std::size_t f = 0; f < d; ++f)
      model.means.at(l, f) += train.features.at(r, f);
  }
  for (std::size_t l = 0; l < c; ++l)
    if (counts[l] > 0)
      for (std::size_t f = 0; f < d; ++f)
        model.means.at(l, f) /= static_cast<double>(counts[l]);

  Matrix pooled(d, d);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t l = static_cast<std::size_t>(train.target[r]);
    for (std::size_t i = 0; i < d; ++i) {
      const double di = train.features.at(r, i) - model.means.at(l, i);
      for (std::size_t j = i; j < d; ++j)
        pooled.at(i, j) += di * (train.features.at(r, j) - model.means.at(l, j));
    }
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      pooled.at(i, j) /= static_cast<double>(n);
      pooled.at(j, i) = pooled.at(i, j);
    }
    trace += pooled.at(i, i);
  }
  const double ridge = shrinkage * (trace / static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      pooled.at(i, j) *= (1.0 - shrinkage);
      if (i == j) pooled.at(i, j) += ridge;
    }

  Matrix chol = pooled;
  if (!cholesky(chol))
    throw Error("fit_lda: pooled covariance singular after shrinkage " +
                format_double(shrinkage) + "; raise shrinkage");

  model.coef = Matrix(c, d);
  model.intercept.resize(c);
  for (std::size_t l = 0; l < c; ++l) {
    const auto w = cholesky_solve(chol, model.means.row(l));
    double quad = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
      model.coef.at(l, f) = w[f];
      quad += w[f] * model.means.at(l, f);
    }
    model.intercept[l] = model.log_prior[l] - 0.5 * quad;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Fuzzy c-means

/// n x c fuzzy memberships; every row sums to 1 within 1e-9.
struct MembershipMatrix {
  Matrix u;  // n x c

  double partition_coefficient() const {
    double s = 0.0;
    for (double v : u.data) s += v * v;
    return s / static_cast<double>(u.rows);
  }
};

/// Alternating-optimization fuzzy c-means with fuzzifier `a`. Memberships
/// start uniformly random (row-normalized) from the seed; iteration stops
/// when the largest membership change falls below tol.
inline MembershipMatrix fuzzy_cmeans(const Matrix& x, int c, double a = 2.0,
                                     double tol = 1e-5, int max_iter = 300,
                                     std::uint64_t seed = 0) {
  if (c < 1) throw Error("fuzzy_cmeans: c must be positive");
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  const std::size_t k = static_cast<std::size_t>(c);
  if (k > n) throw Error("fuzzy_cmeans: more clusters than points");
  if (!(a > 1.0)) throw Error("fuzzy_cmeans: fuzzifier must exceed 1");

  MembershipMatrix m;
  m.u = Matrix(n, k);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double r = rng.uniform() + 1e-12;
      m.u.at(i, j) = r;
      sum += r;
    }
    for (std::size_t j = 0; j < k; ++j) m.u.at(i, j) /= sum;
  }

  Matrix centroids(k, d);
  const double exponent = 2.0 / (a - 1.0);
  std::vector<double> dist(k);
  for (int iter = 0; iter < max_iter; ++iter) {
    for (std::size_t j = 0; j < k; ++j) {
      double weight_sum = 0.0;
      std::fill(centroids.row(j).begin(), centroids.row(j).end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = std::pow(m.u.at(i, j), a);
        weight_sum += w;
        for (std::size_t f = 0; f < d; ++f)
          centroids.at(j, f) += w * x.at(i, f);
      }
      if (weight_sum > 0.0)
        for (std::size_t f = 0; f < d; ++f) centroids.at(j, f) /= weight_sum;
    }

    double max_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t zero_count = 0;
      for (std::size_t j = 0; j < k; ++j) {
        dist[j] = std::sqrt(squared_distance(x.row(i), centroids.row(j)));
        if (dist[j] == 0.0) ++zero_count;
      }
      for (std::size_t j = 0; j < k; ++j) {
        double u_new;
        if (zero_count > 0) {
          // coincident centroid(s): membership splits over the zero set
          u_new = dist[j] == 0.0 ? 1.0 / static_cast<double>(zero_count) : 0.0;
        } else {
          double denom = 0.0;
          for (std::size_t l = 0; l < k; ++l)
            denom += std::pow(dist[j] / dist[l], exponent);
          u_new = 1.0 / denom;
        }
        max_change = std::max(max_change, std::abs(u_new - m.u.at(i, j)));
        m.u.at(i, j) = u_new;
      }
    }
    if (max_change < tol) break;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Local outlier factor

/// Classical LOF, returned negated so that inliers score around -1 and
/// outliers go increasingly negative. k defaults to min(20, n-1).
inline std::vector<double> lof_scores(const Matrix& x, std::size_t k = 0) {
  const std::size_t n = x.rows;
  if (n < 3) throw Error("lof_scores: need at least 3 samples");
  if (k == 0) k = std::min<std::size_t>(20, n - 1);
  k = std::min(k, n - 1);

  // neighbour lists and k-distances
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<double> k_distance(n);
  std::vector<std::pair<double, std::size_t>> dist(n - 1);
  Matrix d2(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = squared_distance(x.row(i), x.row(j));
      d2.at(i, j) = v;
      d2.at(j, i) = v;
    }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist[m++] = {d2.at(i, j), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                      dist.end());
    neighbors[i].resize(k);
    for (std::size_t j = 0; j < k; ++j) neighbors[i][j] = dist[j].second;
    k_distance[i] = std::sqrt(dist[k - 1].first);
  }

  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach_sum = 0.0;
    for (std::size_t j : neighbors[i])
      reach_sum += std::max(k_distance[j], std::sqrt(d2.at(i, j)));
    lrd[i] = static_cast<double>(k) / (reach_sum + 1e-10);
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ratio_sum = 0.0;
    for (std::size_t j : neighbors[i]) ratio_sum += lrd[j];
    out[i] = -(ratio_sum / (static_cast<double>(k) * lrd[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Landmark cross-validation

enum class LearnerFamily { kOneNn, kLda, kGaussianNb, kDecisionTree };

struct LearnerSpec {
  LearnerFamily family = LearnerFamily::kOneNn;
  std::map<std::string, std::string> params;

  static LearnerSpec one_nn() { return {LearnerFamily::kOneNn, {}}; }
  static LearnerSpec lda() { return {LearnerFamily::kLda, {}}; }
  static LearnerSpec gaussian_nb() { return {LearnerFamily::kGaussianNb, {}}; }
  static LearnerSpec decision_tree(const std::string& criterion = "gini",
                                   const std::string& max_features = "all") {
    criterion_from_string(criterion);       // validate here, not at fit time
    max_features_from_string(max_features);
    return {LearnerFamily::kDecisionTree,
            {{"criterion", criterion}, {"max_features", max_features}}};
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

namespace detail {

inline bool needs_standardization(LearnerFamily family) {
  return family == LearnerFamily::kOneNn || family == LearnerFamily::kLda;
}

inline std::vector<int> fit_predict(const LearnerSpec& spec,
                                    const Dataset& train, const Matrix& queries,
                                    std::uint64_t seed) {
  switch (spec.family) {
    case LearnerFamily::kOneNn:
      return knn_classify(train, queries, 1);
    case LearnerFamily::kLda:
      return fit_lda(train).predict(queries);
    case LearnerFamily::kGaussianNb:
      return fit_gaussian_nb(train).predict(queries);
    case LearnerFamily::kDecisionTree: {
      const TreeConfig cfg{
          criterion_from_string(spec.get("criterion", "gini")),
          max_features_from_string(spec.get("max_features", "all")), seed};
      return fit_tree(train.features, train.target, train.class_count, cfg)
          .predict(queries);
    }
  }
  throw Error("fit_predict: unknown learner family");
}

}  // namespace detail

/// Unweighted mean holdout accuracy over stratified folds. Distance- and
/// covariance-based learners see features standardized with statistics from
/// the training fold only; trees and naive Bayes see raw features.
inline double cross_val_accuracy(const LearnerSpec& spec, const Dataset& ds,
                                 int k, std::uint64_t seed) {
  const FoldPlan plan = stratified_folds(ds, k, mix_seed(seed, 0x11));
  double acc_sum = 0.0;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < ds.n(); ++r)
      (plan.fold_assignments[r] == fold ? test_rows : train_rows).push_back(r);
    Dataset train = ds.subset(train_rows);
    Dataset test = ds.subset(test_rows);
    Matrix test_x = test.features;
    if (detail::needs_standardization(spec.family)) {
      const Standardizer stz = Standardizer::fit(train.features);
      train.features = stz.apply(train.features);
      test_x = stz.apply(test_x);
    }
    const auto pred = detail::fit_predict(
        spec, train, test_x, mix_seed(seed, static_cast<std::uint64_t>(fold)));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (pred[i] == test.target[i]) ++correct;
    acc_sum += static_cast<double>(correct) / static_cast<double>(pred.size());
  }
  return acc_sum / static_cast<double>(k);
}

}  // namespace metasel
