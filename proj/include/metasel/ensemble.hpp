#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "metasel/dataset.hpp"
#include "metasel/rng.hpp"
#include "metasel/tree.hpp"

namespace metasel {

// ---------------------------------------------------------------------------
// Random forest

struct RandomForestParams {
  Criterion criterion = Criterion::kGini;
  MaxFeatures max_features = MaxFeatures::kSqrt;
  int n_estimators = 100;
};

struct RandomForestModel {
  std::vector<TreeModel> trees;
  int class_count = 0;

  int predict(std::span<const double> row) const {
    std::vector<std::size_t> votes(static_cast<std::size_t>(class_count), 0);
    for (const auto& tree : trees)
      votes[static_cast<std::size_t>(tree.predict(row))]++;
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
      if (votes[c] > votes[best]) best = c;
    return static_cast<int>(best);
  }

  std::vector<int> predict(const Matrix& x) const {
    std::vector<int> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict(x.row(r));
    return out;
  }
};

/// Bagged CART trees with per-node feature subsampling; vote ties resolve to
/// the smallest class index. The feature presort is shared by every tree.
inline RandomForestModel fit_random_forest(const Dataset& train,
                                           const RandomForestParams& params,
                                           std::uint64_t seed) {
  RandomForestModel model;
  model.class_count = train.class_count;
  model.trees.reserve(static_cast<std::size_t>(params.n_estimators));
  const std::size_t n = train.n();
  const detail::TreePresort presort = detail::TreePresort::build(train.features);
  detail::TreeBuilder builder(train.features, train.target, train.class_count,
                              TreeConfig{params.criterion, params.max_features,
                                         seed});
  std::vector<std::size_t> rows(n);
  for (int t = 0; t < params.n_estimators; ++t) {
    const std::uint64_t tree_seed = mix_seed(seed, static_cast<std::uint64_t>(t));
    Rng boot(mix_seed(tree_seed, 0xb007));
    for (auto& r : rows) r = boot.index(n);
    builder.reseed(tree_seed);
    model.trees.push_back(builder.build(presort, rows));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Gradient boosted trees (one-vs-all on log-odds), with optional DART-style
// per-round tree dropout.

enum class Boosting { kStandard, kDart };

inline const char* to_string(Boosting b) {
  return b == Boosting::kStandard ? "standard" : "dart";
}
inline Boosting boosting_from_string(const std::string& s) {
  if (s == "standard") return Boosting::kStandard;
  if (s == "dart") return Boosting::kDart;
  throw Error("unknown boosting type: " + s);
}

struct GbmParams {
  Boosting boosting = Boosting::kStandard;
  double learning_rate = 0.1;
  int n_estimators = 100;
  int max_depth = 3;
  double drop_rate = 0.1;  // DART only
};

namespace detail {

/// Depth-capped regression tree over pre-binned features, squared-error
/// splits. Binning mirrors histogram boosting implementations and keeps a
/// round cheap.
struct RegressionTreeNode {
  int feature = -1;  // -1 marks a leaf
  int bin_threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<RegressionTreeNode> nodes;

  double predict_binned(std::span<const std::uint8_t> bins) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
      const auto& node = nodes[static_cast<std::size_t>(id)];
      id = bins[static_cast<std::size_t>(node.feature)] <=
                   static_cast<std::uint8_t>(node.bin_threshold)
               ? node.left
               : node.right;
    }
    return nodes[static_cast<std::size_t>(id)].value;
  }
};

constexpr int kGbmBins = 64;

struct BinnedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> bins;       // row-major
  std::vector<std::vector<double>> cuts;  // per feature, ascending

  std::span<const std::uint8_t> row(std::size_t r) const {
    return {bins.data() + r * cols, cols};
  }

  static BinnedMatrix build(const Matrix& x) {
    BinnedMatrix out;
    out.rows = x.rows;
    out.cols = x.cols;
    out.bins.resize(x.rows * x.cols);
    out.cuts.resize(x.cols);
    std::vector<double> sorted;
    for (std::size_t f = 0; f < x.cols; ++f) {
      sorted = x.column(f);
      std::sort(sorted.begin(), sorted.end());
      auto& cuts = out.cuts[f];
      for (int b = 1; b < kGbmBins; ++b) {
        const std::size_t pos =
            std::min(x.rows - 1, b * x.rows / static_cast<std::size_t>(kGbmBins));
        const double cut = sorted[pos];
        if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
      }
      for (std::size_t r = 0; r < x.rows; ++r) {
        const auto it =
            std::lower_bound(cuts.begin(), cuts.end(), x.at(r, f));
        out.bins[r * x.cols + f] = static_cast<std::uint8_t>(it - cuts.begin());
      }
    }
    return out;
  }

  std::uint8_t bin_of(std::size_t f, double value) const {
    const auto& c = cuts[f];
    return static_cast<std::uint8_t>(
        std::lower_bound(c.begin(), c.end(), value) - c.begin());
  }
};

/// Newton leaf value for the softmax objective, Friedman's multiclass form.
inline double gbm_leaf_value(double grad_sum, double hess_sum, int n_classes) {
  if (hess_sum < 1e-12) return 0.0;
  const double k = static_cast<double>(n_classes);
  const double v = ((k - 1.0) / k) * grad_sum / hess_sum;
  return std::clamp(v, -8.0, 8.0);
}

class GbmTreeBuilder {
 public:
  GbmTreeBuilder(const BinnedMatrix& x, std::span<const double> grad,
                 std::span<const double> hess, int max_depth, int n_classes)
      : x_(x), grad_(grad), hess_(hess), max_depth_(max_depth),
        n_classes_(n_classes) {}

  RegressionTree build() {
    index_.resize(x_.rows);
    std::iota(index_.begin(), index_.end(), 0);
    grow(0, index_.size(), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    int bin = 0;
    double gain = 0.0;
  };

  Split best_split(std::size_t begin, std::size_t end, double grad_sum,
                   double hess_sum, std::size_t count) {
    Split best;
    const double parent_score = grad_sum * grad_sum / (hess_sum + 1e-12);
    std::vector<double> bin_grad(kGbmBins), bin_hess(kGbmBins);
    std::vector<std::size_t> bin_count(kGbmBins);
    for (std::size_t f = 0; f < x_.cols; ++f) {
      std::fill(bin_grad.begin(), bin_grad.end(), 0.0);
      std::fill(bin_hess.begin(), bin_hess.end(), 0.0);
      std::fill(bin_count.begin(), bin_count.end(), 0);
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t r = index_[i];
        const std::uint8_t b = x_.bins[r * x_.cols + f];
        bin_grad[b] += grad_[r];
        bin_hess[b] += hess_[r];
        bin_count[b]++;
      }
      double left_grad = 0.0, left_hess = 0.0;
      std::size_t left_count = 0;
      for (int b = 0; b + 1 < kGbmBins; ++b) {
        left_grad += bin_grad[static_cast<std::size_t>(b)];
        left_hess += bin_hess[static_cast<std::size_t>(b)];
        left_count += bin_count[static_cast<std::size_t>(b)];
        if (left_count == 0 || left_count == count) continue;
        const double right_grad = grad_sum - left_grad;
        const double right_hess = hess_sum - left_hess;
        const double gain = left_grad * left_grad / (left_hess + 1e-12) +
                            right_grad * right_grad / (right_hess + 1e-12) -
                            parent_score;
        if (gain > best.gain + 1e-12) {
          best.feature = static_cast<int>(f);
          best.bin = b;
          best.gain = gain;
        }
      }
    }
    return best;
  }

  int grow(std::size_t begin, std::size_t end, int depth) {
    double grad_sum = 0.0, hess_sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      grad_sum += grad_[index_[i]];
      hess_sum += hess_[index_[i]];
    }

    Split split;
    if (depth < max_depth_ && end - begin >= 2)
      split = best_split(begin, end, grad_sum, hess_sum, end - begin);

    if (split.feature < 0) {
      RegressionTreeNode leaf;
      leaf.value = gbm_leaf_value(grad_sum, hess_sum, n_classes_);
      tree_.nodes.push_back(leaf);
      return static_cast<int>(tree_.nodes.size()) - 1;
    }

    const std::size_t f = static_cast<std::size_t>(split.feature);
    const auto bin = static_cast<std::uint8_t>(split.bin);
    auto mid = std::partition(
        index_.begin() + static_cast<std::ptrdiff_t>(begin),
        index_.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t r) { return x_.bins[r * x_.cols + f] <= bin; });
    const std::size_t split_at = static_cast<std::size_t>(mid - index_.begin());

    const int id = static_cast<int>(tree_.nodes.size());
    RegressionTreeNode node;
    node.feature = split.feature;
    node.bin_threshold = split.bin;
    tree_.nodes.push_back(node);
    const int left = grow(begin, split_at, depth + 1);
    const int right = grow(split_at, end, depth + 1);
    tree_.nodes[static_cast<std::size_t>(id)].left = left;
    tree_.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  const BinnedMatrix& x_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  int max_depth_;
  int n_classes_;
  RegressionTree tree_;
  std::vector<std::size_t> index_;
};

}  // namespace detail

struct GbmModel {
  // trees[round][class]; weights[round][class] absorbs the learning rate and
  // any DART renormalization
  std::vector<std::vector<detail::RegressionTree>> trees;
  std::vector<std::vector<double>> weights;
  std::vector<double> base_score;  // log prior per class
  detail::BinnedMatrix binning;
  int class_count = 0;

  std::vector<double> scores_for_bins(std::span<const std::uint8_t> bins) const {
    std::vector<double> f(base_score);
    for (std::size_t m = 0; m < trees.size(); ++m)
      for (int l = 0; l < class_count; ++l)
        f[static_cast<std::size_t>(l)] +=
            weights[m][static_cast<std::size_t>(l)] *
            trees[m][static_cast<std::size_t>(l)].predict_binned(bins);
    return f;
  }

  int predict(std::span<const double> row) const {
    std::vector<std::uint8_t> bins(row.size());
    for (std::size_t f = 0; f < row.size(); ++f)
      bins[f] = binning.bin_of(f, row[f]);
    const auto scores = scores_for_bins(bins);
    std::size_t best = 0;
    for (std::size_t l = 1; l < scores.size(); ++l)
      if (scores[l] > scores[best]) best = l;
    return static_cast<int>(best);
  }

  std::vector<int> predict(const Matrix& x) const {
    std::vector<int> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict(x.row(r));
    return out;
  }
};

/// One-vs-all boosted regression trees on the softmax cross-entropy
/// gradient, initialized at the class log priors. DART drops each earlier
/// tree independently with drop_rate per round, fits against the kept
/// subset and renormalizes: the new tree is scaled by 1/(k+1), the dropped
/// ones by k/(k+1).
inline GbmModel fit_gbm(const Dataset& train, const GbmParams& params,
                        std::uint64_t seed) {
  const std::size_t n = train.n();
  const std::size_t c = static_cast<std::size_t>(train.class_count);
  GbmModel model;
  model.class_count = train.class_count;
  model.binning = detail::BinnedMatrix::build(train.features);

  model.base_score.resize(c);
  const auto counts = train.class_counts();
  for (std::size_t l = 0; l < c; ++l) {
    const double p = std::max(
        static_cast<double>(counts[l]) / static_cast<double>(n), 1e-12);
    model.base_score[l] = std::log(p);
  }

  // raw scores per sample per class
  Matrix f(n, c);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t l = 0; l < c; ++l) f.at(r, l) = model.base_score[l];

  Rng drop_rng(mix_seed(seed, 0xda27));
  std::vector<double> grad(n), hess(n), prob(c);
  std::vector<std::pair<std::size_t, std::size_t>> dropped;  // (round, class)

  for (int round = 0; round < params.n_estimators; ++round) {
    Matrix scores = f;
    dropped.clear();
    if (params.boosting == Boosting::kDart) {
      for (std::size_t m = 0; m < model.trees.size(); ++m)
        for (std::size_t l = 0; l < c; ++l)
          if (drop_rng.bernoulli(params.drop_rate)) dropped.emplace_back(m, l);
      for (const auto& [m, l] : dropped) {
        const detail::RegressionTree& tree = model.trees[m][l];
        const double w = model.weights[m][l];
        for (std::size_t r = 0; r < n; ++r)
          scores.at(r, l) -= w * tree.predict_binned(model.binning.row(r));
      }
    }

    model.trees.emplace_back();
    model.weights.emplace_back(c, 0.0);
    auto& round_trees = model.trees.back();
    auto& round_weights = model.weights.back();
    round_trees.resize(c);

    // per-class drop counts drive the DART normalization
    std::vector<std::size_t> drops_per_class(c, 0);
    for (const auto& [m, l] : dropped) drops_per_class[l]++;

    // softmax over the (possibly drop-reduced) scores, shared by all
    // classes of this round
    Matrix probs(n, c);
    for (std::size_t r = 0; r < n; ++r) {
      double max_score = scores.at(r, 0);
      for (std::size_t j = 1; j < c; ++j)
        max_score = std::max(max_score, scores.at(r, j));
      double denom = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        prob[j] = std::exp(scores.at(r, j) - max_score);
        denom += prob[j];
      }
      for (std::size_t j = 0; j < c; ++j) probs.at(r, j) = prob[j] / denom;
    }

    for (std::size_t l = 0; l < c; ++l) {
      for (std::size_t r = 0; r < n; ++r) {
        const double p = probs.at(r, l);
        const double y = train.target[r] == static_cast<int>(l) ? 1.0 : 0.0;
        grad[r] = y - p;
        hess[r] = std::max(p * (1.0 - p), 1e-16);
      }
      detail::GbmTreeBuilder builder(model.binning, grad, hess,
                                     params.max_depth, train.class_count);
      round_trees[l] = builder.build();

      const double k_drop = static_cast<double>(drops_per_class[l]);
      const double new_weight =
          params.boosting == Boosting::kDart
              ? params.learning_rate / (k_drop + 1.0)
              : params.learning_rate;
      round_weights[l] = new_weight;
      for (std::size_t r = 0; r < n; ++r)
        f.at(r, l) +=
            new_weight * round_trees[l].predict_binned(model.binning.row(r));
    }

    if (!dropped.empty()) {
      // shrink the dropped trees and fold the weight change back into the
      // cached scores
      for (const auto& [m, l] : dropped) {
        const double k_drop = static_cast<double>(drops_per_class[l]);
        const double old_w = model.weights[m][l];
        const double new_w = old_w * k_drop / (k_drop + 1.0);
        model.weights[m][l] = new_w;
        const detail::RegressionTree& tree = model.trees[m][l];
        for (std::size_t r = 0; r < n; ++r)
          f.at(r, l) +=
              (new_w - old_w) * tree.predict_binned(model.binning.row(r));
      }
    }
  }
  return model;
}

}  // namespace metasel
