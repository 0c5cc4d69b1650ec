#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "metasel/dataset.hpp"
#include "metasel/matrix.hpp"
#include "metasel/rng.hpp"

namespace metasel {

enum class Criterion { kGini, kEntropy };
enum class MaxFeatures { kSqrt, kLog2, kAll };

inline const char* to_string(Criterion c) {
  return c == Criterion::kGini ? "gini" : "entropy";
}
inline const char* to_string(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::kSqrt: return "sqrt";
    case MaxFeatures::kLog2: return "log2";
    default: return "all";
  }
}

inline Criterion criterion_from_string(const std::string& s) {
  if (s == "gini") return Criterion::kGini;
  if (s == "entropy") return Criterion::kEntropy;
  throw Error("unknown criterion: " + s);
}
inline MaxFeatures max_features_from_string(const std::string& s) {
  if (s == "sqrt") return MaxFeatures::kSqrt;
  if (s == "log2") return MaxFeatures::kLog2;
  if (s == "all") return MaxFeatures::kAll;
  throw Error("unknown max_features: " + s);
}

inline std::size_t resolve_max_features(MaxFeatures mode, std::size_t d) {
  switch (mode) {
    case MaxFeatures::kSqrt:
      return std::max<std::size_t>(1, static_cast<std::size_t>(
                                          std::sqrt(static_cast<double>(d))));
    case MaxFeatures::kLog2:
      return std::max<std::size_t>(1, static_cast<std::size_t>(
                                          std::log2(static_cast<double>(d))));
    default:
      return d;
  }
}

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int majority = 0;
  std::vector<double> class_fraction;  // filled for leaves only
};

/// CART classification tree grown to purity (no depth cap), with greedy
/// binary splits on midpoints between sorted distinct feature values.
struct TreeModel {
  std::vector<TreeNode> nodes;
  int leaf_count = 0;
  int depth = 0;
  std::vector<double> gini_importances;  // per feature, sums to 1 (or all 0)
  int class_count = 0;

  const TreeNode& leaf_for(std::span<const double> row) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
      const TreeNode& node = nodes[static_cast<std::size_t>(id)];
      id = row[static_cast<std::size_t>(node.feature)] <= node.threshold
               ? node.left
               : node.right;
    }
    return nodes[static_cast<std::size_t>(id)];
  }

  int predict(std::span<const double> row) const { return leaf_for(row).majority; }

  std::vector<int> predict(const Matrix& x) const {
    std::vector<int> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict(x.row(r));
    return out;
  }
};

struct TreeConfig {
  Criterion criterion = Criterion::kGini;
  MaxFeatures max_features = MaxFeatures::kAll;
  std::uint64_t seed = 0;
};

namespace detail {

/// Column-major copy plus per-feature globally sorted row ids. An ensemble
/// builds this once and every member tree derives its own sorted lists from
/// it in linear time.
struct TreePresort {
  Matrix xt;                          // d x n
  std::vector<std::uint32_t> order;   // feature-major sorted row ids

  static TreePresort build(const Matrix& x) {
    TreePresort ctx;
    ctx.xt = Matrix(x.cols, x.rows);
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t f = 0; f < x.cols; ++f) ctx.xt.at(f, r) = x.at(r, f);
    ctx.order.resize(x.cols * x.rows);
    for (std::size_t f = 0; f < x.cols; ++f) {
      std::uint32_t* seg = &ctx.order[f * x.rows];
      for (std::size_t i = 0; i < x.rows; ++i)
        seg[i] = static_cast<std::uint32_t>(i);
      const double* col = ctx.xt.row(f).data();
      std::sort(seg, seg + x.rows, [col](std::uint32_t a, std::uint32_t b) {
        if (col[a] != col[b]) return col[a] < col[b];
        return a < b;
      });
    }
    return ctx;
  }
};

/// Grows one tree from per-feature presorted sample lists. A split
/// partitions each feature's list in place (order preserved), so no node
/// ever sorts; boundary impurities update in O(1) per moved sample via
/// running sum-of-squares (gini) or count*log2(count) (entropy)
/// accumulators.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, int n_classes,
              const TreeConfig& cfg)
      : x_(x),
        y_(y),
        n_classes_(static_cast<std::size_t>(n_classes)),
        cfg_(cfg),
        rng_(cfg.seed) {}

  /// Self-contained build: presorts internally.
  TreeModel build(std::span<const std::size_t> rows) {
    const TreePresort ctx = TreePresort::build(x_);
    return build(ctx, rows);
  }

  /// Build against a shared presort. `rows` may contain duplicates
  /// (bootstrap multiset); each feature's list is derived by replaying the
  /// global order with per-row multiplicities, which keeps it sorted.
  TreeModel build(const TreePresort& ctx, std::span<const std::size_t> rows) {
    if (rows.empty()) throw Error("fit_tree: empty training set");
    n_ = rows.size();
    xt_ = &ctx.xt;
    model_ = TreeModel{};
    model_.class_count = static_cast<int>(n_classes_);
    model_.gini_importances.assign(x_.cols, 0.0);
    max_feat_ = resolve_max_features(cfg_.max_features, x_.cols);

    std::vector<std::uint32_t> multiplicity(x_.rows, 0);
    for (std::size_t r : rows) multiplicity[r]++;

    sorted_.resize(x_.cols * n_);
    values_.resize(x_.cols * n_);
    for (std::size_t f = 0; f < x_.cols; ++f) {
      const std::uint32_t* global = &ctx.order[f * x_.rows];
      const double* col = ctx.xt.row(f).data();
      std::uint32_t* ids = &sorted_[f * n_];
      double* vals = &values_[f * n_];
      std::size_t out = 0;
      for (std::size_t i = 0; i < x_.rows; ++i) {
        const std::uint32_t r = global[i];
        for (std::uint32_t m = 0; m < multiplicity[r]; ++m) {
          ids[out] = r;
          vals[out] = col[r];
          ++out;
        }
      }
    }

    nlog2_.resize(n_ + 1);
    nlog2_[0] = 0.0;
    for (std::size_t i = 1; i <= n_; ++i)
      nlog2_[i] = static_cast<double>(i) * std::log2(static_cast<double>(i));

    scratch_idx_.resize(n_);
    scratch_val_.resize(n_);
    left_counts_.resize(n_classes_);
    node_counts_.resize(n_classes_);
    grow(0, n_, 0);

    const double total = std::accumulate(model_.gini_importances.begin(),
                                         model_.gini_importances.end(), 0.0);
    if (total > 0.0)
      for (double& v : model_.gini_importances) v /= total;
    else
      std::fill(model_.gini_importances.begin(),
                model_.gini_importances.end(), 0.0);
    return std::move(model_);
  }

  void reseed(std::uint64_t seed) {
    cfg_.seed = seed;
    rng_ = Rng(seed);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
  };

  // impurity of a block given its sum-of-squares / entropy accumulator
  double impurity_from(double accum, double count) const {
    if (count <= 0.0) return 0.0;
    if (cfg_.criterion == Criterion::kGini)
      return 1.0 - accum / (count * count);
    return std::log2(count) - accum / count;
  }

  int make_leaf(std::size_t begin, std::size_t end, int depth) {
    model_.depth = std::max(model_.depth, depth);
    TreeNode node;
    node.class_fraction.resize(n_classes_);
    const double n = static_cast<double>(end - begin);
    std::size_t best = 0;
    for (std::size_t c = 0; c < n_classes_; ++c) {
      node.class_fraction[c] = static_cast<double>(node_counts_[c]) / n;
      if (node_counts_[c] > node_counts_[best]) best = c;
    }
    node.majority = static_cast<int>(best);
    model_.nodes.push_back(std::move(node));
    model_.leaf_count++;
    return static_cast<int>(model_.nodes.size()) - 1;
  }

  Split best_split(std::size_t begin, std::size_t end, double node_impurity) {
    Split best;
    const std::size_t count = end - begin;
    const double n = static_cast<double>(count);
    const bool gini = cfg_.criterion == Criterion::kGini;

    // feature order: sequential when every feature is eligible, otherwise a
    // seeded permutation walked until max_feat_ split-capable features have
    // been examined (constant-in-node features do not use up the budget)
    std::vector<std::size_t> features(x_.cols);
    std::iota(features.begin(), features.end(), 0);
    if (max_feat_ < x_.cols) rng_.shuffle(features);

    // accumulators for the full node
    double node_accum = 0.0;
    for (std::size_t c = 0; c < n_classes_; ++c) {
      const double k = static_cast<double>(node_counts_[c]);
      node_accum += gini ? k * k : nlog2_[node_counts_[c]];
    }

    std::size_t valid_seen = 0;
    for (std::size_t f : features) {
      if (valid_seen >= max_feat_) break;
      const std::uint32_t* ids = &sorted_[f * n_ + begin];
      const double* vals = &values_[f * n_ + begin];
      if (vals[0] == vals[count - 1]) continue;  // constant in this node
      ++valid_seen;

      std::fill(left_counts_.begin(), left_counts_.end(), 0);
      double left_accum = 0.0, right_accum = node_accum;
      double left_n = 0.0;
      for (std::size_t i = 0; i < count - 1; ++i) {
        const std::size_t cls = static_cast<std::size_t>(y_[ids[i]]);
        const std::size_t k = left_counts_[cls]++;
        const std::size_t node_k = node_counts_[cls];
        if (gini) {
          left_accum += static_cast<double>(2 * k + 1);
          right_accum -= static_cast<double>(2 * (node_k - k) - 1);
        } else {
          left_accum += nlog2_[k + 1] - nlog2_[k];
          right_accum += nlog2_[node_k - k - 1] - nlog2_[node_k - k];
        }
        left_n += 1.0;
        if (vals[i] == vals[i + 1]) continue;
        const double right_n = n - left_n;
        const double children =
            (left_n * impurity_from(left_accum, left_n) +
             right_n * impurity_from(right_accum, right_n)) /
            n;
        const double gain = node_impurity - children;
        if (gain > best.gain + 1e-12) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (vals[i] + vals[i + 1]);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  /// Splits every feature's sorted segment by the chosen predicate,
  /// preserving order, and returns the left block size.
  std::size_t partition_segments(std::size_t begin, std::size_t end,
                                 std::size_t split_feature, double threshold) {
    const double* col = xt_->row(split_feature).data();
    std::size_t left_size = 0;
    for (std::size_t f = 0; f < x_.cols; ++f) {
      std::uint32_t* ids = &sorted_[f * n_ + begin];
      double* vals = &values_[f * n_ + begin];
      const std::size_t count = end - begin;
      std::size_t l = 0, r = 0;
      for (std::size_t i = 0; i < count; ++i) {
        if (col[ids[i]] <= threshold) {
          ids[l] = ids[i];
          vals[l] = vals[i];
          ++l;
        } else {
          scratch_idx_[r] = ids[i];
          scratch_val_[r] = vals[i];
          ++r;
        }
      }
      std::copy(scratch_idx_.begin(), scratch_idx_.begin() + static_cast<std::ptrdiff_t>(r), ids + l);
      std::copy(scratch_val_.begin(), scratch_val_.begin() + static_cast<std::ptrdiff_t>(r), vals + l);
      left_size = l;
    }
    return left_size;
  }

  void refresh_node_counts(std::size_t begin, std::size_t end) {
    std::fill(node_counts_.begin(), node_counts_.end(), 0);
    const std::uint32_t* ids = &sorted_[begin];  // feature 0's segment
    for (std::size_t i = 0; i < end - begin; ++i)
      node_counts_[static_cast<std::size_t>(y_[ids[i]])]++;
  }

  int grow(std::size_t begin, std::size_t end, int depth) {
    refresh_node_counts(begin, end);
    const std::size_t count = end - begin;
    double node_accum = 0.0;
    for (std::size_t c = 0; c < n_classes_; ++c) {
      const double k = static_cast<double>(node_counts_[c]);
      node_accum += cfg_.criterion == Criterion::kGini
                        ? k * k
                        : nlog2_[node_counts_[c]];
    }
    const double node_impurity =
        impurity_from(node_accum, static_cast<double>(count));

    Split split;
    if (count >= 2 && node_impurity > 0.0)
      split = best_split(begin, end, node_impurity);

    // stop at a pure node, a node below 2 rows, or a node where every
    // candidate feature is constant; an impure node otherwise always splits
    // on its best boundary, even a zero-gain one (XOR-style patterns only
    // resolve below such splits)
    if (split.feature < 0) return make_leaf(begin, end, depth);

    model_.gini_importances[static_cast<std::size_t>(split.feature)] +=
        (static_cast<double>(count) / static_cast<double>(n_)) *
        std::max(split.gain, 0.0);

    const std::size_t left_size = partition_segments(
        begin, end, static_cast<std::size_t>(split.feature), split.threshold);

    const int node_id = static_cast<int>(model_.nodes.size());
    TreeNode node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    model_.nodes.push_back(std::move(node));

    const int left = grow(begin, begin + left_size, depth + 1);
    const int right = grow(begin + left_size, end, depth + 1);
    model_.nodes[static_cast<std::size_t>(node_id)].left = left;
    model_.nodes[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
  }

  const Matrix& x_;
  std::span<const int> y_;
  std::size_t n_classes_;
  TreeConfig cfg_;
  Rng rng_;
  TreeModel model_;
  const Matrix* xt_ = nullptr;         // column-major view of the presort
  std::vector<std::uint32_t> sorted_;  // feature-major sorted sample ids
  std::vector<double> values_;         // matching feature values
  std::vector<double> nlog2_;          // i -> i*log2(i)
  std::vector<std::uint32_t> scratch_idx_;
  std::vector<double> scratch_val_;
  std::vector<std::size_t> left_counts_;
  std::vector<std::size_t> node_counts_;
  std::size_t n_ = 0;
  std::size_t max_feat_ = 0;
};

}  // namespace detail

inline TreeModel fit_tree_rows(const Matrix& x, std::span<const int> y,
                               int n_classes, const TreeConfig& cfg,
                               std::span<const std::size_t> rows) {
  detail::TreeBuilder builder(x, y, n_classes, cfg);
  return builder.build(rows);
}

inline TreeModel fit_tree(const Matrix& x, std::span<const int> y,
                          int n_classes, const TreeConfig& cfg) {
  std::vector<std::size_t> rows(x.rows);
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree_rows(x, y, n_classes, cfg, rows);
}

inline TreeModel fit_tree(const Dataset& train, Criterion criterion,
                          MaxFeatures max_features, std::uint64_t seed) {
  return fit_tree(train.features, train.target, train.class_count,
                  TreeConfig{criterion, max_features, seed});
}

}  // namespace metasel
