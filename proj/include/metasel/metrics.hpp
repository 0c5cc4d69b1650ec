#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metasel/matrix.hpp"
#include "metasel/modelzoo.hpp"
#include "metasel/stats.hpp"

namespace metasel {

using BitMatrix = std::vector<std::vector<std::uint8_t>>;

/// Argmax over a score row; ties go to the lowest grid index.
inline std::size_t top_label(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j)
    if (scores[j] > scores[best]) best = j;
  return best;
}

/// Share of instances whose top-scored label is truly positive.
inline double hit_rate(const Matrix& scores, const BitMatrix& truth) {
  if (scores.rows != truth.size())
    throw Error("hit_rate: row count mismatch");
  if (scores.rows == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.rows; ++i) {
    if (truth[i][top_label(scores.row(i))]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scores.rows);
}

inline double hit_rate(const Matrix& scores,
                       std::span<const LabelVector> truth) {
  BitMatrix bits(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) bits[i] = truth[i].bits;
  return hit_rate(scores, bits);
}

struct EvalMetrics {
  double hit_rate = 0.0;
  double hamming_loss = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_specificity = 0.0;
  double macro_f1 = 0.0;
};

/// Hamming loss plus label-macro precision/recall/specificity/F1. Empty
/// denominators contribute 0, except specificity, which contributes 1 when a
/// label has no negatives.
inline EvalMetrics multilabel_metrics(const BitMatrix& pred,
                                      const BitMatrix& truth) {
  if (pred.size() != truth.size())
    throw Error("multilabel_metrics: instance count mismatch");
  if (pred.empty()) return {};
  const std::size_t n = pred.size();
  const std::size_t p = truth[0].size();
  for (std::size_t i = 0; i < n; ++i)
    if (pred[i].size() != p || truth[i].size() != p)
      throw Error("multilabel_metrics: label count mismatch");

  EvalMetrics out;
  std::size_t disagreements = 0;
  double precision_sum = 0.0, recall_sum = 0.0, specificity_sum = 0.0,
         f1_sum = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool t = truth[i][j] != 0;
      const bool q = pred[i][j] != 0;
      if (t && q) ++tp;
      else if (!t && q) ++fp;
      else if (!t && !q) ++tn;
      else ++fn;
    }
    disagreements += fp + fn;
    const double precision =
        tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                    : 0.0;
    const double recall =
        tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                    : 0.0;
    const double specificity =
        tn + fp > 0 ? static_cast<double>(tn) / static_cast<double>(tn + fp)
                    : 1.0;
    const double f1 = precision + recall > 0.0
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    precision_sum += precision;
    recall_sum += recall;
    specificity_sum += specificity;
    f1_sum += f1;
  }
  out.hamming_loss = static_cast<double>(disagreements) /
                     static_cast<double>(n * p);
  out.macro_precision = precision_sum / static_cast<double>(p);
  out.macro_recall = recall_sum / static_cast<double>(p);
  out.macro_specificity = specificity_sum / static_cast<double>(p);
  out.macro_f1 = f1_sum / static_cast<double>(p);
  return out;
}

inline BitMatrix threshold_scores(const Matrix& scores, double cut = 0.5) {
  BitMatrix out(scores.rows, std::vector<std::uint8_t>(scores.cols, 0));
  for (std::size_t i = 0; i < scores.rows; ++i)
    for (std::size_t j = 0; j < scores.cols; ++j)
      out[i][j] = scores.at(i, j) >= cut ? 1 : 0;
  return out;
}

}  // namespace metasel
