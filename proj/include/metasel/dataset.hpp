#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "metasel/csv.hpp"
#include "metasel/matrix.hpp"
#include "metasel/rng.hpp"
#include "metasel/stats.hpp"

namespace metasel {

/// A numeric classification dataset. Immutable after construction; all
/// operations below return fresh values.
struct Dataset {
  Matrix features;                        // n x d, finite values only
  std::vector<int> target;                // class indices in 0..c-1
  std::vector<std::string> feature_names; // d names
  int class_count = 0;
  // Original target labels in encoding order (index i held label
  // class_labels[i]); kept for reporting and for the CSV serializer.
  std::vector<std::string> class_labels;

  std::size_t n() const { return features.rows; }
  std::size_t d() const { return features.cols; }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
    for (int y : target) counts[static_cast<std::size_t>(y)]++;
    return counts;
  }

  Dataset subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.features = Matrix(rows.size(), d());
    out.target.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto src = features.row(rows[i]);
      std::copy(src.begin(), src.end(), out.features.row(i).begin());
      out.target[i] = target[rows[i]];
    }
    out.feature_names = feature_names;
    out.class_count = class_count;
    out.class_labels = class_labels;
    return out;
  }
};

struct SplitPair {
  Dataset train;
  Dataset validation;
  std::uint64_t seed = 0;
};

struct FoldPlan {
  std::vector<int> fold_assignments;  // length n, values in 0..k-1
  int k = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline void validate_dataset(const Dataset& ds, const std::string& origin) {
  if (ds.n() < 1 || ds.d() < 1) throw Error(origin + ": empty dataset");
  if (ds.class_count < 2) throw Error(origin + ": fewer than 2 classes");
  std::vector<bool> seen(static_cast<std::size_t>(ds.class_count), false);
  for (int y : ds.target) {
    if (y < 0 || y >= ds.class_count)
      throw Error(origin + ": target value out of range");
    seen[static_cast<std::size_t>(y)] = true;
  }
  if (std::count(seen.begin(), seen.end(), true) < 2)
    throw Error(origin + ": fewer than 2 classes");
  for (double v : ds.features.data)
    if (!std::isfinite(v)) throw Error(origin + ": non-finite feature value");
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  return 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

/// Loads a CSV with a header row, '.' decimals and empty cells for missing
/// values. Feature columns must be numeric; missing entries are imputed with
/// the column median (0 when a column is entirely missing). The target
/// column is label-encoded in first-appearance order.
inline Dataset load_csv(const std::string& path,
                        const std::string& target_column) {
  const CsvTable table = read_csv_table(path);
  const int target_idx = table.column(target_column);
  if (target_idx < 0)
    throw Error(path + ": target column '" + target_column + "' not found");
  if (table.rows.empty()) throw Error(path + ": no data rows");

  const std::size_t n = table.rows.size();
  const std::size_t d = table.header.size() - 1;
  if (d == 0) throw Error(path + ": no feature columns");

  Dataset ds;
  ds.features = Matrix(n, d);
  ds.target.resize(n);
  std::vector<std::vector<std::size_t>> missing_per_col(d);

  std::size_t out_col = 0;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (static_cast<int>(c) == target_idx) continue;
    ds.feature_names.push_back(table.header[c]);
    for (std::size_t r = 0; r < n; ++r) {
      const std::string& cell = table.rows[r][c];
      if (cell.empty()) {
        missing_per_col[out_col].push_back(r);
        continue;
      }
      const auto v = parse_double(cell);
      if (!v || !std::isfinite(*v)) {
        throw Error(path + ": non-numeric feature column '" +
                    table.header[c] + "' (value '" + cell +
                    "'); only numeric features are supported");
      }
      ds.features.at(r, out_col) = *v;
    }
    ++out_col;
  }

  for (std::size_t c = 0; c < d; ++c) {
    if (missing_per_col[c].empty()) continue;
    std::vector<double> present;
    present.reserve(n - missing_per_col[c].size());
    std::vector<bool> is_missing(n, false);
    for (std::size_t r : missing_per_col[c]) is_missing[r] = true;
    for (std::size_t r = 0; r < n; ++r)
      if (!is_missing[r]) present.push_back(ds.features.at(r, c));
    const double fill = detail::median_of(std::move(present));
    for (std::size_t r : missing_per_col[c]) ds.features.at(r, c) = fill;
  }

  for (std::size_t r = 0; r < n; ++r) {
    const std::string& label = table.rows[r][static_cast<std::size_t>(target_idx)];
    auto it = std::find(ds.class_labels.begin(), ds.class_labels.end(), label);
    if (it == ds.class_labels.end()) {
      ds.class_labels.push_back(label);
      ds.target[r] = static_cast<int>(ds.class_labels.size()) - 1;
    } else {
      ds.target[r] = static_cast<int>(it - ds.class_labels.begin());
    }
  }
  ds.class_count = static_cast<int>(ds.class_labels.size());
  if (ds.class_count < 2) throw Error(path + ": fewer than 2 classes");
  detail::validate_dataset(ds, path);
  return ds;
}

/// Writes the load_csv dialect back out; loading the result reproduces the
/// dataset bit-exactly.
inline void write_csv(const Dataset& ds, const std::string& path,
                      const std::string& target_column = "class") {
  CsvTable table;
  table.header = ds.feature_names;
  table.header.push_back(target_column);
  table.rows.resize(ds.n());
  for (std::size_t r = 0; r < ds.n(); ++r) {
    auto& row = table.rows[r];
    row.reserve(ds.d() + 1);
    for (std::size_t c = 0; c < ds.d(); ++c)
      row.push_back(format_double(ds.features.at(r, c)));
    const int y = ds.target[r];
    row.push_back(ds.class_labels.empty() ? std::to_string(y)
                                          : ds.class_labels[static_cast<std::size_t>(y)]);
  }
  write_csv_table(path, table);
}

/// Stratified train/validation split. The validation row count per class is
/// apportioned by largest remainder so the overall fraction stays within one
/// row of the request, and every class keeps at least one row on each side.
inline SplitPair split(const Dataset& ds, double validation_fraction,
                       std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw Error("split: validation fraction must lie in (0,1)");
  const auto counts = ds.class_counts();
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] < 2)
      throw Error("split: class " + std::to_string(l) +
                  " has fewer than 2 instances, cannot stratify");
  }

  const std::size_t c = counts.size();
  const auto total = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(ds.n())));
  std::vector<std::size_t> take(c);
  std::vector<double> remainder(c);
  std::size_t assigned = 0;
  for (std::size_t l = 0; l < c; ++l) {
    const double quota = validation_fraction * static_cast<double>(counts[l]);
    take[l] = static_cast<std::size_t>(quota);
    remainder[l] = quota - static_cast<double>(take[l]);
    assigned += take[l];
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return a < b;
  });
  for (std::size_t i = 0; assigned < total && i < c; ++i) {
    const std::size_t l = order[i];
    if (take[l] + 1 <= counts[l] - 1) {
      ++take[l];
      ++assigned;
    }
  }
  for (std::size_t l = 0; l < c; ++l)
    take[l] = std::clamp<std::size_t>(take[l], 1, counts[l] - 1);

  std::vector<std::vector<std::size_t>> by_class(c);
  for (std::size_t r = 0; r < ds.n(); ++r)
    by_class[static_cast<std::size_t>(ds.target[r])].push_back(r);

  Rng rng(seed);
  std::vector<std::size_t> train_rows, val_rows;
  for (std::size_t l = 0; l < c; ++l) {
    rng.shuffle(by_class[l]);
    for (std::size_t i = 0; i < by_class[l].size(); ++i) {
      (i < take[l] ? val_rows : train_rows).push_back(by_class[l][i]);
    }
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(val_rows.begin(), val_rows.end());

  SplitPair out;
  out.train = ds.subset(train_rows);
  out.validation = ds.subset(val_rows);
  out.seed = seed;
  return out;
}

/// Stratified k-fold assignment: per class the shuffled members are dealt
/// round-robin, so per-class fold counts differ by at most one.
inline FoldPlan stratified_folds(const Dataset& ds, int k,
                                 std::uint64_t seed) {
  if (k < 2) throw Error("stratified_folds: k must be at least 2");
  const auto counts = ds.class_counts();
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] < static_cast<std::size_t>(k))
      throw Error("stratified_folds: class " + std::to_string(l) + " has " +
                  std::to_string(counts[l]) + " instances, fewer than k=" +
                  std::to_string(k));
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_assignments.assign(ds.n(), 0);
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> by_class(counts.size());
  for (std::size_t r = 0; r < ds.n(); ++r)
    by_class[static_cast<std::size_t>(ds.target[r])].push_back(r);
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i)
      plan.fold_assignments[members[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return plan;
}

}  // namespace metasel
