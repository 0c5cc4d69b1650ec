#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metasel/stats.hpp"

namespace metasel {

/// Dense row-major matrix of doubles. Plenty for the problem sizes here;
/// rows are handed out as spans so algorithms never copy.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    return {data.data() + r * cols, cols};
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
  }
};

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // population std; constant columns get 1

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    s.mean.resize(x.cols);
    s.scale.resize(x.cols);
    for (std::size_t c = 0; c < x.cols; ++c) {
      const auto col = x.column(c);
      s.mean[c] = mean_of(col);
      const double sd = stddev_pop(col);
      s.scale[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  Matrix apply(const Matrix& x) const {
    Matrix out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t c = 0; c < x.cols; ++c)
        out.at(r, c) = (x.at(r, c) - mean[c]) / scale[c];
    return out;
  }

  std::vector<double> apply_row(std::span<const double> row) const {
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c)
      out[c] = (row[c] - mean[c]) / scale[c];
    return out;
  }
};

/// Population covariance matrix of the columns of x.
inline Matrix covariance_matrix(const Matrix& x) {
  const std::size_t d = x.cols;
  const std::size_t n = x.rows;
  Matrix cov(d, d);
  if (n == 0) return cov;
  std::vector<double> means(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) means[c] += x.at(r, c);
  for (std::size_t c = 0; c < d; ++c) means[c] /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = x.at(r, i) - means[i];
      for (std::size_t j = i; j < d; ++j) {
        cov.at(i, j) += di * (x.at(r, j) - means[j]);
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov.at(i, j) /= static_cast<double>(n);
      cov.at(j, i) = cov.at(i, j);
    }
  return cov;
}

/// In-place Cholesky factorization (lower triangle). Returns false when the
/// matrix is not positive definite.
inline bool cholesky(Matrix& a) {
  const std::size_t d = a.rows;
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a.at(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= a.at(j, k) * a.at(j, k);
    if (!(diag > 0.0)) return false;
    const double l = std::sqrt(diag);
    a.at(j, j) = l;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = a.at(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a.at(i, k) * a.at(j, k);
      a.at(i, j) = s / l;
    }
  }
  return true;
}

/// Solves L L^T x = b given the Cholesky factor L in the lower triangle.
inline std::vector<double> cholesky_solve(const Matrix& l,
                                          std::span<const double> b) {
  const std::size_t d = l.rows;
  std::vector<double> y(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l.at(i, k) * y[k];
    y[i] = s / l.at(i, i);
  }
  std::vector<double> x(d, 0.0);
  for (std::size_t ii = d; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < d; ++k) s -= l.at(k, ii) * x[k];
    x[ii] = s / l.at(ii, ii);
  }
  return x;
}

}  // namespace metasel
