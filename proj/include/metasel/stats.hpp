#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace metasel {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// All standard deviations and variances in this library use the population
// convention (divide by the count), chosen once globally.

inline double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance_pop(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) {
    const double d = x - m;
    s += d * d;
  }
  return s / static_cast<double>(v.size());
}

inline double stddev_pop(std::span<const double> v) {
  return std::sqrt(variance_pop(v));
}

inline double covariance_pop(std::span<const double> a,
                             std::span<const double> b) {
  const std::size_t n = a.size();
  if (n == 0 || b.size() != n) return 0.0;
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(n);
}

/// Pearson correlation; 0 when either side is constant.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double va = variance_pop(a);
  const double vb = variance_pop(b);
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return covariance_pop(a, b) / std::sqrt(va * vb);
}

/// Moment skewness g1 = m3 / m2^{3/2}; 0 for a constant sample.
inline double skewness_pop(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double n = static_cast<double>(v.size());
  m2 /= n;
  m3 /= n;
  if (m2 <= 0.0) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

/// Excess kurtosis g2 = m4 / m2^2 - 3; 0 for a constant sample.
inline double excess_kurtosis_pop(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - m;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(v.size());
  m2 /= n;
  m4 /= n;
  if (m2 <= 0.0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

struct SummaryStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

inline SummaryStats summarize(std::span<const double> v) {
  SummaryStats s;
  if (v.empty()) return s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  s.mean = mean_of(v);
  s.std = stddev_pop(v);
  return s;
}

/// Separate aggregation of the strictly negative and strictly positive
/// entries of a sample; zeros belong to neither side. An empty side
/// reports zeros. neg_extreme is the most negative value, pos_extreme
/// the largest positive one.
struct SignedStats {
  double neg_extreme = 0.0;
  double neg_mean = 0.0;
  double neg_std = 0.0;
  double pos_extreme = 0.0;
  double pos_mean = 0.0;
  double pos_std = 0.0;
};

inline SignedStats signed_stats(std::span<const double> values) {
  std::vector<double> neg, pos;
  for (double x : values) {
    if (x < 0.0) neg.push_back(x);
    else if (x > 0.0) pos.push_back(x);
  }
  SignedStats out;
  if (!neg.empty()) {
    out.neg_extreme = *std::min_element(neg.begin(), neg.end());
    out.neg_mean = mean_of(neg);
    out.neg_std = stddev_pop(neg);
  }
  if (!pos.empty()) {
    out.pos_extreme = *std::max_element(pos.begin(), pos.end());
    out.pos_mean = mean_of(pos);
    out.pos_std = stddev_pop(pos);
  }
  return out;
}

/// Digamma function. Recurrence below 6, then the asymptotic series;
/// accurate to ~1e-12 for the positive arguments used here.
inline double digamma(double x) {
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
  return result;
}

}  // namespace metasel
