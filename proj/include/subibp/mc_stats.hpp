#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace subibp {

// Mean / standard error summary of a Monte Carlo sample.
// std_error = sample standard deviation / sqrt(n); defined for n >= 2.
struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  // Share of the mean contributed by the largest sample; > 0.10 marks a
  // heavy-tailed estimate as unstable.
  double max_share = 0.0;
  bool unstable = false;
};

inline MCEstimate summarize(std::span<const double> xs) {
  MCEstimate est;
  est.n = xs.size();
  if (xs.empty()) return est;
  double sum = 0.0;
  for (double x : xs) sum += x;
  est.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return est;
  double ss = 0.0;
  double max_abs = 0.0;
  for (double x : xs) {
    const double d = x - est.mean;
    ss += d * d;
    max_abs = std::max(max_abs, std::abs(x));
  }
  const double var = ss / static_cast<double>(xs.size() - 1);
  est.std_error = std::sqrt(var / static_cast<double>(xs.size()));
  if (sum != 0.0) est.max_share = max_abs / std::abs(sum);
  est.unstable = est.max_share > 0.10;
  return est;
}

// Mean and standard error of the pairwise difference a - b.
inline MCEstimate summarize_diff(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired sample size mismatch");
  MCEstimate est;
  est.n = a.size();
  if (a.empty()) return est;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] - b[i];
  est.mean = sum / static_cast<double>(a.size());
  if (a.size() < 2) return est;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) - est.mean;
    ss += d * d;
  }
  est.std_error = std::sqrt(ss / static_cast<double>(a.size() - 1) /
                            static_cast<double>(a.size()));
  return est;
}

}  // namespace subibp
