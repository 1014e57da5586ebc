#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace gpath {

/// Pairwise (cascade) summation. The result depends only on the order of the
/// input, never on how the input was produced.
template <typename T>
T pairwise_sum(std::span<const T> xs) {
  if (xs.size() <= 8) {
    T s{};
    for (const auto& x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

template <typename T>
T sample_mean(std::span<const T> xs) {
  return xs.empty() ? T{} : pairwise_sum(xs) / static_cast<double>(xs.size());
}

/// Unbiased sample variance; for complex data this is the sum of the real and
/// imaginary variances.
double sample_variance(std::span<const double> xs);
double sample_variance(std::span<const std::complex<double>> xs);
double sample_covariance(std::span<const double> xs, std::span<const double> ys);

/// Standard error of the mean, sqrt(var / n).
template <typename T>
double standard_error(std::span<const T> xs) {
  if (xs.size() < 2) return 0.0;
  return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

std::size_t worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Callers write
/// results into index-addressed slots so the outcome is schedule independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace gpath
