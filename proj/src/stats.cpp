#include "gpath/stats.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace gpath {

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = sample_mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  return pairwise_sum(std::span<const double>(sq)) / static_cast<double>(xs.size() - 1);
}

double sample_variance(std::span<const std::complex<double>> xs) {
  if (xs.size() < 2) return 0.0;
  const auto m = sample_mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = std::norm(xs[i] - m);
  return pairwise_sum(std::span<const double>(sq)) / static_cast<double>(xs.size() - 1);
}

double sample_covariance(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2) return 0.0;
  const double mx = sample_mean(xs), my = sample_mean(ys);
  std::vector<double> pr(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) pr[i] = (xs[i] - mx) * (ys[i] - my);
  return pairwise_sum(std::span<const double>(pr)) / static_cast<double>(xs.size() - 1);
}

std::size_t worker_count() {
  if (const char* env = std::getenv("GPATH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t workers) {
  if (workers == 0) workers = worker_count();
  workers = std::min(workers, std::max<std::size_t>(1, n / 256));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& t : pool) t.join();
}

}  // namespace gpath
