#pragma once

#include <array>
#include <cstddef>

namespace gpath {

inline constexpr std::size_t kGaussOrder = 16;

/// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree <= 2n-1.
struct GaussLegendreRule {
  std::array<double, kGaussOrder> nodes;
  std::array<double, kGaussOrder> weights;
};

const GaussLegendreRule& gauss_legendre();

/// Integrate f over [lo, hi] with the fixed rule.
template <typename F>
double gauss_integrate(F&& f, double lo, double hi) {
  const auto& rule = gauss_legendre();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGaussOrder; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

}  // namespace gpath
