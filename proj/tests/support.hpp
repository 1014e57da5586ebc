#pragma once

// Generators and exact oracles shared by the unit and acceptance tests. The
// oracles work on raw coefficient lists with long double arithmetic and do
// not call into the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gpath/cameron_martin.hpp"
#include "gpath/piecewise_poly.hpp"
#include "gpath/profile.hpp"

namespace testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin() { return integer(0, 1) == 1; }

  gpath::Coeffs coeffs(int degree, double scale = 1.0) {
    gpath::Coeffs c(static_cast<std::size_t>(degree) + 1);
    for (double& x : c) x = uniform(-scale, scale);
    return c;
  }

  /// 0 = t_0 < ... < t_pieces = T with gaps of at least T / (4 pieces).
  std::vector<double> breakpoints(double T, int pieces) {
    std::vector<double> w(static_cast<std::size_t>(pieces));
    double total = 0.0;
    for (double& x : w) total += (x = uniform(1.0, 3.0));
    std::vector<double> bp{0.0};
    double acc = 0.0;
    for (int i = 0; i + 1 < pieces; ++i) bp.push_back((acc += w[static_cast<std::size_t>(i)]) / total * T);
    bp.push_back(T);
    return bp;
  }

  gpath::PiecewisePoly piecewise(const std::vector<double>& bp, int max_degree, double scale = 1.0) {
    std::vector<gpath::Coeffs> cs;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) cs.push_back(coeffs(integer(0, max_degree), scale));
    return gpath::PiecewisePoly(bp, cs);
  }

  gpath::PiecewisePoly piecewise(double T, int max_pieces, int max_degree, double scale = 1.0) {
    return piecewise(breakpoints(T, integer(1, max_pieces)), max_degree, scale);
  }

  /// Density with no identically zero piece: a nonzero constant term is forced.
  gpath::PiecewisePoly kernel_density(double T, int max_pieces, int max_degree) {
    auto bp = breakpoints(T, integer(1, max_pieces));
    std::vector<gpath::Coeffs> cs;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
      auto c = coeffs(integer(0, max_degree));
      c[0] = (coin() ? 1.0 : -1.0) * uniform(0.5, 1.5);
      cs.push_back(c);
    }
    return gpath::PiecewisePoly(bp, cs);
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

using LCoeffs = std::vector<long double>;

inline LCoeffs to_long(const gpath::Coeffs& c) { return LCoeffs(c.begin(), c.end()); }

inline LCoeffs mul(const LCoeffs& p, const LCoeffs& q) {
  if (p.empty() || q.empty()) return {};
  LCoeffs r(p.size() + q.size() - 1, 0.0L);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

/// int_lo^hi p(t) dt through the antiderivative sum_n c_n t^{n+1} / (n+1).
inline long double antiderivative_integral(const LCoeffs& p, long double lo, long double hi) {
  long double s = 0.0L;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const long double k = static_cast<long double>(n + 1);
    s += p[n] * (std::pow(hi, k) - std::pow(lo, k)) / k;
  }
  return s;
}

/// Sorted union of breakpoint lists without relying on the library merge.
inline std::vector<double> union_points(std::vector<std::vector<double>> lists) {
  std::vector<double> all;
  for (auto& l : lists) all.insert(all.end(), l.begin(), l.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double t : all)
    if (out.empty() || t - out.back() > 1e-13) out.push_back(t);
  return out;
}

/// Coefficients of f on the piece containing (lo, hi), found by the midpoint.
inline const gpath::Coeffs& piece_on(const gpath::PiecewisePoly& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const auto bp = f.breakpoints();
  std::size_t i = 0;
  while (i + 2 < bp.size() && mid >= bp[i + 1]) ++i;
  return f.piece(i);
}

/// int_lo^hi prod(factors) dt, exactly per common piece.
inline long double exact_product(const std::vector<const gpath::PiecewisePoly*>& factors, double lo, double hi) {
  std::vector<std::vector<double>> lists{{lo, hi}};
  for (const auto* f : factors) {
    std::vector<double> inner;
    for (double t : f->breakpoints())
      if (t > lo && t < hi) inner.push_back(t);
    lists.push_back(inner);
  }
  const auto pts = union_points(lists);
  long double total = 0.0L;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    LCoeffs prod{1.0L};
    for (const auto* f : factors) prod = mul(prod, to_long(piece_on(*f, pts[i], pts[i + 1])));
    total += antiderivative_integral(prod, pts[i], pts[i + 1]);
  }
  return total;
}

inline bool close_rel(double x, double y, double rel, double floor = 1.0) {
  return std::abs(x - y) <= rel * std::max(floor, std::max(std::abs(x), std::abs(y)));
}

}  // namespace testing
