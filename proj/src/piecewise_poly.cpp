#include "gpath/piecewise_poly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "gpath/error.hpp"

namespace gpath {

namespace {

bool same_horizon(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

Coeffs trimmed(Coeffs c, double rel = 0.0) {
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  while (!c.empty() && std::abs(c.back()) <= rel * scale) c.pop_back();
  return c;
}

Coeffs poly_add(const Coeffs& p, const Coeffs& q, double sign) {
  Coeffs r(std::max(p.size(), q.size()), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) r[i] += p[i];
  for (std::size_t i = 0; i < q.size(); ++i) r[i] += sign * q[i];
  return r;
}

double newton_polish(const Coeffs& c, double x) {
  for (int it = 0; it < 8; ++it) {
    double p = 0.0, dp = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) {
      dp = dp * x + p;
      p = p * x + c[i];
    }
    if (dp == 0.0) break;
    const double step = p / dp;
    x -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

template <typename Combine>
PiecewisePoly combine(const PiecewisePoly& f, const PiecewisePoly& g, Combine op) {
  if (!same_horizon(f.horizon(), g.horizon())) {
    throw Error(ErrorCode::DomainMismatch, "piecewise polynomials on different horizons");
  }
  auto bps = merge_breakpoints(f.breakpoints(), g.breakpoints());
  std::vector<Coeffs> coeffs;
  coeffs.reserve(bps.size() - 1);
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    const auto& pf = f.piece(f.piece_for_interval(bps[i], bps[i + 1]));
    const auto& pg = g.piece(g.piece_for_interval(bps[i], bps[i + 1]));
    coeffs.push_back(op(pf, pg));
  }
  return PiecewisePoly(std::move(bps), std::move(coeffs));
}

}  // namespace

double horner(const Coeffs& c, double t) {
  double r = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) r = r * t + c[i];
  return r;
}

Coeffs poly_multiply(const Coeffs& p, const Coeffs& q) {
  if (p.empty() || q.empty()) return {};
  Coeffs r(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

std::vector<double> merge_breakpoints(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  const double tol = 1e-13 * std::max(1.0, out.back());
  std::vector<double> uniq;
  uniq.reserve(out.size());
  for (double t : out) {
    if (uniq.empty() || t - uniq.back() > tol) uniq.push_back(t);
  }
  // Keep the exact horizon of the inputs as the last breakpoint.
  if (uniq.back() != out.back()) uniq.back() = out.back();
  return uniq;
}

PiecewisePoly::PiecewisePoly(std::vector<double> breakpoints, std::vector<Coeffs> coeffs)
    : breakpoints_(std::move(breakpoints)), coeffs_(std::move(coeffs)) {
  if (breakpoints_.size() < 2) {
    throw Error(ErrorCode::DomainMismatch, "need at least two breakpoints");
  }
  if (breakpoints_.front() != 0.0) {
    throw Error(ErrorCode::DomainMismatch, "first breakpoint must be 0");
  }
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i + 1] > breakpoints_[i])) {
      throw Error(ErrorCode::DomainMismatch, "breakpoints must be strictly increasing");
    }
  }
  if (!std::isfinite(breakpoints_.back())) {
    throw Error(ErrorCode::DomainMismatch, "horizon must be finite");
  }
  if (coeffs_.size() + 1 != breakpoints_.size()) {
    throw Error(ErrorCode::DomainMismatch,
                "expected " + std::to_string(breakpoints_.size() - 1) + " coefficient lists, got " +
                    std::to_string(coeffs_.size()));
  }
}

PiecewisePoly PiecewisePoly::constant(double value, double horizon) {
  return PiecewisePoly({0.0, horizon}, {Coeffs{value}});
}

PiecewisePoly PiecewisePoly::polynomial(Coeffs coeffs, double horizon) {
  return PiecewisePoly({0.0, horizon}, {std::move(coeffs)});
}

PiecewisePoly PiecewisePoly::indicator(double lo, double hi, double horizon) {
  if (lo < 0.0 || hi > horizon || lo > hi) {
    throw Error(ErrorCode::DomainMismatch, "indicator interval outside [0, T]");
  }
  std::vector<double> bps{0.0};
  std::vector<Coeffs> coeffs;
  if (lo > 0.0) {
    bps.push_back(lo);
    coeffs.push_back({0.0});
  }
  if (hi > lo) {
    bps.push_back(hi);
    coeffs.push_back({1.0});
  }
  if (hi < horizon) {
    bps.push_back(horizon);
    coeffs.push_back({0.0});
  }
  if (coeffs.empty()) return zero(horizon);
  return PiecewisePoly(std::move(bps), std::move(coeffs));
}

std::size_t PiecewisePoly::piece_index(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  std::size_t idx = it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return std::min(idx, coeffs_.size() - 1);
}

std::size_t PiecewisePoly::piece_for_interval(double lo, double hi) const {
  return piece_index(0.5 * (lo + hi));
}

double PiecewisePoly::operator()(double t) const { return horner(coeffs_[piece_index(t)], t); }

double PiecewisePoly::eval_piece(std::size_t piece, double t) const {
  return horner(coeffs_[piece], t);
}

int PiecewisePoly::degree() const {
  int d = -1;
  for (const auto& c : coeffs_) d = std::max(d, static_cast<int>(trimmed(c).size()) - 1);
  return d;
}

bool PiecewisePoly::is_identically_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Coeffs& c) { return trimmed(c).empty(); });
}

bool PiecewisePoly::has_zero_piece() const {
  return std::any_of(coeffs_.begin(), coeffs_.end(), [](const Coeffs& c) { return trimmed(c).empty(); });
}

PiecewisePoly PiecewisePoly::refined(std::span<const double> extra) const {
  std::vector<double> pts;
  for (double t : extra)
    if (t > 0.0 && t < horizon()) pts.push_back(t);
  std::sort(pts.begin(), pts.end());
  if (pts.empty()) return *this;
  auto bps = merge_breakpoints(breakpoints_, pts);
  std::vector<Coeffs> coeffs;
  coeffs.reserve(bps.size() - 1);
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    coeffs.push_back(coeffs_[piece_for_interval(bps[i], bps[i + 1])]);
  }
  return PiecewisePoly(std::move(bps), std::move(coeffs));
}

PiecewisePoly PiecewisePoly::abs() const {
  std::vector<double> bps{0.0};
  std::vector<Coeffs> coeffs;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const double lo = breakpoints_[i];
    const double hi = breakpoints_[i + 1];
    std::vector<double> cuts{lo};
    for (double r : real_roots_in(coeffs_[i], lo, hi)) cuts.push_back(r);
    cuts.push_back(hi);
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
      Coeffs c = coeffs_[i];
      if (horner(c, 0.5 * (cuts[j] + cuts[j + 1])) < 0.0) {
        for (double& v : c) v = -v;
      }
      bps.push_back(cuts[j + 1]);
      coeffs.push_back(std::move(c));
    }
  }
  return PiecewisePoly(std::move(bps), std::move(coeffs));
}

PiecewisePoly& PiecewisePoly::operator*=(double s) {
  for (auto& c : coeffs_)
    for (double& v : c) v *= s;
  return *this;
}

PiecewisePoly operator*(const PiecewisePoly& f, const PiecewisePoly& g) {
  return combine(f, g, [](const Coeffs& p, const Coeffs& q) { return poly_multiply(p, q); });
}

PiecewisePoly operator+(const PiecewisePoly& f, const PiecewisePoly& g) {
  return combine(f, g, [](const Coeffs& p, const Coeffs& q) { return poly_add(p, q, 1.0); });
}

PiecewisePoly operator-(const PiecewisePoly& f, const PiecewisePoly& g) {
  return combine(f, g, [](const Coeffs& p, const Coeffs& q) { return poly_add(p, q, -1.0); });
}

double max_coeff_diff(const PiecewisePoly& f, const PiecewisePoly& g) {
  const PiecewisePoly d = f - g;
  double m = 0.0;
  for (const auto& c : d.all_coeffs())
    for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> real_roots_in(const Coeffs& raw, double lo, double hi) {
  const Coeffs c = trimmed(raw, 1e-14);
  std::vector<double> roots;
  const int deg = static_cast<int>(c.size()) - 1;
  if (deg <= 0) return roots;
  if (deg == 1) {
    roots.push_back(-c[0] / c[1]);
  } else if (deg == 2) {
    const double a = c[2], b = c[1], cc = c[0];
    const double disc = b * b - 4.0 * a * cc;
    if (disc == 0.0) {
      roots.push_back(-b / (2.0 * a));
    } else if (disc > 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      roots.push_back(q / a);
      if (q != 0.0) roots.push_back(cc / q);
    }
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -c[i] / c[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    for (const auto& z : solver.eigenvalues()) {
      if (std::abs(z.imag()) <= 1e-7 * std::max(1.0, std::abs(z))) {
        roots.push_back(newton_polish(c, z.real()));
      }
    }
  }
  const double edge = 1e-12 * std::max(1.0, hi - lo);
  std::vector<double> inside;
  for (double r : roots)
    if (r > lo + edge && r < hi - edge) inside.push_back(r);
  std::sort(inside.begin(), inside.end());
  std::vector<double> uniq;
  for (double r : inside)
    if (uniq.empty() || r - uniq.back() > 1e-10 * std::max(1.0, hi - lo)) uniq.push_back(r);
  return uniq;
}

}  // namespace gpath
