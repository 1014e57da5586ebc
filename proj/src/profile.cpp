#include "gpath/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpath/error.hpp"
#include "gpath/quadrature.hpp"

namespace gpath {

namespace {

bool close_horizon(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

const PiecewisePoly& weight_of(MeasureKind kind, const ProfilePair& p) {
  switch (kind) {
    case MeasureKind::DA: return p.a_prime;
    case MeasureKind::DB: return p.b_prime;
    case MeasureKind::D_ABS_A: return p.abs_a_prime;
    case MeasureKind::D_MAB: break;
  }
  throw Error(ErrorCode::DomainMismatch, "D_MAB has no single stored weight");
}

}  // namespace

double integrate_product(std::initializer_list<const PiecewisePoly*> factors, double lo, double hi) {
  if (hi <= lo) return 0.0;
  std::vector<double> cuts{lo, hi};
  for (const auto* f : factors) {
    for (double t : f->breakpoints())
      if (t > lo && t < hi) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<std::size_t> idx(factors.size());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double l = cuts[i], r = cuts[i + 1];
    std::size_t k = 0;
    for (const auto* f : factors) idx[k++] = f->piece_for_interval(l, r);
    total += gauss_integrate(
        [&](double t) {
          double v = 1.0;
          std::size_t j = 0;
          for (const auto* f : factors) v *= f->eval_piece(idx[j++], t);
          return v;
        },
        l, r);
  }
  return total;
}

double ProfilePair::a(double t) const { return integrate_product({&a_prime}, 0.0, t); }

double ProfilePair::b(double t) const { return integrate_product({&b_prime}, 0.0, t); }

ProfilePair assemble_profile(PiecewisePoly a_prime, PiecewisePoly b_prime, double horizon,
                             std::string name) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::DomainMismatch, "horizon T must be positive and finite");
  }
  if (!close_horizon(a_prime.horizon(), horizon) || !close_horizon(b_prime.horizon(), horizon)) {
    throw Error(ErrorCode::DomainMismatch, "profile densities must be defined on [0, T]");
  }
  ProfilePair p{std::move(name), horizon, std::move(a_prime), std::move(b_prime),
                PiecewisePoly::zero(horizon), 0.0};
  p.abs_a_prime = p.a_prime.abs();
  p.cc2_value = integrate_product({&p.abs_a_prime, &p.abs_a_prime, &p.abs_a_prime}, 0.0, horizon);
  return p;
}

ProfileRef build_profile(PiecewisePoly a_prime, PiecewisePoly b_prime, double horizon,
                         std::string name) {
  auto p = std::make_shared<ProfilePair>(
      assemble_profile(std::move(a_prime), std::move(b_prime), horizon, std::move(name)));
  const double min_b = min_over_check_nodes(p->b_prime);
  if (!(min_b > 0.0)) {
    throw Error(ErrorCode::NonPositiveVariance,
                "b'(t) must be positive on [0, T]; minimum over check nodes is " + std::to_string(min_b));
  }
  return p;
}

ProfileRef wiener_profile(double horizon) {
  return build_profile(PiecewisePoly::zero(horizon), PiecewisePoly::constant(1.0, horizon), horizon,
                       "wiener");
}

bool same_profile(const ProfileRef& p, const ProfileRef& q) {
  if (p == q) return true;
  if (!p || !q) return false;
  return p->horizon == q->horizon && p->a_prime == q->a_prime && p->b_prime == q->b_prime;
}

double stieltjes_integral(const PiecewisePoly& f, MeasureKind kind, const ProfilePair& profile,
                          double lo, double hi) {
  const double T = profile.horizon;
  if (!(lo >= 0.0) || !(hi <= T) || !(lo <= hi)) {
    throw Error(ErrorCode::DomainMismatch, "integration range must satisfy 0 <= lo <= hi <= T");
  }
  if (!close_horizon(f.horizon(), T)) {
    throw Error(ErrorCode::DomainMismatch, "integrand horizon differs from the profile horizon");
  }
  if (kind == MeasureKind::D_MAB) {
    const PiecewisePoly weight = profile.b_prime + profile.abs_a_prime;
    return integrate_product({&f, &weight}, lo, hi);
  }
  return integrate_product({&f, &weight_of(kind, profile)}, lo, hi);
}

double stieltjes_integral(const PiecewisePoly& f, MeasureKind kind, const ProfilePair& profile) {
  return stieltjes_integral(f, kind, profile, 0.0, profile.horizon);
}

double min_over_check_nodes(const PiecewisePoly& f) {
  const auto& rule = gauss_legendre();
  double m = std::numeric_limits<double>::infinity();
  const auto bps = f.breakpoints();
  for (std::size_t i = 0; i < f.num_pieces(); ++i) {
    const double lo = bps[i], hi = bps[i + 1];
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    m = std::min({m, f.eval_piece(i, lo), f.eval_piece(i, hi)});
    for (double x : rule.nodes) m = std::min(m, f.eval_piece(i, mid + half * x));
  }
  return m;
}

ValidationReport validate_profile(const ProfilePair& profile) {
  ValidationReport r;
  r.a_prime_l2_sq = integrate_product({&profile.a_prime, &profile.a_prime}, 0.0, profile.horizon);
  r.cc2_value = profile.cc2_value;
  r.min_b_prime = min_over_check_nodes(profile.b_prime);
  r.b_prime_positive = r.min_b_prime > 0.0;
  r.a_prime_l2_finite = std::isfinite(r.a_prime_l2_sq);
  r.cc2_finite = std::isfinite(r.cc2_value);
  return r;
}

}  // namespace gpath
