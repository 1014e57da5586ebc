#include "gpath/cameron_martin.hpp"

#include <cmath>

#include "gpath/error.hpp"

namespace gpath {

CMElement::CMElement(PiecewisePoly density, ProfileRef profile)
    : density_(std::move(density)), profile_(std::move(profile)) {
  if (!profile_) throw Error(ErrorCode::ProfileMismatch, "element without a profile");
  if (std::abs(density_.horizon() - profile_->horizon) > 1e-12 * std::max(1.0, profile_->horizon)) {
    throw Error(ErrorCode::DomainMismatch, "density horizon differs from the profile horizon");
  }
}

double CMElement::operator()(double t) const {
  if (t < 0.0 || t > horizon()) throw Error(ErrorCode::DomainMismatch, "t outside [0, T]");
  return stieltjes_integral(density_, MeasureKind::DB, *profile_, 0.0, t);
}

CMElement& CMElement::operator*=(double s) {
  density_ *= s;
  return *this;
}

CMElement operator+(const CMElement& u, const CMElement& v) {
  require_same_profile(u, v);
  return CMElement(u.density_ + v.density_, u.profile_);
}

CMElement operator-(const CMElement& u, const CMElement& v) {
  require_same_profile(u, v);
  return CMElement(u.density_ - v.density_, u.profile_);
}

void require_same_profile(const CMElement& u, const CMElement& v) {
  if (!same_profile(u.profile(), v.profile())) {
    throw Error(ErrorCode::ProfileMismatch, "elements live over different profiles");
  }
}

SuppElement::SuppElement(CMElement base) : base_(std::move(base)) {
  if (base_.density().has_zero_piece()) {
    throw Error(ErrorCode::NotInSupport, "kernel density vanishes on an interval of positive length");
  }
}

SuppElement identity_element(const ProfileRef& profile) {
  return SuppElement(CMElement(PiecewisePoly::constant(1.0, profile->horizon), profile));
}

PiecewisePoly apply_D(const CMElement& w) { return w.density(); }

CMElement apply_D_inverse(const PiecewisePoly& z, const ProfileRef& profile) {
  return CMElement(z, profile);
}

CMElement odot(const CMElement& w, const SuppElement& k) {
  require_same_profile(w, k.element());
  return CMElement(w.density() * k.density(), w.profile());
}

SuppElement odot(const SuppElement& k1, const SuppElement& k2) {
  return SuppElement(odot(k1.element(), k2));
}

double cm_inner(const CMElement& w1, const CMElement& w2) {
  require_same_profile(w1, w2);
  const auto& p = *w1.profile();
  return integrate_product({&w1.density(), &w2.density(), &p.b_prime}, 0.0, p.horizon);
}

double cm_norm(const CMElement& w) { return std::sqrt(std::max(0.0, cm_inner(w, w))); }

double inner_with_a(const CMElement& w) {
  return stieltjes_integral(w.density(), MeasureKind::DA, *w.profile());
}

CMElement phi_t(double t, const ProfileRef& profile) {
  if (!(t >= 0.0 && t <= profile->horizon)) {
    throw Error(ErrorCode::DomainMismatch, "phi_t requires 0 <= t <= T");
  }
  return CMElement(PiecewisePoly::indicator(0.0, t, profile->horizon), profile);
}

std::vector<CMElement> gram_schmidt(const std::vector<CMElement>& ws) {
  std::vector<CMElement> basis;
  for (const auto& w : ws) {
    if (!basis.empty()) require_same_profile(basis.front(), w);
    const double input_norm = cm_norm(w);
    if (input_norm == 0.0) continue;
    CMElement r = w;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) r = r - cm_inner(r, q) * q;
    }
    const double rn = cm_norm(r);
    if (rn < 1e-10 * input_norm) continue;
    basis.push_back((1.0 / rn) * r);
  }
  return basis;
}

}  // namespace gpath
