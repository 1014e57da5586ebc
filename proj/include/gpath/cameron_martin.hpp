#pragma once

#include <vector>

#include "gpath/piecewise_poly.hpp"
#include "gpath/profile.hpp"

namespace gpath {

/// Element w of the Cameron-Martin space over a profile, held through its
/// density Dw = w'/b'. The path itself is w(t) = int_0^t Dw db.
class CMElement {
 public:
  CMElement(PiecewisePoly density, ProfileRef profile);

  const PiecewisePoly& density() const { return density_; }
  const ProfileRef& profile() const { return profile_; }
  double horizon() const { return profile_->horizon; }

  /// w(t) = int_0^t Dw db.
  double operator()(double t) const;

  CMElement& operator*=(double s);
  friend CMElement operator*(double s, CMElement w) { return w *= s; }
  friend CMElement operator+(const CMElement& u, const CMElement& v);
  friend CMElement operator-(const CMElement& u, const CMElement& v);

 private:
  PiecewisePoly density_;
  ProfileRef profile_;
};

/// Kernel element k with Dk nonzero except on a finite set: no piece of
/// positive length may carry the zero polynomial. Piecewise polynomial
/// densities are of bounded variation on every piece.
class SuppElement {
 public:
  /// Throws NotInSupport when the density vanishes on a piece.
  explicit SuppElement(CMElement base);

  const CMElement& element() const { return base_; }
  const PiecewisePoly& density() const { return base_.density(); }
  const ProfileRef& profile() const { return base_.profile(); }
  bool bv_certificate() const { return true; }

  operator const CMElement&() const { return base_; }

 private:
  CMElement base_;
};

/// b itself: the element with density 1, identity for the odot product.
SuppElement identity_element(const ProfileRef& profile);

PiecewisePoly apply_D(const CMElement& w);
CMElement apply_D_inverse(const PiecewisePoly& z, const ProfileRef& profile);

/// w odot k = D^{-1}(Dw Dk).
CMElement odot(const CMElement& w, const SuppElement& k);
SuppElement odot(const SuppElement& k1, const SuppElement& k2);

/// (w1, w2)_{C'} = int Dw1 Dw2 db.
double cm_inner(const CMElement& w1, const CMElement& w2);
double cm_norm(const CMElement& w);

/// int_0^T Dw da. Pass w odot k to obtain (w odot k, a)_{C'}.
double inner_with_a(const CMElement& w);

/// Phi_t = D^{-1} chi_[0,t].
CMElement phi_t(double t, const ProfileRef& profile);

/// Modified Gram-Schmidt in (.,.)_{C'} with one reorthogonalisation pass.
/// A vector whose residual norm falls below 1e-10 times its input norm is
/// dropped.
std::vector<CMElement> gram_schmidt(const std::vector<CMElement>& ws);

void require_same_profile(const CMElement& u, const CMElement& v);

}  // namespace gpath
