#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gpath/piecewise_poly.hpp"

namespace gpath {

/// Mean and variance profile (a, b) of a generalized Brownian motion,
/// stored through the densities a' and b'. Both a and b are anchored at 0.
struct ProfilePair {
  std::string name;
  double horizon = 1.0;
  PiecewisePoly a_prime;
  PiecewisePoly b_prime;
  PiecewisePoly abs_a_prime;  // |a'|, split at the roots of a'
  double cc2_value = 0.0;     // int_0^T |a'|^2 d|a| = int_0^T |a'|^3 dt

  /// a(t) = int_0^t a'(s) ds.
  double a(double t) const;
  /// b(t) = int_0^t b'(s) ds.
  double b(double t) const;
};

using ProfileRef = std::shared_ptr<const ProfilePair>;

/// Assemble a profile and compute |a'| and the cc2 integral, without the
/// b' > 0 check. validate_profile reports on the result.
ProfilePair assemble_profile(PiecewisePoly a_prime, PiecewisePoly b_prime, double horizon,
                             std::string name = {});

/// Assemble and check b' > 0; throws NonPositiveVariance on failure.
ProfileRef build_profile(PiecewisePoly a_prime, PiecewisePoly b_prime, double horizon,
                         std::string name = {});

/// a = 0, b(t) = t on [0, T].
ProfileRef wiener_profile(double horizon = 1.0);

/// Same profile object, or two profiles with identical data.
bool same_profile(const ProfileRef& p, const ProfileRef& q);

enum class MeasureKind { DA, DB, D_ABS_A, D_MAB };

/// int_lo^hi f dmu for mu = a, b, |a| or b + |a|; exact for piecewise
/// polynomial integrands up to the Gauss order.
double stieltjes_integral(const PiecewisePoly& f, MeasureKind kind, const ProfilePair& profile,
                          double lo, double hi);
double stieltjes_integral(const PiecewisePoly& f, MeasureKind kind, const ProfilePair& profile);

/// int_lo^hi prod(factors) dt over the merged breakpoints of the factors.
double integrate_product(std::initializer_list<const PiecewisePoly*> factors, double lo, double hi);

struct ValidationReport {
  double a_prime_l2_sq = 0.0;  // ||a'||^2 in L^2[0,T]
  double cc2_value = 0.0;
  double min_b_prime = 0.0;    // over the check nodes
  bool b_prime_positive = false;
  bool a_prime_l2_finite = false;
  bool cc2_finite = false;

  bool ok() const { return b_prime_positive && a_prime_l2_finite && cc2_finite; }
};

ValidationReport validate_profile(const ProfilePair& profile);

/// Minimum of f over the check nodes: Gauss nodes of every piece plus the
/// one-sided limits at both piece ends.
double min_over_check_nodes(const PiecewisePoly& f);

}  // namespace gpath
