#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "gpath/cameron_martin.hpp"
#include "gpath/paths.hpp"

namespace gpath {

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxMonomialDegree = 12;

/// Scaling parameter of the analytic function space integral: either a
/// complex lambda with Re(lambda) > 0, or the Feynman parameter q != 0 which
/// stands for lambda = -iq. Square roots use the principal branch.
class ComplexParam {
 public:
  static ComplexParam lambda(cplx value);
  static ComplexParam feynman(double q);

  bool is_feynman() const { return feynman_; }
  double q() const { return q_; }
  cplx value() const { return value_; }
  cplx inv() const;       // lambda^{-1}; i/q in Feynman mode
  cplx sqrt() const;      // lambda^{1/2}
  cplx inv_sqrt() const;  // lambda^{-1/2} = (lambda^{-1})^{1/2}

 private:
  ComplexParam(cplx v, bool f, double q) : value_(v), feynman_(f), q_(q) {}
  cplx value_;
  bool feynman_;
  double q_;
};

/// prod_j (theta odot k_j, x)~ ; ks empty is the constant functional 1.
struct MonomialSpec {
  CMElement theta;
  std::vector<SuppElement> ks;

  std::size_t degree() const { return ks.size(); }
  /// theta odot k_j for every j.
  std::vector<CMElement> factors() const;
};

/// F(x) = exp(c (w, x)~). A real part in c is unbounded and must be allowed
/// explicitly before Monte Carlo will sample it.
struct ExpLinear {
  CMElement w;
  cplx c;
  bool allow_real_exponent = false;
};

/// F(x) = cos((w, x)~).
struct CosLinear {
  CMElement w;
};

using FunctionalSpec = std::variant<MonomialSpec, ExpLinear, CosLinear>;

/// The elements u whose PWZ integrals (u, x)~ the functional depends on.
std::vector<CMElement> linear_forms(const FunctionalSpec& f);
/// F given the values of its linear forms.
cplx evaluate(const FunctionalSpec& f, std::span<const double> forms);
/// d/dalpha F(forms + alpha * direction) at alpha = 0.
cplx directional_derivative(const FunctionalSpec& f, std::span<const double> forms,
                            std::span<const double> direction);
const ProfileRef& profile_of(const FunctionalSpec& f);

/// Means (v_j, a)_{C'} and covariances (v_i, v_j)_{C'} of the Gaussian
/// vector ((v_1, x)~, ..., (v_m, x)~).
struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  std::size_t size() const { return static_cast<std::size_t>(mean.size()); }
  bool is_psd(double tol = 1e-10) const;
  /// Restriction to the indices set in mask.
  GaussianSummary subset(std::uint32_t mask) const;
};

GaussianSummary summarize(std::span<const CMElement> elements);
GaussianSummary monomial_summary(const MonomialSpec& spec);

/// Wick/Isserlis expansion: sum over partitions of {1..m} into singletons and
/// pairs of prod(means) * prod(covariances). Real moment E[prod X_j].
double gaussian_moment(const GaussianSummary& s);
/// lambda^{-m/2} times the Wick expansion. TooLargeDegree for m > 12.
cplx wick_moment(const GaussianSummary& s, const ComplexParam& param);

/// Moment by the integration-by-parts recurrence
///   E[S] = lambda^{-1} sum_{l in S, l != top} cov(l, top) E[S \ {l, top}]
///        + lambda^{-1/2} mean(top) E[S \ {top}],
/// memoised over index bitmasks.
cplx recurrence_moment(const GaussianSummary& s, const ComplexParam& param);

/// Generalized analytic Feynman integral of the monomial with parameter q.
cplx feynman_monomial(const MonomialSpec& spec, double q);
/// Analytic function space integral lambda^{-m/2} E[prod X_j], Re(lambda) > 0.
cplx analytic_fsi_monomial(const MonomialSpec& spec, cplx lambda);

/// Closed form of E^{an}[F(Z_k(x, .))] for every functional of the DSL,
/// lambda-mode or Feynman mode.
cplx analytic_fsi(const FunctionalSpec& f, const SuppElement& k, const ComplexParam& param);

/// delta F(Z_k1(x,.) | Z_k2(w,.)) on a sampled path x. Linear forms are
/// discrete PWZ integrals of u odot k1 along x; the direction uses the exact
/// pairing (u odot k2, w)_{C'}.
cplx first_variation(const FunctionalSpec& f, const SuppElement& k1, const SuppElement& k2,
                     std::span<const double> x_path, const TimeGrid& grid, const CMElement& w);

/// One term coefficient * prod(factors) of the symbolic first variation of a
/// monomial; the factors are paired with x through (v, x)~.
struct VariationTerm {
  double coefficient;
  std::vector<CMElement> factors;
};

std::vector<VariationTerm> first_variation_terms(const MonomialSpec& f, const SuppElement& k1,
                                                 const SuppElement& k2, const CMElement& w);

enum class ClosedFormEvaluator { Recurrence, Wick };

struct CSResidual {
  cplx lhs;       // E^{anf}[delta F(Z_k1 | Z_k2(theta odot k1))]
  cplx rhs;       // -iq E^{anf}[(theta, Z_k2)~ F(Z_k1)] - (-iq)^{1/2} (theta odot k2, a) E^{anf}[F(Z_k1)]
  cplx residual;  // lhs - rhs
  /// Residual of the rearranged form solving for E^{anf}[(theta, Z_k2)~ F(Z_k1)].
  cplx corollary_residual;
  /// Summary of (theta odot k2, u_1 odot k1, ..., u_m odot k1), index 0 first.
  GaussianSummary summary;
  std::vector<double> variation_coefficients;
};

CSResidual cameron_storvick_residual(const MonomialSpec& f, const CMElement& theta, const SuppElement& k1,
                                     const SuppElement& k2, double q,
                                     ClosedFormEvaluator evaluator = ClosedFormEvaluator::Recurrence);

}  // namespace gpath
