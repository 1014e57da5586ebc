#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gpath {

using Coeffs = std::vector<double>;

/// Scalar function on [0, T] stored as breakpoints plus one polynomial per
/// piece. Coefficients are in ascending powers of the global time variable t
/// (not of t - t_i), so a piece [c0, c1] means c0 + c1 t.
///
/// Evaluation at a breakpoint is right-continuous; at T the last piece is used.
class PiecewisePoly {
 public:
  PiecewisePoly(std::vector<double> breakpoints, std::vector<Coeffs> coeffs);

  static PiecewisePoly constant(double value, double horizon);
  static PiecewisePoly polynomial(Coeffs coeffs, double horizon);
  /// chi_[lo, hi] on [0, horizon]; breakpoints are inserted at lo and hi.
  static PiecewisePoly indicator(double lo, double hi, double horizon);
  static PiecewisePoly zero(double horizon) { return constant(0.0, horizon); }

  double operator()(double t) const;
  /// Evaluate the polynomial of one piece, without range checks. Used for
  /// limits from inside a piece.
  double eval_piece(std::size_t piece, double t) const;

  double horizon() const { return breakpoints_.back(); }
  std::size_t num_pieces() const { return coeffs_.size(); }
  std::span<const double> breakpoints() const { return breakpoints_; }
  const Coeffs& piece(std::size_t i) const { return coeffs_[i]; }
  const std::vector<Coeffs>& all_coeffs() const { return coeffs_; }

  /// Piece containing t under the right-continuous convention.
  std::size_t piece_index(double t) const;
  /// Piece containing the open interval (lo, hi); callers pass sub-intervals
  /// of the merged breakpoint set so the midpoint decides.
  std::size_t piece_for_interval(double lo, double hi) const;

  int degree() const;
  bool is_identically_zero() const;
  /// True when some piece of positive length carries the zero polynomial.
  bool has_zero_piece() const;

  /// Same function with extra breakpoints inserted (points outside (0, T)
  /// are ignored).
  PiecewisePoly refined(std::span<const double> extra) const;
  /// Pointwise |f|, split at the real roots of every piece so each sub-piece
  /// has constant sign.
  PiecewisePoly abs() const;

  PiecewisePoly& operator*=(double s);
  friend PiecewisePoly operator*(const PiecewisePoly& f, const PiecewisePoly& g);
  friend PiecewisePoly operator+(const PiecewisePoly& f, const PiecewisePoly& g);
  friend PiecewisePoly operator-(const PiecewisePoly& f, const PiecewisePoly& g);
  friend PiecewisePoly operator*(double s, PiecewisePoly f) { return f *= s; }

  /// Largest absolute coefficient difference after refining both onto a
  /// common breakpoint set. Horizons must agree.
  friend double max_coeff_diff(const PiecewisePoly& f, const PiecewisePoly& g);

  bool operator==(const PiecewisePoly&) const = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<Coeffs> coeffs_;
};

double horner(const Coeffs& c, double t);
Coeffs poly_multiply(const Coeffs& p, const Coeffs& q);

/// Real roots of the polynomial lying strictly inside (lo, hi), sorted and
/// with multiplicities collapsed. Degree <= 2 uses closed forms, higher degrees
/// the eigenvalues of the companion matrix polished by Newton steps.
std::vector<double> real_roots_in(const Coeffs& c, double lo, double hi);

/// Sorted union of breakpoint sets; all must share the same horizon.
std::vector<double> merge_breakpoints(std::span<const double> a, std::span<const double> b);

}  // namespace gpath
