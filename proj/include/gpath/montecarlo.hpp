#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "gpath/feynman.hpp"
#include "gpath/paths.hpp"

namespace gpath {

struct MCOptions {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 42;
  std::size_t grid_steps = kDefaultGridSize;
  /// Normal draws per grid step; see PathSampler.
  std::size_t substeps = 1;
  double threshold = 3.0;
  std::size_t workers = 0;  // 0: GPATH_THREADS or hardware concurrency
};

struct MCReport {
  cplx estimate;
  double std_error = 0.0;  // sqrt((var_re + var_im) / n)
  std::size_t n_paths = 0;
  std::size_t grid_size = 0;  // grid steps
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds
  std::vector<std::string> notes;
};

/// Both sides are means over one path ensemble. combined_se is the standard
/// error of the per-path difference lhs_i - rhs_i, which accounts for the
/// correlation the shared paths induce.
struct IdentityReport {
  std::string check;
  MCReport lhs;
  MCReport rhs;
  double discrepancy = 0.0;
  double combined_se = 0.0;
  double sigma_ratio = 0.0;
  double threshold = 3.0;
  bool pass = false;
  std::vector<std::string> notes;
};

/// J_F(Z_k; lambda) = E[F(lambda^{-1/2} Z_k(x, .))] for real lambda > 0.
MCReport mc_fsi(const FunctionalSpec& f, const SuppElement& k, double lambda, const MCOptions& opts);

/// Translation theorem:
///   E[F(Z_k1(x) + Z_k2(theta odot k1))]
///     = exp(-||theta odot k2||^2 / 2 - (theta odot k2, a)) E[F(Z_k1(x)) exp((theta, Z_k2(x))~)].
IdentityReport verify_translation(const FunctionalSpec& f, const CMElement& theta, const SuppElement& k1,
                                  const SuppElement& k2, const MCOptions& opts);

/// Integration by parts at scale rho:
///   E[delta F(rho Z_k1 | rho Z_k2(theta odot k1))]
///     = E[(theta, Z_k2)~ F(rho Z_k1)] - (theta odot k2, a) E[F(rho Z_k1)].
IdentityReport verify_parts(const FunctionalSpec& f, const CMElement& theta, const SuppElement& k1,
                            const SuppElement& k2, double rho, const MCOptions& opts);

/// Real-lambda form of the Cameron-Storvick identity:
///   E[delta F(lambda^{-1/2} Z_k1 | Z_k2(theta odot k1))]
///     = lambda E[(theta, lambda^{-1/2} Z_k2)~ F(lambda^{-1/2} Z_k1)]
///       - lambda^{1/2} (theta odot k2, a) E[F(lambda^{-1/2} Z_k1)].
/// With lambda = 1 this is verify_parts with rho = 1, number for number.
IdentityReport verify_cs_precursor(const FunctionalSpec& f, const CMElement& theta, const SuppElement& k1,
                                   const SuppElement& k2, double lambda, const MCOptions& opts);

struct MomentCheckRow {
  double s = 0.0;  // equal to t on the mean/variance rows
  double t = 0.0;
  double expected = 0.0;
  double sample = 0.0;
  double std_error = 0.0;
  double z_score = 0.0;
};

/// Sample moments of Z_k(., t) against gamma_k(t) and beta_k(min(s, t)).
struct MomentCheckReport {
  std::vector<MomentCheckRow> mean_rows;
  std::vector<MomentCheckRow> cov_rows;  // every pair s <= t of the requested times
  std::size_t n_paths = 0;
  std::size_t grid_size = 0;
  std::uint64_t seed = 0;
  double threshold = 4.0;
  double wall_time = 0.0;
  bool pass = false;
};

/// The requested times become grid nodes.
MomentCheckReport check_z_moments(const SuppElement& k, std::span<const double> times, const MCOptions& opts,
                                  double threshold = 4.0);

}  // namespace gpath
