#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gpath/cameron_martin.hpp"
#include "gpath/profile.hpp"

namespace gpath {

inline constexpr std::size_t kDefaultGridSize = 1024;

/// Strictly increasing nodes 0 = tau_0 < ... < tau_N = T.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> nodes);

  /// N uniform steps merged with the given breakpoints. A uniform node within
  /// 1e-12 T of a breakpoint is replaced by the breakpoint.
  static TimeGrid uniform(double horizon, std::size_t steps, std::span<const double> breakpoints = {});

  std::span<const double> nodes() const { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t steps() const { return nodes_.size() - 1; }
  double horizon() const { return nodes_.back(); }

  bool contains(double t) const;
  std::size_t index_of(double t) const;  // GridMismatch when absent
  /// Throws GridMismatch unless every breakpoint of f is a node.
  void require_covers(const PiecewisePoly& f) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> nodes_;
};

/// Grid with `steps` uniform steps merged with every breakpoint of the profile
/// densities and of the given extra functions.
TimeGrid make_grid(const ProfilePair& profile, std::size_t steps,
                   std::initializer_list<const PiecewisePoly*> extra = {});
TimeGrid make_grid(const ProfilePair& profile, std::size_t steps, std::span<const PiecewisePoly* const> extra);

/// Generates GBMP increments on a grid. The increment over a step is
/// Gaussian with mean a(tau_{j+1}) - a(tau_j) and variance
/// b(tau_{j+1}) - b(tau_j). With substeps > 1 each step is the sum of that
/// many uniform sub-steps, so a grid of N steps with 2 substeps and a uniform
/// grid of 2N steps share their normal draws and the coarse path is the fine
/// path observed on the coarse nodes.
///
/// Draw number s of path p comes from Philox block (seed, p, s / 2).
class PathSampler {
 public:
  PathSampler(ProfileRef profile, TimeGrid grid, std::uint64_t seed, std::size_t substeps = 1);

  const TimeGrid& grid() const { return grid_; }
  const ProfileRef& profile() const { return profile_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t substeps() const { return substeps_; }

  /// dx[j] = x(tau_{j+1}) - x(tau_j); dx.size() == grid().steps().
  void increments(std::uint64_t path, std::span<double> dx) const;
  /// x.size() == grid().size(); x[0] = 0.
  void values(std::uint64_t path, std::span<double> x) const;

 private:
  ProfileRef profile_;
  TimeGrid grid_;
  std::uint64_t seed_;
  std::size_t substeps_;
  std::vector<double> mean_;  // per fine sub-step
  std::vector<double> sd_;    // per fine sub-step
};

struct PathEnsemble {
  TimeGrid grid;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  ProfileRef profile;
  std::vector<double> values;  // row-major, n_paths x grid.size()

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * grid.size(), grid.size());
  }
};

PathEnsemble sample_gbmp_paths(const ProfileRef& profile, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, std::size_t substeps = 1);

/// Ensemble export. CSV: a header "path,<t_0>,...,<t_N>" then one row per
/// path. Binary (little endian): 8-byte magic "GPATHENS", u64 N, u64 n_paths,
/// u64 seed, N+1 f64 grid nodes, then n_paths x (N+1) f64 values.
void write_csv(const PathEnsemble& e, std::ostream& os);
void write_binary(const PathEnsemble& e, std::ostream& os);

enum class PathFormat { Csv, Binary };

/// Streams the same layouts one row at a time.
class EnsembleWriter {
 public:
  EnsembleWriter(std::ostream& os, PathFormat format, const TimeGrid& grid, std::size_t n_paths,
                 std::uint64_t seed);
  void row(std::span<const double> values);

 private:
  std::ostream& os_;
  PathFormat format_;
  std::size_t width_;
  std::size_t rows_ = 0;
};

/// Reads the binary layout back; the profile reference is left empty.
PathEnsemble read_binary(std::istream& is);

/// f(tau_j) for j = 0..N-1, right-continuous, i.e. the value on [tau_j, tau_{j+1}).
std::vector<double> left_values(const PiecewisePoly& f, const TimeGrid& grid);

/// Discrete PWZ integral sum_j Dw(tau_j) (x(tau_{j+1}) - x(tau_j)).
double pwz_integral(const CMElement& w, std::span<const double> path, const TimeGrid& grid);

/// Z_k(x, tau_i) = sum_{j<i} Dk(tau_j) (x(tau_{j+1}) - x(tau_j)).
std::vector<double> z_process_path(const SuppElement& k, std::span<const double> path, const TimeGrid& grid);

/// t -> int_0^t Dk Dw db at the grid nodes, by exact quadrature.
std::vector<double> z_shift_path(const SuppElement& k, const CMElement& w, const TimeGrid& grid);

struct MeanCovTable {
  TimeGrid grid;
  std::vector<double> gamma;  // int_0^t Dk da
  std::vector<double> beta;   // int_0^t (Dk)^2 db
};

MeanCovTable gamma_beta(const SuppElement& k, const TimeGrid& grid);

/// Per-step integrals int_{tau_j}^{tau_{j+1}} prod(factors) dt, accumulated
/// into node values starting at 0.
std::vector<double> cumulative_on_grid(std::initializer_list<const PiecewisePoly*> factors, const TimeGrid& grid);

}  // namespace gpath
