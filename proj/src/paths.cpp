#include "gpath/paths.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "gpath/error.hpp"
#include "gpath/rng.hpp"
#include "gpath/stats.hpp"

namespace gpath {

namespace {

double grid_tol(double horizon) { return 1e-12 * std::max(1.0, horizon); }

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw Error(ErrorCode::ConfigError, "truncated ensemble file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{buf[i]} << (8 * i);
  return v;
}

void write_f64(std::ostream& os, double d) { write_u64(os, std::bit_cast<std::uint64_t>(d)); }
double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

constexpr char kMagic[8] = {'G', 'P', 'A', 'T', 'H', 'E', 'N', 'S'};

}  // namespace

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2 || nodes_.front() != 0.0) {
    throw Error(ErrorCode::GridMismatch, "grid needs at least two nodes starting at 0");
  }
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    if (!(nodes_[i + 1] > nodes_[i])) throw Error(ErrorCode::GridMismatch, "grid nodes must increase strictly");
  }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps, std::span<const double> breakpoints) {
  if (steps == 0 || !(horizon > 0.0)) throw Error(ErrorCode::GridMismatch, "need T > 0 and at least one step");
  struct Node {
    double t;
    bool pinned;
  };
  std::vector<Node> all;
  all.reserve(steps + 1 + breakpoints.size());
  for (std::size_t i = 0; i <= steps; ++i) {
    all.push_back({i == steps ? horizon : horizon * static_cast<double>(i) / static_cast<double>(steps), i == 0 || i == steps});
  }
  for (double b : breakpoints)
    if (b > 0.0 && b < horizon) all.push_back({b, true});
  std::stable_sort(all.begin(), all.end(), [](const Node& x, const Node& y) { return x.t < y.t; });

  const double tol = grid_tol(horizon);
  std::vector<Node> kept;
  for (const auto& n : all) {
    if (!kept.empty() && n.t - kept.back().t <= tol) {
      if (n.pinned && !kept.back().pinned) kept.back() = n;
      continue;
    }
    kept.push_back(n);
  }
  std::vector<double> nodes;
  nodes.reserve(kept.size());
  for (const auto& n : kept) nodes.push_back(n.t);
  nodes.front() = 0.0;
  nodes.back() = horizon;
  return TimeGrid(std::move(nodes));
}

bool TimeGrid::contains(double t) const {
  const double tol = grid_tol(horizon());
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - tol);
  return it != nodes_.end() && std::abs(*it - t) <= tol;
}

std::size_t TimeGrid::index_of(double t) const {
  const double tol = grid_tol(horizon());
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - tol);
  if (it == nodes_.end() || std::abs(*it - t) > tol) {
    throw Error(ErrorCode::GridMismatch, "time " + std::to_string(t) + " is not a grid node");
  }
  return static_cast<std::size_t>(it - nodes_.begin());
}

void TimeGrid::require_covers(const PiecewisePoly& f) const {
  if (std::abs(f.horizon() - horizon()) > grid_tol(horizon())) {
    throw Error(ErrorCode::GridMismatch, "function horizon differs from the grid horizon");
  }
  for (double t : f.breakpoints()) {
    if (!contains(t)) throw Error(ErrorCode::GridMismatch, "breakpoint " + std::to_string(t) + " is not a grid node");
  }
}

TimeGrid make_grid(const ProfilePair& profile, std::size_t steps, std::span<const PiecewisePoly* const> extra) {
  std::vector<double> bps;
  auto add = [&](const PiecewisePoly& f) { bps.insert(bps.end(), f.breakpoints().begin(), f.breakpoints().end()); };
  add(profile.a_prime);
  add(profile.b_prime);
  add(profile.abs_a_prime);
  for (const auto* f : extra) add(*f);
  return TimeGrid::uniform(profile.horizon, steps, bps);
}

TimeGrid make_grid(const ProfilePair& profile, std::size_t steps,
                   std::initializer_list<const PiecewisePoly*> extra) {
  return make_grid(profile, steps, std::span<const PiecewisePoly* const>(extra.begin(), extra.size()));
}

PathSampler::PathSampler(ProfileRef profile, TimeGrid grid, std::uint64_t seed, std::size_t substeps)
    : profile_(std::move(profile)), grid_(std::move(grid)), seed_(seed), substeps_(substeps) {
  if (substeps_ == 0) throw Error(ErrorCode::GridMismatch, "substeps must be positive");
  if (std::abs(grid_.horizon() - profile_->horizon) > grid_tol(profile_->horizon)) {
    throw Error(ErrorCode::GridMismatch, "grid horizon differs from the profile horizon");
  }
  const std::size_t fine = grid_.steps() * substeps_;
  mean_.reserve(fine);
  sd_.reserve(fine);
  for (std::size_t j = 0; j < grid_.steps(); ++j) {
    const double lo = grid_[j], hi = grid_[j + 1];
    for (std::size_t s = 0; s < substeps_; ++s) {
      const double l = s == 0 ? lo : lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(substeps_);
      const double r = s + 1 == substeps_ ? hi : lo + (hi - lo) * static_cast<double>(s + 1) / static_cast<double>(substeps_);
      const double db = integrate_product({&profile_->b_prime}, l, r);
      if (!(db > 0.0)) {
        throw Error(ErrorCode::NonPositiveVariance,
                    "b increment over [" + std::to_string(l) + ", " + std::to_string(r) + "] is not positive");
      }
      mean_.push_back(integrate_product({&profile_->a_prime}, l, r));
      sd_.push_back(std::sqrt(db));
    }
  }
}

void PathSampler::increments(std::uint64_t path, std::span<double> dx) const {
  if (dx.size() != grid_.steps()) throw Error(ErrorCode::GridMismatch, "increment buffer has wrong length");
  if (substeps_ == 1) {
    const std::size_t n = dx.size();
    for (std::size_t f = 0; f + 1 < n; f += 2) {
      const auto [z0, z1] = normal_pair(seed_, path, f / 2);
      dx[f] = mean_[f] + sd_[f] * z0;
      dx[f + 1] = mean_[f + 1] + sd_[f + 1] * z1;
    }
    if (n % 2 == 1) dx[n - 1] = mean_[n - 1] + sd_[n - 1] * normal_pair(seed_, path, (n - 1) / 2).first;
    return;
  }
  std::pair<double, double> draws{};
  std::size_t f = 0;
  for (std::size_t j = 0; j < dx.size(); ++j) {
    double sum = 0.0;
    for (std::size_t s = 0; s < substeps_; ++s, ++f) {
      if (f % 2 == 0) draws = normal_pair(seed_, path, f / 2);
      const double z = f % 2 == 0 ? draws.first : draws.second;
      sum += mean_[f] + sd_[f] * z;
    }
    dx[j] = sum;
  }
}

void PathSampler::values(std::uint64_t path, std::span<double> x) const {
  if (x.size() != grid_.size()) throw Error(ErrorCode::GridMismatch, "path buffer has wrong length");
  increments(path, x.subspan(1));
  x[0] = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) x[i] += x[i - 1];
}

PathEnsemble sample_gbmp_paths(const ProfileRef& profile, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, std::size_t substeps) {
  if (n_paths == 0) throw Error(ErrorCode::BadDomain, "n_paths must be at least 1");
  PathSampler sampler(profile, grid, seed, substeps);
  PathEnsemble e{grid, n_paths, seed, profile, std::vector<double>(n_paths * grid.size())};
  parallel_for(n_paths, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      sampler.values(i, std::span<double>(e.values).subspan(i * grid.size(), grid.size()));
    }
  });
  return e;
}

EnsembleWriter::EnsembleWriter(std::ostream& os, PathFormat format, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed)
    : os_(os), format_(format), width_(grid.size()) {
  if (format_ == PathFormat::Csv) {
    char buf[40];
    os_ << "path";
    for (double t : grid.nodes()) {
      std::snprintf(buf, sizeof buf, ",%.17g", t);
      os_ << buf;
    }
    os_ << '\n';
  } else {
    os_.write(kMagic, sizeof kMagic);
    write_u64(os_, grid.steps());
    write_u64(os_, n_paths);
    write_u64(os_, seed);
    for (double t : grid.nodes()) write_f64(os_, t);
  }
}

void EnsembleWriter::row(std::span<const double> values) {
  if (values.size() != width_) throw Error(ErrorCode::GridMismatch, "row length differs from grid size");
  if (format_ == PathFormat::Binary) {
    for (double v : values) write_f64(os_, v);
  } else {
    char buf[40];
    os_ << rows_;
    for (double v : values) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      os_ << buf;
    }
    os_ << '\n';
  }
  ++rows_;
}

void write_csv(const PathEnsemble& e, std::ostream& os) {
  EnsembleWriter w(os, PathFormat::Csv, e.grid, e.n_paths, e.seed);
  for (std::size_t i = 0; i < e.n_paths; ++i) w.row(e.row(i));
}

void write_binary(const PathEnsemble& e, std::ostream& os) {
  EnsembleWriter w(os, PathFormat::Binary, e.grid, e.n_paths, e.seed);
  for (std::size_t i = 0; i < e.n_paths; ++i) w.row(e.row(i));
}

PathEnsemble read_binary(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error(ErrorCode::ConfigError, "not a path ensemble file");
  }
  const auto steps = read_u64(is);
  const auto n = read_u64(is);
  const auto seed = read_u64(is);
  std::vector<double> nodes(steps + 1);
  for (double& t : nodes) t = read_f64(is);
  PathEnsemble e{TimeGrid(std::move(nodes)), n, seed, nullptr, std::vector<double>(n * (steps + 1))};
  for (double& v : e.values) v = read_f64(is);
  return e;
}

std::vector<double> left_values(const PiecewisePoly& f, const TimeGrid& grid) {
  std::vector<double> out(grid.steps());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = f.eval_piece(f.piece_for_interval(grid[j], grid[j + 1]), grid[j]);
  return out;
}

double pwz_integral(const CMElement& w, std::span<const double> path, const TimeGrid& grid) {
  grid.require_covers(w.density());
  if (path.size() != grid.size()) throw Error(ErrorCode::GridMismatch, "path length differs from grid size");
  const auto dens = left_values(w.density(), grid);
  double s = 0.0;
  for (std::size_t j = 0; j < dens.size(); ++j) s += dens[j] * (path[j + 1] - path[j]);
  return s;
}

std::vector<double> z_process_path(const SuppElement& k, std::span<const double> path, const TimeGrid& grid) {
  grid.require_covers(k.density());
  if (path.size() != grid.size()) throw Error(ErrorCode::GridMismatch, "path length differs from grid size");
  const auto dens = left_values(k.density(), grid);
  std::vector<double> z(grid.size(), 0.0);
  for (std::size_t j = 0; j < dens.size(); ++j) z[j + 1] = z[j] + dens[j] * (path[j + 1] - path[j]);
  return z;
}

std::vector<double> cumulative_on_grid(std::initializer_list<const PiecewisePoly*> factors, const TimeGrid& grid) {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) out[j + 1] = out[j] + integrate_product(factors, grid[j], grid[j + 1]);
  return out;
}

std::vector<double> z_shift_path(const SuppElement& k, const CMElement& w, const TimeGrid& grid) {
  require_same_profile(k.element(), w);
  return cumulative_on_grid({&k.density(), &w.density(), &w.profile()->b_prime}, grid);
}

MeanCovTable gamma_beta(const SuppElement& k, const TimeGrid& grid) {
  const auto& p = *k.profile();
  return {grid, cumulative_on_grid({&k.density(), &p.a_prime}, grid),
          cumulative_on_grid({&k.density(), &k.density(), &p.b_prime}, grid)};
}

}  // namespace gpath
