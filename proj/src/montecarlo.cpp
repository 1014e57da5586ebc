#include "gpath/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "gpath/error.hpp"
#include "gpath/stats.hpp"

namespace gpath {

namespace {

constexpr const char* kIntegrabilityNote =
    "integrability of F(Z_k1) and of its first variation is assumed, not tested";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_functional(const FunctionalSpec& f, std::vector<std::string>& notes) {
  if (const auto* e = std::get_if<ExpLinear>(&f); e && e->c.real() != 0.0) {
    if (!e->allow_real_exponent) {
      throw Error(ErrorCode::UnsupportedFunctional,
                  "exp-linear functional with a real exponent part needs allow_real_exponent");
    }
    notes.emplace_back("warning: real exponent in exp-linear functional; the estimator may be heavy tailed");
  }
}

TimeGrid grid_for(const ProfilePair& profile, const std::vector<const PiecewisePoly*>& densities,
                  const MCOptions& opts) {
  return make_grid(profile, opts.grid_steps, std::span<const PiecewisePoly* const>(densities));
}

/// Evaluates the discrete PWZ integrals of the given left-point densities
/// along every path and hands them to fn(path, forms).
template <typename Fn>
void for_each_path(const PathSampler& sampler, const std::vector<std::vector<double>>& densities,
                   const MCOptions& opts, Fn&& fn) {
  parallel_for(
      opts.n_paths,
      [&](std::size_t lo, std::size_t hi) {
        std::vector<double> dx(sampler.grid().steps());
        std::vector<double> forms(densities.size());
        for (std::size_t i = lo; i < hi; ++i) {
          sampler.increments(i, dx);
          for (std::size_t f = 0; f < densities.size(); ++f) {
            const auto& d = densities[f];
            double s = 0.0;
            for (std::size_t j = 0; j < dx.size(); ++j) s += d[j] * dx[j];
            forms[f] = s;
          }
          fn(i, std::span<const double>(forms));
        }
      },
      opts.workers);
}

MCReport make_report(std::span<const cplx> values, const MCOptions& opts, double wall) {
  MCReport r;
  r.estimate = sample_mean(values);
  r.std_error = standard_error(values);
  r.n_paths = values.size();
  r.grid_size = opts.grid_steps;
  r.seed = opts.seed;
  r.wall_time = wall;
  return r;
}

IdentityReport compare(std::string name, std::span<const cplx> lhs, std::span<const cplx> rhs,
                       const MCOptions& opts, double wall, std::vector<std::string> notes) {
  IdentityReport rep;
  rep.check = std::move(name);
  rep.lhs = make_report(lhs, opts, wall);
  rep.rhs = make_report(rhs, opts, wall);
  std::vector<cplx> diff(lhs.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = lhs[i] - rhs[i];
  rep.discrepancy = std::abs(rep.lhs.estimate - rep.rhs.estimate);
  rep.combined_se = standard_error(std::span<const cplx>(diff));
  if (rep.combined_se > 0.0) {
    rep.sigma_ratio = rep.discrepancy / rep.combined_se;
  } else {
    // Pathwise identical sides: only rounding can separate the means.
    const double scale = std::max({1.0, std::abs(rep.lhs.estimate), std::abs(rep.rhs.estimate)});
    rep.sigma_ratio = rep.discrepancy <= 1e-12 * scale ? 0.0 : std::numeric_limits<double>::infinity();
  }
  rep.threshold = opts.threshold;
  rep.pass = rep.sigma_ratio < opts.threshold;
  rep.notes = std::move(notes);
  rep.lhs.notes = rep.notes;
  rep.rhs.notes = rep.notes;
  return rep;
}

// Shared engine of verify_parts and verify_cs_precursor. Per path:
//   lhs_i = d/dalpha F(path_scale * L + alpha * dir_scale * dL)
//   rhs_i = prod_scale * (theta odot k2, x)~ * F(path_scale * L) - mean_scale * (theta odot k2, a) * F(path_scale * L)
IdentityReport parts_engine(std::string name, const FunctionalSpec& f, const CMElement& theta,
                            const SuppElement& k1, const SuppElement& k2, double path_scale, double dir_scale,
                            double prod_scale, double mean_scale, const MCOptions& opts) {
  const auto t0 = Clock::now();
  std::vector<std::string> notes{kIntegrabilityNote};
  check_functional(f, notes);
  require_same_profile(theta, k1.element());
  require_same_profile(theta, k2.element());
  const ProfileRef& profile = k1.profile();

  const auto us = linear_forms(f);
  const CMElement theta_k1 = odot(theta, k1);
  const CMElement theta_k2 = odot(theta, k2);
  std::vector<CMElement> forms;
  std::vector<double> dir;
  for (const auto& u : us) {
    require_same_profile(u, theta);
    forms.push_back(odot(u, k1));
    dir.push_back(dir_scale * cm_inner(odot(u, k2), theta_k1));
  }
  const double mean_k2 = inner_with_a(theta_k2);

  std::vector<const PiecewisePoly*> dens_ptrs{&theta_k2.density()};
  for (const auto& v : forms) dens_ptrs.push_back(&v.density());
  const TimeGrid grid = grid_for(*profile, dens_ptrs, opts);
  std::vector<std::vector<double>> dens;
  for (const auto* d : dens_ptrs) dens.push_back(left_values(*d, grid));

  PathSampler sampler(profile, grid, opts.seed, opts.substeps);
  std::vector<cplx> lhs(opts.n_paths), rhs(opts.n_paths);
  for_each_path(sampler, dens, opts, [&](std::size_t i, std::span<const double> vals) {
    std::vector<double> scaled(vals.size() - 1);
    for (std::size_t j = 0; j < scaled.size(); ++j) scaled[j] = path_scale * vals[j + 1];
    const cplx fx = evaluate(f, scaled);
    lhs[i] = directional_derivative(f, scaled, dir);
    rhs[i] = prod_scale * vals[0] * fx - mean_scale * mean_k2 * fx;
  });
  return compare(std::move(name), lhs, rhs, opts, seconds_since(t0), std::move(notes));
}

}  // namespace

MCReport mc_fsi(const FunctionalSpec& f, const SuppElement& k, double lambda, const MCOptions& opts) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::BadDomain, "lambda must be positive for Monte Carlo");
  const auto t0 = Clock::now();
  std::vector<std::string> notes;
  check_functional(f, notes);

  std::vector<CMElement> forms;
  for (const auto& u : linear_forms(f)) forms.push_back(odot(u, k));
  std::vector<const PiecewisePoly*> dens_ptrs;
  for (const auto& v : forms) dens_ptrs.push_back(&v.density());
  const TimeGrid grid = grid_for(*k.profile(), dens_ptrs, opts);
  std::vector<std::vector<double>> dens;
  for (const auto* d : dens_ptrs) dens.push_back(left_values(*d, grid));

  const double scale = 1.0 / std::sqrt(lambda);
  PathSampler sampler(k.profile(), grid, opts.seed, opts.substeps);
  std::vector<cplx> values(opts.n_paths);
  for_each_path(sampler, dens, opts, [&](std::size_t i, std::span<const double> vals) {
    std::vector<double> scaled(vals.begin(), vals.end());
    for (double& v : scaled) v *= scale;
    values[i] = evaluate(f, scaled);
  });
  MCReport r = make_report(values, opts, seconds_since(t0));
  r.notes = std::move(notes);
  return r;
}

IdentityReport verify_translation(const FunctionalSpec& f, const CMElement& theta, const SuppElement& k1,
                                  const SuppElement& k2, const MCOptions& opts) {
  const auto t0 = Clock::now();
  std::vector<std::string> notes{kIntegrabilityNote};
  check_functional(f, notes);
  require_same_profile(theta, k1.element());
  require_same_profile(theta, k2.element());
  const ProfileRef& profile = k1.profile();

  const auto us = linear_forms(f);
  const CMElement theta_k1 = odot(theta, k1);
  const CMElement theta_k2 = odot(theta, k2);
  std::vector<CMElement> forms;
  for (const auto& u : us) forms.push_back(odot(u, k1));

  std::vector<const PiecewisePoly*> dens_ptrs{&theta_k2.density(), &theta_k1.density()};
  for (const auto& u : us) dens_ptrs.push_back(&u.density());
  for (const auto& v : forms) dens_ptrs.push_back(&v.density());
  const TimeGrid grid = grid_for(*profile, dens_ptrs, opts);

  // Deterministic shift Z_k2(theta odot k1, .) on the grid and the discrete
  // PWZ integral of every form u along it.
  const auto shift = z_shift_path(k2, theta_k1, grid);
  std::vector<double> shift_forms;
  for (const auto& u : us) shift_forms.push_back(pwz_integral(u, shift, grid));
  const double norm_sq = cm_inner(theta_k2, theta_k2);
  const double mean_k2 = inner_with_a(theta_k2);
  const double weight = std::exp(-0.5 * norm_sq - mean_k2);

  std::vector<std::vector<double>> dens{left_values(theta_k2.density(), grid)};
  for (const auto& v : forms) dens.push_back(left_values(v.density(), grid));

  PathSampler sampler(profile, grid, opts.seed, opts.substeps);
  std::vector<cplx> lhs(opts.n_paths), rhs(opts.n_paths);
  for_each_path(sampler, dens, opts, [&](std::size_t i, std::span<const double> vals) {
    std::vector<double> plain(vals.begin() + 1, vals.end());
    std::vector<double> shifted(plain);
    for (std::size_t j = 0; j < shifted.size(); ++j) shifted[j] += shift_forms[j];
    lhs[i] = evaluate(f, shifted);
    rhs[i] = weight * evaluate(f, plain) * std::exp(vals[0]);
  });
  return compare("translation", lhs, rhs, opts, seconds_since(t0), std::move(notes));
}

IdentityReport verify_parts(const FunctionalSpec& f, const CMElement& theta, const SuppElement& k1,
                            const SuppElement& k2, double rho, const MCOptions& opts) {
  if (!(rho > 0.0)) throw Error(ErrorCode::BadDomain, "rho must be positive");
  return parts_engine("parts", f, theta, k1, k2, rho, rho, 1.0, 1.0, opts);
}

IdentityReport verify_cs_precursor(const FunctionalSpec& f, const CMElement& theta, const SuppElement& k1,
                                   const SuppElement& k2, double lambda, const MCOptions& opts) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::BadDomain, "lambda must be positive");
  const double root = std::sqrt(lambda);
  const double rho = 1.0 / root;
  // lambda * (theta, lambda^{-1/2} Z_k2)~ = lambda^{1/2} (theta, Z_k2)~.
  return parts_engine("cs_precursor", f, theta, k1, k2, rho, 1.0, lambda * rho, root, opts);
}

MomentCheckReport check_z_moments(const SuppElement& k, std::span<const double> times, const MCOptions& opts,
                                  double threshold) {
  const auto t0 = Clock::now();
  const ProfileRef& profile = k.profile();
  PiecewisePoly marks = PiecewisePoly::zero(profile->horizon).refined(times);
  const TimeGrid grid = make_grid(*profile, opts.grid_steps, {&k.density(), &marks});
  std::vector<std::size_t> idx;
  for (double t : times) idx.push_back(grid.index_of(t));

  const MeanCovTable table = gamma_beta(k, grid);
  const auto dk = left_values(k.density(), grid);
  const std::size_t nt = idx.size();
  std::vector<std::vector<double>> z(nt, std::vector<double>(opts.n_paths));

  PathSampler sampler(profile, grid, opts.seed, opts.substeps);
  parallel_for(
      opts.n_paths,
      [&](std::size_t lo, std::size_t hi) {
        std::vector<double> dx(grid.steps()), cum(grid.size());
        for (std::size_t i = lo; i < hi; ++i) {
          sampler.increments(i, dx);
          cum[0] = 0.0;
          for (std::size_t j = 0; j < dx.size(); ++j) cum[j + 1] = cum[j] + dk[j] * dx[j];
          for (std::size_t a = 0; a < nt; ++a) z[a][i] = cum[idx[a]];
        }
      },
      opts.workers);

  MomentCheckReport rep;
  rep.n_paths = opts.n_paths;
  rep.grid_size = opts.grid_steps;
  rep.seed = opts.seed;
  rep.threshold = threshold;
  rep.pass = true;
  auto finish = [&](MomentCheckRow& row) {
    row.z_score = row.std_error > 0.0 ? (row.sample - row.expected) / row.std_error
                                      : (row.sample == row.expected ? 0.0 : std::numeric_limits<double>::infinity());
    rep.pass = rep.pass && std::abs(row.z_score) < threshold;
  };
  std::vector<double> means(nt);
  for (std::size_t a = 0; a < nt; ++a) {
    const std::span<const double> za(z[a]);
    means[a] = sample_mean(za);
    MomentCheckRow row{times[a], times[a], table.gamma[idx[a]], means[a], standard_error(za), 0.0};
    finish(row);
    rep.mean_rows.push_back(row);
  }
  std::vector<double> prod(opts.n_paths);
  for (std::size_t a = 0; a < nt; ++a) {
    for (std::size_t b = a; b < nt; ++b) {
      for (std::size_t i = 0; i < opts.n_paths; ++i) prod[i] = (z[a][i] - means[a]) * (z[b][i] - means[b]);
      const std::size_t lo = times[a] <= times[b] ? idx[a] : idx[b];
      MomentCheckRow row{times[a], times[b], table.beta[lo], sample_covariance(z[a], z[b]),
                         standard_error(std::span<const double>(prod)), 0.0};
      finish(row);
      rep.cov_rows.push_back(row);
    }
  }
  rep.wall_time = seconds_since(t0);
  return rep;
}

}  // namespace gpath
