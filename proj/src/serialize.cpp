#include "gpath/serialize.hpp"

#include <algorithm>
#include <cstdio>

#include "gpath/error.hpp"

namespace gpath {

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw Error(ErrorCode::ConfigError, where + ": unknown key '" + key + "'");
  }
}

PiecewisePoly poly_from_json(const json& j, double horizon) {
  try {
    if (j.is_array()) {
      if (!(horizon > 0.0)) throw Error(ErrorCode::ConfigError, "coefficient list needs a horizon");
      return PiecewisePoly::polynomial(j.get<std::vector<double>>(), horizon);
    }
    if (j.is_number()) {
      if (!(horizon > 0.0)) throw Error(ErrorCode::ConfigError, "constant needs a horizon");
      return PiecewisePoly::constant(j.get<double>(), horizon);
    }
    require_keys(j, {"breakpoints", "coeffs"}, "piecewise polynomial");
    PiecewisePoly f(j.at("breakpoints").get<std::vector<double>>(), j.at("coeffs").get<std::vector<Coeffs>>());
    if (horizon > 0.0 && std::abs(f.horizon() - horizon) > 1e-12 * std::max(1.0, horizon)) {
      throw Error(ErrorCode::DomainMismatch, "breakpoints do not end at T");
    }
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("piecewise polynomial: ") + e.what());
  }
}

json to_json(const PiecewisePoly& f) {
  json coeffs = json::array();
  for (const auto& c : f.all_coeffs()) coeffs.push_back(c);
  return {{"breakpoints", std::vector<double>(f.breakpoints().begin(), f.breakpoints().end())},
          {"coeffs", coeffs}};
}

json to_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::complex<double> complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  require_keys(j, {"re", "im"}, "complex number");
  return {j.value("re", 0.0), j.value("im", 0.0)};
}

json to_json(const ValidationReport& r) {
  return {{"a_prime_l2_sq", r.a_prime_l2_sq}, {"cc2_value", r.cc2_value},
          {"min_b_prime", r.min_b_prime},     {"b_prime_positive", r.b_prime_positive},
          {"a_prime_l2_finite", r.a_prime_l2_finite}, {"cc2_finite", r.cc2_finite},
          {"pass", r.ok()}};
}

json to_json(const GaussianSummary& s) {
  json means = json::array(), cov = json::array();
  for (Eigen::Index i = 0; i < s.mean.size(); ++i) {
    means.push_back(s.mean(i));
    json row = json::array();
    for (Eigen::Index j = 0; j < s.cov.cols(); ++j) row.push_back(s.cov(i, j));
    cov.push_back(row);
  }
  return {{"means_with_a", means}, {"cm_inner_products", cov}};
}

json to_json(const MCReport& r) {
  return {{"estimate", to_json(r.estimate)}, {"std_error", r.std_error}, {"n_paths", r.n_paths},
          {"grid_size", r.grid_size},        {"seed", r.seed},           {"wall_time", r.wall_time},
          {"notes", r.notes}};
}

json to_json(const IdentityReport& r) {
  return {{"check", r.check},
          {"lhs", to_json(r.lhs)},
          {"rhs", to_json(r.rhs)},
          {"discrepancy", r.discrepancy},
          {"combined_se", r.combined_se},
          {"sigma_ratio", r.sigma_ratio},
          {"threshold", r.threshold},
          {"pass", r.pass},
          {"notes", r.notes}};
}

json to_json(const CSResidual& r) {
  return {{"lhs", to_json(r.lhs)},
          {"rhs", to_json(r.rhs)},
          {"residual", to_json(r.residual)},
          {"corollary_residual", to_json(r.corollary_residual)},
          {"variation_coefficients", r.variation_coefficients},
          {"audit", to_json(r.summary)}};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace gpath
