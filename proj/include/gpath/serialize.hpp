#pragma once

#include <json.hpp>

#include <complex>
#include <string>

#include "gpath/feynman.hpp"
#include "gpath/montecarlo.hpp"
#include "gpath/profile.hpp"

namespace gpath {

using json = nlohmann::json;

/// {"breakpoints": [...], "coeffs": [[c0, c1, ...], ...]}, ascending powers.
/// A bare coefficient array is accepted as a single piece on [0, horizon]
/// when horizon is given.
PiecewisePoly poly_from_json(const json& j, double horizon = 0.0);
json to_json(const PiecewisePoly& f);

json to_json(std::complex<double> z);
std::complex<double> complex_from_json(const json& j);

json to_json(const ValidationReport& r);
/// Audit record of the scalar inner products a closed form consumed.
json to_json(const GaussianSummary& s);
json to_json(const MCReport& r);
json to_json(const IdentityReport& r);
json to_json(const CSResidual& r);

/// Rejects keys outside `allowed` with a ConfigError naming `where`.
void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where);

/// printf("%.17g").
std::string format_double(double v);

}  // namespace gpath
