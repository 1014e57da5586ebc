#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gpath/feynman.hpp"
#include "gpath/serialize.hpp"

namespace gpath {

enum class CheckKind { Simulate, Feynman, VerifyTranslation, VerifyParts, VerifyCS, VerifyRecurrence };

std::string_view to_string(CheckKind kind);

/// One entry of "checks", with every name already resolved.
struct CheckSpec {
  std::string name;
  CheckKind kind = CheckKind::Feynman;

  std::optional<FunctionalSpec> functional;
  std::optional<CMElement> theta;
  std::optional<SuppElement> k1;
  std::optional<SuppElement> k2;
  std::optional<SuppElement> kernel;  // simulate, feynman

  std::optional<double> q;
  std::optional<double> rho;
  std::optional<cplx> lambda;
  bool monte_carlo = false;           // feynman at real lambda: compare with MC
  std::optional<cplx> expect;         // feynman: expected value
  double tolerance = 1e-10;           // closed-form checks
  std::vector<double> times;          // simulate: moment check times
  bool write_paths = false;           // simulate
  std::string format = "csv";         // simulate: csv | binary
  std::string profile;                // simulate

  std::optional<std::size_t> n_paths;
  std::optional<std::size_t> grid_size;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
};

struct MonomialRef {
  std::string theta;
  std::vector<std::string> ks;
};

struct ExperimentConfig {
  json raw;
  std::string hash;  // FNV-1a of the canonical JSON dump, hex
  std::uint64_t seed = 0;
  std::size_t n_paths = 100000;
  std::size_t grid_size = kDefaultGridSize;
  double threshold = 3.0;
  std::string output_dir;
  std::map<std::string, ProfileRef> profiles;
  std::map<std::string, CMElement> elements;
  std::optional<MonomialRef> monomial;
  std::vector<CheckSpec> checks;

  const CMElement& element(const std::string& name) const;
  SuppElement kernel(const std::string& name) const;
};

/// Parses and validates a config. Unknown keys and unresolved names raise
/// ConfigError; invalid profiles raise the profile's own error code.
ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::string& path);

/// Profile spec {"T": ..., "a_prime": ..., "b_prime": ..., "name"?: ...} without
/// the b' > 0 check.
ProfilePair parse_profile_unchecked(const json& j, const std::string& name);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace gpath
