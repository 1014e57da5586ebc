#include "gpath/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gpath/error.hpp"

namespace gpath {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

template <typename T>
T get_as(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(where + ": bad or missing '" + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return get_as<T>(j, key, where);
}

std::optional<CheckKind> kind_from(const std::string& s) {
  if (s == "simulate") return CheckKind::Simulate;
  if (s == "feynman") return CheckKind::Feynman;
  if (s == "verify-translation") return CheckKind::VerifyTranslation;
  if (s == "verify-parts") return CheckKind::VerifyParts;
  if (s == "verify-cs") return CheckKind::VerifyCS;
  if (s == "verify-recurrence") return CheckKind::VerifyRecurrence;
  return std::nullopt;
}

FunctionalSpec parse_functional(const json& j, const ExperimentConfig& cfg, const std::string& where) {
  const auto type = get_as<std::string>(j, "type", where);
  if (type == "monomial") {
    require_keys(j, {"type", "theta", "ks"}, where);
    MonomialSpec m{cfg.element(get_as<std::string>(j, "theta", where)), {}};
    for (const auto& k : get_as<std::vector<std::string>>(j, "ks", where)) m.ks.push_back(cfg.kernel(k));
    for (const auto& k : m.ks) require_same_profile(m.theta, k.element());
    return m;
  }
  if (type == "exp-linear") {
    require_keys(j, {"type", "w", "c", "allow_real_exponent"}, where);
    return ExpLinear{cfg.element(get_as<std::string>(j, "w", where)), complex_from_json(j.at("c")),
                     j.value("allow_real_exponent", false)};
  }
  if (type == "cos-linear") {
    require_keys(j, {"type", "w"}, where);
    return CosLinear{cfg.element(get_as<std::string>(j, "w", where))};
  }
  config_error(where + ": unknown functional type '" + type + "'");
}

CheckSpec parse_check(const json& j, std::size_t index, const ExperimentConfig& cfg) {
  const std::string where = "checks[" + std::to_string(index) + "]";
  const auto kind_name = get_as<std::string>(j, "kind", where);
  const auto kind = kind_from(kind_name);
  if (!kind) config_error(where + ": unknown kind '" + kind_name + "'");

  CheckSpec c;
  c.kind = *kind;
  c.name = j.contains("name") ? get_as<std::string>(j, "name", where)
                              : std::to_string(index) + "_" + kind_name;
  c.n_paths = get_opt<std::size_t>(j, "n_paths", where);
  c.grid_size = get_opt<std::size_t>(j, "grid_size", where);
  c.seed = get_opt<std::uint64_t>(j, "seed", where);
  c.threshold = get_opt<double>(j, "threshold", where);
  if (auto tol = get_opt<double>(j, "tolerance", where)) c.tolerance = *tol;

  auto functional = [&] { c.functional = parse_functional(j.at("functional"), cfg, where + ".functional"); };
  auto triple = [&] {
    c.theta = cfg.element(get_as<std::string>(j, "theta", where));
    c.k1 = cfg.kernel(get_as<std::string>(j, "k1", where));
    c.k2 = cfg.kernel(get_as<std::string>(j, "k2", where));
    require_same_profile(*c.theta, c.k1->element());
    require_same_profile(*c.theta, c.k2->element());
  };
  auto require_monomial = [&] {
    if (!std::holds_alternative<MonomialSpec>(*c.functional)) {
      config_error(where + ": this check needs a monomial functional");
    }
  };
  if (!j.contains("functional") && c.kind != CheckKind::Simulate) config_error(where + ": missing 'functional'");

  switch (c.kind) {
    case CheckKind::Simulate:
      require_keys(j, {"kind", "name", "n_paths", "grid_size", "seed", "threshold", "profile", "kernel", "times",
                       "write_paths", "format"},
                   where);
      c.profile = get_as<std::string>(j, "profile", where);
      if (!cfg.profiles.count(c.profile)) config_error(where + ": unknown profile '" + c.profile + "'");
      if (j.contains("kernel")) {
        c.kernel = cfg.kernel(get_as<std::string>(j, "kernel", where));
        if (!same_profile(c.kernel->profile(), cfg.profiles.at(c.profile))) {
          config_error(where + ": kernel lives over a different profile");
        }
      }
      c.times = j.value("times", std::vector<double>{});
      c.write_paths = j.value("write_paths", false);
      c.format = j.value("format", std::string("csv"));
      if (c.format != "csv" && c.format != "binary") config_error(where + ": format must be csv or binary");
      break;
    case CheckKind::Feynman:
      require_keys(j, {"kind", "name", "n_paths", "grid_size", "seed", "threshold", "functional", "kernel", "q",
                       "lambda", "monte_carlo", "expect", "tolerance"},
                   where);
      functional();
      if (j.contains("kernel")) c.kernel = cfg.kernel(get_as<std::string>(j, "kernel", where));
      c.q = get_opt<double>(j, "q", where);
      if (j.contains("lambda")) c.lambda = complex_from_json(j.at("lambda"));
      if (c.q.has_value() == c.lambda.has_value()) config_error(where + ": give exactly one of 'q' and 'lambda'");
      c.monte_carlo = j.value("monte_carlo", false);
      if (c.monte_carlo && (!c.lambda || c.lambda->imag() != 0.0)) {
        config_error(where + ": monte_carlo needs a real 'lambda'");
      }
      if (j.contains("expect")) c.expect = complex_from_json(j.at("expect"));
      break;
    case CheckKind::VerifyTranslation:
      require_keys(j, {"kind", "name", "n_paths", "grid_size", "seed", "threshold", "functional", "theta", "k1",
                       "k2"},
                   where);
      functional();
      triple();
      break;
    case CheckKind::VerifyParts:
      require_keys(j, {"kind", "name", "n_paths", "grid_size", "seed", "threshold", "functional", "theta", "k1",
                       "k2", "rho"},
                   where);
      functional();
      triple();
      c.rho = j.contains("rho") ? get_as<double>(j, "rho", where) : 1.0;
      break;
    case CheckKind::VerifyCS:
      require_keys(j, {"kind", "name", "n_paths", "grid_size", "seed", "threshold", "functional", "theta", "k1",
                       "k2", "q", "lambda", "tolerance"},
                   where);
      functional();
      triple();
      c.q = get_opt<double>(j, "q", where);
      if (j.contains("lambda")) c.lambda = complex_from_json(j.at("lambda"));
      if (c.q.has_value() == c.lambda.has_value()) config_error(where + ": give exactly one of 'q' and 'lambda'");
      if (c.q) require_monomial();
      if (c.lambda && c.lambda->imag() != 0.0) config_error(where + ": Monte Carlo needs a real 'lambda'");
      break;
    case CheckKind::VerifyRecurrence:
      require_keys(j, {"kind", "name", "functional", "q", "tolerance"}, where);
      functional();
      require_monomial();
      c.q = get_as<double>(j, "q", where);
      break;
  }
  return c;
}

}  // namespace

std::string_view to_string(CheckKind kind) {
  switch (kind) {
    case CheckKind::Simulate: return "simulate";
    case CheckKind::Feynman: return "feynman";
    case CheckKind::VerifyTranslation: return "verify-translation";
    case CheckKind::VerifyParts: return "verify-parts";
    case CheckKind::VerifyCS: return "verify-cs";
    case CheckKind::VerifyRecurrence: return "verify-recurrence";
  }
  return "unknown";
}

const CMElement& ExperimentConfig::element(const std::string& name) const {
  auto it = elements.find(name);
  if (it == elements.end()) config_error("unknown element '" + name + "'");
  return it->second;
}

SuppElement ExperimentConfig::kernel(const std::string& name) const {
  try {
    return SuppElement(element(name));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotInSupport) config_error("element '" + name + "' cannot be a kernel: " + e.what());
    throw;
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ProfilePair parse_profile_unchecked(const json& j, const std::string& name) {
  const std::string where = "profile '" + name + "'";
  require_keys(j, {"T", "a_prime", "b_prime", "name"}, where);
  const double T = get_as<double>(j, "T", where);
  if (!j.contains("a_prime") || !j.contains("b_prime")) config_error(where + ": needs a_prime and b_prime");
  return assemble_profile(poly_from_json(j.at("a_prime"), T), poly_from_json(j.at("b_prime"), T), T,
                          j.value("name", name));
}

ExperimentConfig parse_config(const json& j) {
  require_keys(j, {"seed", "n_paths", "grid_size", "threshold", "output_dir", "profiles", "elements", "monomial",
                   "checks"},
               "config");
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.hash = fnv1a_hex(j.dump());
  if (!j.contains("seed")) config_error("config: 'seed' is required");
  cfg.seed = get_as<std::uint64_t>(j, "seed", "config");
  if (j.contains("n_paths")) cfg.n_paths = get_as<std::size_t>(j, "n_paths", "config");
  if (j.contains("grid_size")) cfg.grid_size = get_as<std::size_t>(j, "grid_size", "config");
  if (j.contains("threshold")) cfg.threshold = get_as<double>(j, "threshold", "config");
  cfg.output_dir = j.value("output_dir", std::string());

  if (!j.contains("profiles") || !j.at("profiles").is_object()) config_error("config: 'profiles' object required");
  for (const auto& [name, spec] : j.at("profiles").items()) {
    ProfilePair p = parse_profile_unchecked(spec, name);
    cfg.profiles[name] = build_profile(p.a_prime, p.b_prime, p.horizon, p.name);
  }
  if (j.contains("elements")) {
    for (const auto& [name, spec] : j.at("elements").items()) {
      const std::string where = "element '" + name + "'";
      require_keys(spec, {"profile", "density"}, where);
      const auto pname = get_as<std::string>(spec, "profile", where);
      auto it = cfg.profiles.find(pname);
      if (it == cfg.profiles.end()) config_error(where + ": unknown profile '" + pname + "'");
      if (!spec.contains("density")) config_error(where + ": missing 'density'");
      cfg.elements.emplace(name, CMElement(poly_from_json(spec.at("density"), it->second->horizon), it->second));
    }
  }
  if (j.contains("monomial")) {
    const auto& m = j.at("monomial");
    require_keys(m, {"theta", "ks"}, "monomial");
    cfg.monomial = MonomialRef{get_as<std::string>(m, "theta", "monomial"),
                               get_as<std::vector<std::string>>(m, "ks", "monomial")};
    cfg.element(cfg.monomial->theta);
    for (const auto& k : cfg.monomial->ks) cfg.kernel(k);
  }
  if (j.contains("checks")) {
    if (!j.at("checks").is_array()) config_error("config: 'checks' must be an array");
    std::size_t i = 0;
    for (const auto& c : j.at("checks")) {
      CheckSpec spec = parse_check(c, i++, cfg);
      for (const auto& prev : cfg.checks) {
        if (prev.name == spec.name) config_error("duplicate check name '" + spec.name + "'");
      }
      cfg.checks.push_back(std::move(spec));
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    config_error("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

}  // namespace gpath
