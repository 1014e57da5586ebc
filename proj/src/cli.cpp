#include "gpath/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include "gpath/config.hpp"
#include "gpath/error.hpp"
#include "gpath/montecarlo.hpp"
#include "gpath/serialize.hpp"

namespace gpath::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

const char* const kLedgerHeader =
    "check,config_hash,n,grid,seed,lhs_re,lhs_im,rhs_re,rhs_im,se,sigma_ratio,pass,wall_time";

struct Overrides {
  std::optional<std::size_t> n_paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid;
  std::optional<double> threshold;
};

struct CheckOutcome {
  std::string name;
  std::string kind;
  std::size_t n = 0;
  std::size_t grid = 0;
  std::uint64_t seed = 0;
  cplx lhs;
  cplx rhs;
  double se = 0.0;
  double sigma_ratio = 0.0;
  bool pass = false;
  double wall_time = 0.0;
  json detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

MCOptions mc_options(const ExperimentConfig& cfg, const CheckSpec& c, const Overrides& o) {
  MCOptions opts;
  opts.n_paths = o.n_paths.value_or(c.n_paths.value_or(cfg.n_paths));
  opts.seed = o.seed.value_or(c.seed.value_or(cfg.seed));
  opts.grid_steps = o.grid.value_or(c.grid_size.value_or(cfg.grid_size));
  opts.threshold = o.threshold.value_or(c.threshold.value_or(cfg.threshold));
  return opts;
}

json to_json(const MomentCheckReport& r) {
  auto rows = [](const std::vector<MomentCheckRow>& v) {
    json a = json::array();
    for (const auto& row : v) {
      a.push_back({{"s", row.s}, {"t", row.t}, {"expected", row.expected}, {"sample", row.sample},
                   {"std_error", row.std_error}, {"z_score", row.z_score}});
    }
    return a;
  };
  return {{"mean", rows(r.mean_rows)}, {"covariance", rows(r.cov_rows)}, {"n_paths", r.n_paths},
          {"grid_size", r.grid_size},  {"seed", r.seed},                  {"threshold", r.threshold},
          {"wall_time", r.wall_time},  {"pass", r.pass}};
}

void fill_from(CheckOutcome& out, const IdentityReport& r) {
  out.lhs = r.lhs.estimate;
  out.rhs = r.rhs.estimate;
  out.se = r.combined_se;
  out.sigma_ratio = r.sigma_ratio;
  out.pass = r.pass;
  out.detail = gpath::to_json(r);
}

void fill_closed_form(CheckOutcome& out, cplx lhs, cplx rhs, double tol, double scale) {
  out.lhs = lhs;
  out.rhs = rhs;
  const double err = std::abs(lhs - rhs);
  out.sigma_ratio = err / tol;
  out.pass = err <= tol * scale;
}

const MonomialSpec& monomial_of(const CheckSpec& c) { return std::get<MonomialSpec>(*c.functional); }

void write_ensemble(const ProfileRef& profile, const TimeGrid& grid, const std::optional<SuppElement>& kernel,
                    std::size_t n, std::uint64_t seed, PathFormat format, std::ostream& os) {
  PathSampler sampler(profile, grid, seed);
  EnsembleWriter writer(os, format, grid, n, seed);
  std::vector<double> x(grid.size());
  for (std::size_t p = 0; p < n; ++p) {
    sampler.values(p, x);
    if (kernel) {
      writer.row(z_process_path(*kernel, x, grid));
    } else {
      writer.row(x);
    }
  }
}

PathFormat parse_format(const std::string& s) {
  if (s == "csv") return PathFormat::Csv;
  if (s == "binary") return PathFormat::Binary;
  throw Error(ErrorCode::ConfigError, "format must be csv or binary");
}

CheckOutcome run_check(const ExperimentConfig& cfg, const CheckSpec& c, const Overrides& o,
                       const fs::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const MCOptions opts = mc_options(cfg, c, o);
  CheckOutcome out;
  out.name = c.name;
  out.kind = std::string(to_string(c.kind));
  out.seed = opts.seed;
  auto mc_sized = [&] {
    out.n = opts.n_paths;
    out.grid = opts.grid_steps;
  };

  switch (c.kind) {
    case CheckKind::Simulate: {
      mc_sized();
      const ProfileRef& profile = cfg.profiles.at(c.profile);
      json detail = {{"profile", c.profile}};
      out.pass = true;
      if (c.kernel && !c.times.empty()) {
        const double threshold = o.threshold.value_or(c.threshold.value_or(4.0));
        const auto r = check_z_moments(*c.kernel, c.times, opts, threshold);
        const MomentCheckRow* worst = nullptr;
        for (const auto* rows : {&r.mean_rows, &r.cov_rows}) {
          for (const auto& row : *rows) {
            if (!worst || std::abs(row.z_score) > std::abs(worst->z_score)) worst = &row;
          }
        }
        if (worst) {
          out.lhs = worst->sample;
          out.rhs = worst->expected;
          out.se = worst->std_error;
          out.sigma_ratio = std::abs(worst->z_score);
        }
        out.pass = r.pass;
        detail["moments"] = to_json(r);
      }
      if (c.write_paths) {
        const auto format = parse_format(c.format);
        const TimeGrid grid =
            c.kernel ? make_grid(*profile, opts.grid_steps, {&c.kernel->density()}) : make_grid(*profile, opts.grid_steps);
        const fs::path file = out_dir / (c.name + (format == PathFormat::Csv ? ".csv" : ".bin"));
        std::ofstream os(file, std::ios::binary);
        if (!os) throw Error(ErrorCode::ConfigError, "cannot write " + file.string());
        write_ensemble(profile, grid, c.kernel, opts.n_paths, opts.seed, format, os);
        detail["paths_file"] = file.string();
      }
      out.detail = detail;
      break;
    }
    case CheckKind::Feynman: {
      const ComplexParam param = c.q ? ComplexParam::feynman(*c.q) : ComplexParam::lambda(*c.lambda);
      const SuppElement k = c.kernel ? *c.kernel : identity_element(profile_of(*c.functional));
      const cplx value = analytic_fsi(*c.functional, k, param);
      if (c.monte_carlo) {
        mc_sized();
        const auto mc = mc_fsi(*c.functional, k, c.lambda->real(), opts);
        out.lhs = mc.estimate;
        out.rhs = value;
        out.se = mc.std_error;
        const double diff = std::abs(mc.estimate - value);
        out.sigma_ratio = mc.std_error > 0.0 ? diff / mc.std_error
                          : diff <= 1e-12 * std::max(1.0, std::abs(value)) ? 0.0
                                                                            : INFINITY;
        out.pass = out.sigma_ratio < opts.threshold;
        out.detail = {{"closed_form", gpath::to_json(value)}, {"monte_carlo", gpath::to_json(mc)}};
      } else if (c.expect) {
        fill_closed_form(out, value, *c.expect, c.tolerance, std::max(1.0, std::abs(*c.expect)));
        out.detail = {{"value", gpath::to_json(value)}, {"expect", gpath::to_json(*c.expect)}};
      } else {
        out.lhs = out.rhs = value;
        out.pass = std::isfinite(value.real()) && std::isfinite(value.imag());
        out.detail = {{"value", gpath::to_json(value)}};
      }
      break;
    }
    case CheckKind::VerifyTranslation:
      mc_sized();
      fill_from(out, verify_translation(*c.functional, *c.theta, *c.k1, *c.k2, opts));
      break;
    case CheckKind::VerifyParts:
      mc_sized();
      fill_from(out, verify_parts(*c.functional, *c.theta, *c.k1, *c.k2, c.rho.value_or(1.0), opts));
      break;
    case CheckKind::VerifyCS:
      if (c.lambda) {
        mc_sized();
        fill_from(out, verify_cs_precursor(*c.functional, *c.theta, *c.k1, *c.k2, c.lambda->real(), opts));
      } else {
        const auto r = cameron_storvick_residual(monomial_of(c), *c.theta, *c.k1, *c.k2, *c.q);
        fill_closed_form(out, r.lhs, r.rhs, c.tolerance, 1.0);
        out.pass = out.pass && std::abs(r.corollary_residual) <= c.tolerance;
        out.detail = gpath::to_json(r);
      }
      break;
    case CheckKind::VerifyRecurrence: {
      const auto s = monomial_summary(monomial_of(c));
      const auto param = ComplexParam::feynman(*c.q);
      const cplx rec = recurrence_moment(s, param);
      const cplx wick = wick_moment(s, param);
      fill_closed_form(out, rec, wick, c.tolerance, std::max(1.0, std::abs(wick)));
      out.detail = {{"recurrence", gpath::to_json(rec)}, {"wick", gpath::to_json(wick)}, {"audit", gpath::to_json(s)}};
      break;
    }
  }
  out.wall_time = seconds_since(t0);
  out.detail["name"] = out.name;
  out.detail["kind"] = out.kind;
  out.detail["pass"] = out.pass;
  out.detail["wall_time"] = out.wall_time;
  return out;
}

std::string ledger_row(const CheckOutcome& r, const std::string& hash) {
  std::ostringstream os;
  os << r.name << ',' << hash << ',' << r.n << ',' << r.grid << ',' << r.seed << ',' << format_double(r.lhs.real())
     << ',' << format_double(r.lhs.imag()) << ',' << format_double(r.rhs.real()) << ','
     << format_double(r.rhs.imag()) << ',' << format_double(r.se) << ',' << format_double(r.sigma_ratio) << ','
     << (r.pass ? "true" : "false") << ',' << format_double(r.wall_time);
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

cplx parse_complex_flag(const std::string& s) {
  const auto parts = split(s, ',');
  try {
    if (parts.size() == 1) return {std::stod(parts[0]), 0.0};
    if (parts.size() == 2) return {std::stod(parts[0]), std::stod(parts[1])};
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ConfigError, "expected RE or RE,IM, got '" + s + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "'" + path + "': " + e.what());
  }
}

int cmd_validate_profile(const std::string& file, std::ostream& out) {
  const json j = read_json_file(file);
  auto one = [](const json& spec, const std::string& name) {
    const ProfilePair p = parse_profile_unchecked(spec, name);
    json r = gpath::to_json(validate_profile(p));
    r["name"] = p.name;
    r["T"] = p.horizon;
    return r;
  };
  json report;
  bool ok = true;
  if (j.contains("profiles")) {
    report = json::object();
    for (const auto& [name, spec] : j.at("profiles").items()) {
      report[name] = one(spec, name);
      ok = ok && report[name]["pass"].get<bool>();
    }
    report = {{"profiles", report}, {"pass", ok}};
  } else {
    report = one(j, fs::path(file).stem().string());
    ok = report["pass"].get<bool>();
  }
  out << report.dump(2) << '\n';
  return ok ? kExitOk : kExitFailed;
}

struct FeynmanArgs {
  std::string config;
  std::string monomial;
  std::string theta;
  std::string ks;
  std::optional<double> q;
  std::string lambda;
  bool audit = false;
};

int cmd_feynman(const FeynmanArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = load_config(a.config);
  std::string theta_name;
  std::vector<std::string> ks;
  if (!a.theta.empty() || !a.ks.empty()) {
    theta_name = a.theta;
    if (!a.ks.empty()) ks = split(a.ks, ',');
  } else {
    if (!cfg.monomial) throw Error(ErrorCode::ConfigError, "config has no 'monomial'; use --theta/--ks");
    theta_name = cfg.monomial->theta;
    ks = cfg.monomial->ks;
  }
  if (theta_name.empty()) throw Error(ErrorCode::ConfigError, "--ks needs --theta");
  if (!a.monomial.empty()) {
    if (a.monomial.rfind("m=", 0) != 0) throw Error(ErrorCode::ConfigError, "--monomial expects m=N");
    std::size_t m = 0;
    try {
      m = std::stoul(a.monomial.substr(2));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "--monomial expects m=N");
    }
    if (m > 0 && ks.empty()) throw Error(ErrorCode::ConfigError, "no kernels to build a monomial from");
    std::vector<std::string> chosen;
    for (std::size_t j = 0; j < m; ++j) chosen.push_back(ks[j % ks.size()]);
    ks = chosen;
  }
  MonomialSpec spec{cfg.element(theta_name), {}};
  for (const auto& k : ks) spec.ks.push_back(cfg.kernel(k));
  for (const auto& k : spec.ks) require_same_profile(spec.theta, k.element());

  if (a.q.has_value() == !a.lambda.empty()) throw Error(ErrorCode::ConfigError, "give exactly one of --q and --lambda");
  const ComplexParam param = a.q ? ComplexParam::feynman(*a.q) : ComplexParam::lambda(parse_complex_flag(a.lambda));
  const cplx value = recurrence_moment(monomial_summary(spec), param);
  if (a.audit) {
    out << json{{"value", gpath::to_json(value)}, {"degree", spec.degree()}, {"kernels", ks},
                {"theta", theta_name}, {"audit", gpath::to_json(monomial_summary(spec))}}
               .dump(2)
        << '\n';
  } else {
    out << gpath::to_json(value).dump() << '\n';
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string config;
  std::string profile;
  std::string kernel;
  std::string format = "csv";
  std::string out;
  Overrides o;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = load_config(a.config);
  std::string pname = a.profile;
  if (pname.empty()) {
    if (cfg.profiles.size() != 1) throw Error(ErrorCode::ConfigError, "--profile is required with several profiles");
    pname = cfg.profiles.begin()->first;
  }
  const auto it = cfg.profiles.find(pname);
  if (it == cfg.profiles.end()) throw Error(ErrorCode::ConfigError, "unknown profile '" + pname + "'");
  std::optional<SuppElement> kernel;
  if (!a.kernel.empty()) {
    kernel = cfg.kernel(a.kernel);
    if (!same_profile(kernel->profile(), it->second)) {
      throw Error(ErrorCode::ProfileMismatch, "kernel lives over a different profile");
    }
  }
  const auto format = parse_format(a.format);
  const std::size_t n = a.o.n_paths.value_or(cfg.n_paths);
  const std::uint64_t seed = a.o.seed.value_or(cfg.seed);
  const std::size_t steps = a.o.grid.value_or(cfg.grid_size);
  const TimeGrid grid = kernel ? make_grid(*it->second, steps, {&kernel->density()}) : make_grid(*it->second, steps);
  if (a.out.empty()) {
    write_ensemble(it->second, grid, kernel, n, seed, format, out);
    return kExitOk;
  }
  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw Error(ErrorCode::ConfigError, "cannot write " + a.out);
  write_ensemble(it->second, grid, kernel, n, seed, format, os);
  out << json{{"profile", pname}, {"n_paths", n},   {"grid_size", grid.steps()}, {"seed", seed},
              {"format", a.format}, {"file", a.out}, {"process", kernel ? "Z_" + a.kernel : "x"}}
             .dump(2)
      << '\n';
  return kExitOk;
}

struct VerifyArgs {
  std::string config;
  bool all = false;
  std::vector<std::string> checks;
  bool parallel = false;
  std::string ledger;
  bool fresh = false;
  std::string output_dir;
  Overrides o;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = load_config(a.config);
  std::vector<const CheckSpec*> selected;
  for (const auto& c : cfg.checks) {
    if (a.all || a.checks.empty() || std::find(a.checks.begin(), a.checks.end(), c.name) != a.checks.end()) {
      selected.push_back(&c);
    }
  }
  for (const auto& name : a.checks) {
    const bool known = std::any_of(cfg.checks.begin(), cfg.checks.end(), [&](const CheckSpec& c) { return c.name == name; });
    if (!known) throw Error(ErrorCode::ConfigError, "unknown check '" + name + "'");
  }

  const fs::path out_dir = !a.output_dir.empty()      ? fs::path(a.output_dir)
                           : !cfg.output_dir.empty() ? fs::path(cfg.output_dir)
                                                     : fs::path("gpath_out");
  fs::create_directories(out_dir);
  const fs::path ledger = a.ledger.empty() ? out_dir / "ledger.csv" : fs::path(a.ledger);
  if (ledger.has_parent_path()) fs::create_directories(ledger.parent_path());

  std::vector<CheckOutcome> results(selected.size());
  if (a.parallel) {
    std::vector<std::future<CheckOutcome>> futures;
    for (const auto* c : selected) {
      futures.push_back(std::async(std::launch::async, [&, c] { return run_check(cfg, *c, a.o, out_dir); }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) results[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < selected.size(); ++i) results[i] = run_check(cfg, *selected[i], a.o, out_dir);
  }

  const bool header = a.fresh || !fs::exists(ledger) || fs::file_size(ledger) == 0;
  std::ofstream lf(ledger, a.fresh ? std::ios::trunc : std::ios::app);
  if (!lf) throw Error(ErrorCode::ConfigError, "cannot write ledger " + ledger.string());
  if (header) lf << kLedgerHeader << '\n';

  json summary = {{"config_hash", cfg.hash}, {"ledger", ledger.string()}, {"checks", json::array()}};
  std::size_t failed = 0;
  for (const auto& r : results) {
    lf << ledger_row(r, cfg.hash) << '\n';
    std::ofstream jf(out_dir / (r.name + ".json"));
    jf << r.detail.dump(2) << '\n';
    if (!r.pass) ++failed;
    summary["checks"].push_back(
        {{"name", r.name}, {"kind", r.kind}, {"pass", r.pass}, {"sigma_ratio", r.sigma_ratio}, {"se", r.se}});
  }
  summary["passed"] = results.size() - failed;
  summary["failed"] = failed;
  out << summary.dump(2) << '\n';
  return failed == 0 ? kExitOk : kExitFailed;
}

int cmd_report(const std::string& ledger, std::ostream& out) {
  std::ifstream in(ledger);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open ledger '" + ledger + "'");
  std::string line;
  if (!std::getline(in, line) || line != kLedgerHeader) {
    throw Error(ErrorCode::ConfigError, "'" + ledger + "' is not a ledger");
  }
  const auto columns = split(kLedgerHeader, ',');
  json rows = json::array();
  std::size_t failed = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != columns.size()) throw Error(ErrorCode::ConfigError, "malformed ledger row: " + line);
    json row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& key = columns[i];
      if (key == "check" || key == "config_hash") {
        row[key] = cells[i];
      } else if (key == "pass") {
        row[key] = cells[i] == "true";
      } else if (key == "n" || key == "grid" || key == "seed") {
        row[key] = std::stoull(cells[i]);
      } else {
        row[key] = std::stod(cells[i]);
      }
    }
    if (!row["pass"].get<bool>()) ++failed;
    rows.push_back(row);
  }
  out << json{{"rows", rows}, {"passed", rows.size() - failed}, {"failed", failed}}.dump(2) << '\n';
  return failed == 0 ? kExitOk : kExitFailed;
}

void add_overrides(CLI::App* sub, Overrides& o, bool threshold) {
  sub->add_option("--n", o.n_paths, "number of paths");
  sub->add_option("--seed", o.seed, "RNG seed");
  sub->add_option("--grid", o.grid, "uniform grid steps");
  if (threshold) sub->add_option("--threshold", o.threshold, "sigma_ratio threshold");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian path-space calculus and analytic Feynman integrals", "gpath"};
  app.require_subcommand(1);

  std::string profile_file;
  auto* validate = app.add_subcommand("validate-profile", "check a' and b' of a profile");
  validate->add_option("file", profile_file, "profile or config JSON")->required();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "sample GBMP paths");
  simulate->add_option("--config", sim.config)->required();
  simulate->add_option("--profile", sim.profile);
  simulate->add_option("--kernel", sim.kernel, "emit Z_k paths for this element");
  simulate->add_option("--format", sim.format)->check(CLI::IsMember({"csv", "binary"}));
  simulate->add_option("--out", sim.out);
  add_overrides(simulate, sim.o, false);

  FeynmanArgs fey;
  auto* feynman = app.add_subcommand("feynman", "closed-form analytic Feynman integral of a monomial");
  feynman->add_option("--config", fey.config)->required();
  feynman->add_option("--monomial", fey.monomial, "m=N: first N kernels of the config monomial, cycled");
  feynman->add_option("--theta", fey.theta);
  feynman->add_option("--ks", fey.ks, "comma-separated kernel names");
  feynman->add_option("--q", fey.q, "Feynman parameter, lambda = -iq");
  feynman->add_option("--lambda", fey.lambda, "RE or RE,IM with RE > 0");
  feynman->add_flag("--audit", fey.audit, "print the means and inner products used");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "run the checks of a config");
  verify->add_option("--config", ver.config)->required();
  verify->add_flag("--all", ver.all);
  verify->add_option("--check", ver.checks, "check name, repeatable");
  verify->add_flag("--parallel", ver.parallel);
  verify->add_option("--ledger", ver.ledger);
  verify->add_flag("--fresh", ver.fresh, "replace the ledger instead of appending to it");
  verify->add_option("--output-dir", ver.output_dir);
  add_overrides(verify, ver.o, true);

  std::string ledger;
  auto* report = app.add_subcommand("report", "summarize a ledger");
  report->add_option("--ledger", ledger)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*validate) return cmd_validate_profile(profile_file, out);
    if (*simulate) return cmd_simulate(sim, out);
    if (*feynman) return cmd_feynman(fey, out);
    if (*verify) return cmd_verify(ver, out);
    if (*report) return cmd_report(ledger, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace gpath::cli
