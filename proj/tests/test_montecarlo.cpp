#include <doctest.h>

#include "gpath/error.hpp"
#include "gpath/montecarlo.hpp"
#include "support.hpp"

using namespace gpath;

namespace {

PiecewisePoly poly(Coeffs c, double T = 1.0) { return PiecewisePoly::polynomial(std::move(c), T); }

struct StdConfig {
  ProfileRef p = build_profile(poly({0, 1}), poly({1, 1}), 1.0, "std");
  CMElement theta{poly({1}), p};
  SuppElement k1{CMElement(poly({1}), p)};
  SuppElement k2{CMElement(poly({0, 1}), p)};
  SuppElement b = identity_element(p);
  CMElement zero{PiecewisePoly::zero(1.0), p};
};

MCOptions small(std::size_t n = 20000, std::size_t grid = 128, std::uint64_t seed = 42) {
  MCOptions o;
  o.n_paths = n;
  o.grid_steps = grid;
  o.seed = seed;
  return o;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigError;
}

bool same(const MCReport& a, const MCReport& b) {
  return a.estimate == b.estimate && a.std_error == b.std_error && a.n_paths == b.n_paths;
}

}  // namespace

TEST_CASE("mc_fsi basics") {
  StdConfig c;
  const auto one = mc_fsi(MonomialSpec{c.theta, {}}, c.k1, 1.0, small(1000));
  CHECK(one.estimate == cplx(1.0, 0.0));
  CHECK(one.std_error == 0.0);

  const auto w = wiener_profile();
  const MonomialSpec centred{CMElement(poly({1}), w), {SuppElement(CMElement(poly({0.5, 1}), w))}};
  const auto r = mc_fsi(centred, identity_element(w), 1.0, small());
  CHECK(std::abs(r.estimate) < 3.0 * r.std_error);

  CHECK(code_of([&] { mc_fsi(centred, identity_element(w), 0.0, small(10)); }) == ErrorCode::BadDomain);
  CHECK(code_of([&] { mc_fsi(ExpLinear{c.theta, cplx(0.5, 0.0)}, c.k1, 1.0, small(10)); }) ==
        ErrorCode::UnsupportedFunctional);
  const auto allowed = mc_fsi(ExpLinear{c.theta, cplx(0.5, 0.0), true}, c.k1, 1.0, small(10));
  CHECK_FALSE(allowed.notes.empty());
}

TEST_CASE("statistics: mc_fsi against the closed form") {
  StdConfig c;
  const MonomialSpec m2{c.theta, {c.k2, c.k1}};
  for (double lam : {1.0, 2.0}) {
    const auto r = mc_fsi(m2, c.b, lam, small());
    const cplx exact = analytic_fsi_monomial(m2, lam);
    CHECK(std::abs(r.estimate - exact) < 3.0 * r.std_error);
  }
  const auto cr = mc_fsi(CosLinear{c.theta}, c.k2, 2.0, small());
  CHECK(std::abs(cr.estimate - analytic_fsi(CosLinear{c.theta}, c.k2, ComplexParam::lambda(2.0))) <
        3.0 * cr.std_error);
}

TEST_CASE("degenerate identities cancel pathwise") {
  StdConfig c;
  const MonomialSpec m2{c.theta, {c.k2, c.k1}};
  const auto t0 = verify_translation(m2, c.zero, c.k1, c.k2, small(2000, 32));
  CHECK(t0.discrepancy <= 1e-12);
  CHECK(t0.combined_se == 0.0);
  CHECK(t0.pass);

  const auto p0 = verify_parts(m2, c.zero, c.k1, c.k2, 1.0, small(2000, 32));
  CHECK(p0.lhs.estimate == cplx(0.0, 0.0));
  CHECK(p0.rhs.estimate == cplx(0.0, 0.0));
  CHECK(p0.pass);
  const auto cs0 = verify_cs_precursor(m2, c.zero, c.k1, c.k2, 4.0, small(2000, 32));
  CHECK(std::abs(cs0.lhs.estimate) == 0.0);
  CHECK(std::abs(cs0.rhs.estimate) == 0.0);

  // F = 1: LHS is zero, RHS is the centred PWZ integral
  const auto f1 = verify_parts(MonomialSpec{c.theta, {}}, c.theta, c.k1, c.k2, 1.0, small());
  CHECK(f1.lhs.estimate == cplx(0.0, 0.0));
  CHECK(f1.sigma_ratio < 3.0);

  CHECK(code_of([&] { verify_parts(m2, c.theta, c.k1, c.k2, 0.0, small(10)); }) == ErrorCode::BadDomain);
  CHECK(code_of([&] { verify_cs_precursor(m2, c.theta, c.k1, c.k2, -1.0, small(10)); }) == ErrorCode::BadDomain);
}

TEST_CASE("parts at rho = 1 for the linear functional has a deterministic LHS") {
  StdConfig c;
  const auto r = verify_parts(MonomialSpec{c.theta, {c.b}}, c.theta, c.k1, c.k2, 1.0, small());
  const double sigma = static_cast<double>(testing::antiderivative_integral({0, 1, 1}, 0, 1));
  CHECK(r.lhs.estimate.real() == doctest::Approx(sigma).epsilon(1e-12));
  CHECK(r.lhs.std_error < 1e-12);
  CHECK(r.sigma_ratio < 3.0);
}

TEST_CASE("precursor at lambda = 1 reproduces parts at rho = 1") {
  StdConfig c;
  const MonomialSpec m2{c.theta, {c.k2, c.k1}};
  const auto a = verify_parts(m2, c.theta, c.k1, c.k2, 1.0, small(5000, 64));
  const auto b = verify_cs_precursor(m2, c.theta, c.k1, c.k2, 1.0, small(5000, 64));
  CHECK(same(a.lhs, b.lhs));
  CHECK(same(a.rhs, b.rhs));
  CHECK(a.sigma_ratio == b.sigma_ratio);
  CHECK(a.combined_se == b.combined_se);
}

TEST_CASE("statistics: identities at moderate n") {
  StdConfig c;
  const MonomialSpec m1{c.theta, {c.k2}};
  const MonomialSpec m2{c.theta, {c.k2, c.k1}};
  const CMElement w0(poly({1, -0.5}), c.p);
  CHECK(verify_translation(CosLinear{w0}, c.theta, c.k1, c.k2, small()).pass);
  CHECK(verify_translation(m1, c.theta, c.k1, c.k2, small()).pass);
  CHECK(verify_translation(ExpLinear{w0, cplx(0, 1)}, c.theta, c.k2, c.k1, small()).pass);
  CHECK(verify_parts(m2, c.theta, c.k1, c.k2, 2.0, small()).pass);
  CHECK(verify_parts(CosLinear{w0}, c.theta, c.k1, c.k2, 1.5, small()).pass);
  CHECK(verify_cs_precursor(m1, c.theta, c.k1, c.k2, 4.0, small()).pass);

  // translation for m = 1 in closed form: E[(u, Z_k1 + shift)~] = mean + (u odot k2, theta odot k1)
  const auto t = verify_translation(m1, c.theta, c.k1, c.k2, small());
  const auto u = odot(c.theta, c.k2);
  const double closed = inner_with_a(odot(u, c.k1)) + cm_inner(odot(u, c.k2), odot(c.theta, c.k1));
  CHECK(std::abs(t.lhs.estimate.real() - closed) < 3.0 * t.lhs.std_error);
}

TEST_CASE("reports are deterministic and independent of the worker count") {
  StdConfig c;
  const MonomialSpec m2{c.theta, {c.k2, c.k1}};
  auto o1 = small(4000, 64);
  o1.workers = 1;
  auto o4 = o1;
  o4.workers = 4;
  const auto a = verify_parts(m2, c.theta, c.k1, c.k2, 2.0, o1);
  const auto b = verify_parts(m2, c.theta, c.k1, c.k2, 2.0, o4);
  CHECK(same(a.lhs, b.lhs));
  CHECK(same(a.rhs, b.rhs));
  CHECK(a.sigma_ratio == b.sigma_ratio);
  const auto f1 = mc_fsi(m2, c.k2, 1.0, o1), f4 = mc_fsi(m2, c.k2, 1.0, o4);
  CHECK(same(f1, f4));
}

TEST_CASE("standard error scales like n^{-1/2}") {
  StdConfig c;
  const MonomialSpec m2{c.theta, {c.k2, c.k1}};
  const auto a = mc_fsi(m2, c.k2, 1.0, small(20000, 64));
  const auto b = mc_fsi(m2, c.k2, 1.0, small(40000, 64, 43));
  const double ratio = a.std_error / b.std_error;
  CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.10));
}

TEST_CASE("halving the grid step moves the estimate by less than one SE") {
  StdConfig c;
  const MonomialSpec m2{c.theta, {c.k2, c.k1}};
  auto coarse = small(20000, 512);
  coarse.substeps = 2;
  const auto fine = small(20000, 1024);
  for (const FunctionalSpec& f : {FunctionalSpec{m2}, FunctionalSpec{CosLinear{c.theta}}}) {
    const auto a = mc_fsi(f, c.k2, 1.0, coarse);
    const auto b = mc_fsi(f, c.k2, 1.0, fine);
    CHECK(std::abs(a.estimate - b.estimate) < a.std_error);
  }
}

TEST_CASE("moment check of Z_k") {
  StdConfig c;
  const std::vector<double> times{0.2, 0.4, 0.6, 0.8, 1.0};
  // constant kernel: the left-point scheme is exact on any grid
  const auto r = check_z_moments(c.k1, times, small(20000, 32));
  CHECK(r.pass);
  CHECK(r.mean_rows.size() == 5);
  CHECK(r.cov_rows.size() == 15);
  for (const auto& row : r.mean_rows) CHECK(std::abs(row.z_score) < 4.0);
  CHECK(check_z_moments(c.k2, times, small(20000, 1024)).pass);
}
