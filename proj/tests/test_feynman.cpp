#include <doctest.h>

#include <algorithm>

#include "gpath/error.hpp"
#include "gpath/feynman.hpp"
#include "support.hpp"

using namespace gpath;

namespace {

const cplx I(0.0, 1.0);

PiecewisePoly poly(Coeffs c, double T = 1.0) { return PiecewisePoly::polynomial(std::move(c), T); }

ProfileRef standard() { return build_profile(poly({0, 1}), poly({1, 1}), 1.0, "std"); }

double exact(std::vector<long double> c) { return static_cast<double>(testing::antiderivative_integral(c, 0, 1)); }

struct StdConfig {
  ProfileRef p = standard();
  CMElement theta{poly({1}), p};
  SuppElement k1{CMElement(poly({1}), p)};
  SuppElement k2{CMElement(poly({0, 1}), p)};
  SuppElement b = identity_element(p);
};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigError;
}

bool close(cplx a, cplx b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

/// Independent Wick expansion: recursive enumeration of matchings where each
/// index is left single (contributing its mean) or paired with a later one.
double wick_oracle(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, std::vector<int> idx) {
  if (idx.empty()) return 1.0;
  const int first = idx.front();
  std::vector<int> rest(idx.begin() + 1, idx.end());
  double s = mean(first) * wick_oracle(mean, cov, rest);
  for (std::size_t j = 0; j < rest.size(); ++j) {
    std::vector<int> r2;
    for (std::size_t l = 0; l < rest.size(); ++l)
      if (l != j) r2.push_back(rest[l]);
    s += cov(first, rest[j]) * wick_oracle(mean, cov, r2);
  }
  return s;
}

ProfileRef random_profile(testing::Gen& g, double T) {
  auto bp = g.breakpoints(T, g.integer(1, 3));
  std::vector<Coeffs> bc;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    auto c = g.coeffs(g.integer(0, 2), 0.1);
    c[0] = 1.0 + g.uniform(0.0, 1.0);
    bc.push_back(c);
  }
  return build_profile(g.piecewise(T, 2, 3), PiecewisePoly(bp, bc), T);
}

MonomialSpec random_monomial(testing::Gen& g, const ProfileRef& p, int m) {
  MonomialSpec s{CMElement(g.piecewise(p->horizon, 2, 2), p), {}};
  for (int j = 0; j < m; ++j) s.ks.emplace_back(CMElement(g.kernel_density(p->horizon, 2, 2), p));
  return s;
}

}  // namespace

TEST_CASE("ComplexParam branches and domain") {
  for (double q : {0.5, 1.0, 3.0}) {
    const auto p = ComplexParam::feynman(q);
    CHECK(p.value() == cplx(0.0, -q));
    CHECK(p.inv() == I / q);
    const cplx expected = std::exp(I * M_PI / 4.0) / std::sqrt(q);
    CHECK(std::abs(p.inv_sqrt() - expected) < 1e-15);
    CHECK(std::abs(p.inv_sqrt() - std::sqrt(1.0 / cplx(0.0, -q))) < 1e-15);
    CHECK(p.sqrt().real() >= 0.0);
  }
  const auto neg = ComplexParam::feynman(-2.0);
  CHECK(std::abs(neg.inv_sqrt() * neg.inv_sqrt() - neg.inv()) < 1e-15);
  CHECK(code_of([] { ComplexParam::feynman(0.0); }) == ErrorCode::ZeroParameter);
  CHECK(code_of([] { ComplexParam::lambda({0.0, 1.0}); }) == ErrorCode::BadDomain);
  CHECK(code_of([] { ComplexParam::lambda({-1.0, 0.0}); }) == ErrorCode::BadDomain);
}

TEST_CASE("monomial_summary of the standard configuration") {
  StdConfig c;
  const auto s = monomial_summary(MonomialSpec{c.theta, {c.k1, c.k2}});
  CHECK(s.mean(0) == doctest::Approx(exact({0, 1})).epsilon(1e-14));
  CHECK(s.mean(1) == doctest::Approx(exact({0, 0, 1})).epsilon(1e-14));
  CHECK(s.cov(0, 1) == doctest::Approx(exact({0, 1, 1})).epsilon(1e-14));
  CHECK(s.cov(1, 0) == s.cov(0, 1));
  CHECK(s.is_psd());

  const auto w = wiener_profile();
  const auto zero_mean = monomial_summary(MonomialSpec{CMElement(poly({1, 2}), w), {SuppElement(CMElement(poly({3}), w))}});
  CHECK(zero_mean.mean(0) == 0.0);

  const auto dup = monomial_summary(MonomialSpec{c.theta, {c.k2, c.k2, c.k1}});
  CHECK(dup.cov.row(0) == dup.cov.row(1));
  CHECK(dup.is_psd());
}

TEST_CASE("Wick moment examples") {
  StdConfig c;
  const auto q1 = ComplexParam::feynman(1.0);
  CHECK(wick_moment(monomial_summary(MonomialSpec{c.theta, {}}), q1) == cplx(1.0, 0.0));

  const auto s1 = monomial_summary(MonomialSpec{c.theta, {c.k1}});
  for (double q : {1.0, -2.0, 3.0}) {
    const auto p = ComplexParam::feynman(q);
    CHECK(close(wick_moment(s1, p), std::sqrt(1.0 / cplx(0.0, -q)) * exact({0, 1}), 1e-14));
  }

  // i (Sigma_12 + m_1 m_2) with the hand-computed scalars
  const double sigma = exact({0, 1, 1}), m1 = exact({0, 1}), m2 = exact({0, 0, 1});
  const cplx expected = I * (sigma + m1 * m2);
  CHECK(close(wick_moment(monomial_summary(MonomialSpec{c.theta, {c.k2, c.k1}}), q1), expected, 1e-14));
  CHECK(close(feynman_monomial(MonomialSpec{c.theta, {c.k2, c.k1}}, 1.0), expected, 1e-13));
  CHECK(std::abs(feynman_monomial(MonomialSpec{c.theta, {c.k2, c.k1}}, 1.0) - I) < 1e-12);
}

TEST_CASE("feynman_monomial examples and errors") {
  const auto w = wiener_profile();
  const CMElement theta(poly({1, -1}), w);
  const SuppElement k(CMElement(poly({2}), w));
  CHECK(std::abs(feynman_monomial(MonomialSpec{theta, {k}}, 1.0)) < 1e-15);

  StdConfig c;
  CHECK(code_of([&] { feynman_monomial(MonomialSpec{c.theta, {c.k1}}, 0.0); }) == ErrorCode::ZeroParameter);
  MonomialSpec big{c.theta, std::vector<SuppElement>(13, c.k1)};
  CHECK(code_of([&] { wick_moment(monomial_summary(big), ComplexParam::feynman(1.0)); }) == ErrorCode::TooLargeDegree);
  CHECK(code_of([&] { feynman_monomial(big, 1.0); }) == ErrorCode::TooLargeDegree);

  const MonomialSpec mixed{c.theta, {c.k1, SuppElement(CMElement(poly({1}), wiener_profile()))}};
  CHECK(code_of([&] { monomial_summary(mixed); }) == ErrorCode::ProfileMismatch);
}

TEST_CASE("property: recurrence equals the Wick expansion") {
  testing::Gen g(51);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = random_profile(g, g.uniform(0.5, 1.5));
    const int m = g.integer(0, 8);
    const auto spec = random_monomial(g, p, m);
    const auto s = monomial_summary(spec);
    std::vector<int> idx(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) idx[static_cast<std::size_t>(j)] = j;
    const double moment = wick_oracle(s.mean, s.cov, idx);
    CHECK(gaussian_moment(s) == doctest::Approx(moment).epsilon(1e-10));
    for (double q : {1.0, -2.0, 3.0}) {
      const auto prm = ComplexParam::feynman(q);
      const cplx rec = feynman_monomial(spec, q);
      const cplx oracle = std::pow(prm.inv_sqrt(), m) * moment;
      CHECK(close(rec, oracle, 1e-10));
      CHECK(close(rec, wick_moment(s, prm), 1e-10));
    }
  }
}

TEST_CASE("property: permutation symmetry") {
  testing::Gen g(52);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_profile(g, 1.0);
    auto spec = random_monomial(g, p, g.integer(2, 6));
    const cplx before = feynman_monomial(spec, 1.7);
    std::shuffle(spec.ks.begin(), spec.ks.end(), g.engine());
    CHECK(close(feynman_monomial(spec, 1.7), before, 1e-12));
  }
}

TEST_CASE("analytic_fsi_monomial") {
  StdConfig c;
  const MonomialSpec m2{c.theta, {c.k2, c.k1}};
  const auto s = monomial_summary(m2);
  CHECK(close(analytic_fsi_monomial(m2, 1.0), gaussian_moment(s), 1e-14));

  // lambda -> -iq from the right half plane
  for (double eps : {1e-4, 1e-7}) {
    CHECK(close(analytic_fsi_monomial(m2, cplx(eps, -1.0)), feynman_monomial(m2, 1.0), 10 * eps));
  }

  const auto w = wiener_profile();
  const CMElement theta(poly({1, 1}), w);
  const MonomialSpec z2{theta, {SuppElement(CMElement(poly({1}), w)), SuppElement(CMElement(poly({0.5, -1}), w))}};
  const auto zs = monomial_summary(z2);
  CHECK(close(analytic_fsi_monomial(z2, 2.0), zs.cov(0, 1) / 2.0, 1e-14));
  CHECK(code_of([&] { analytic_fsi_monomial(z2, cplx(0.0, 1.0)); }) == ErrorCode::BadDomain);
}

TEST_CASE("analytic_fsi for exponential and cosine functionals") {
  StdConfig c;
  const CMElement w0(poly({1, -0.5}), c.p);
  const auto u = odot(w0, c.k2);
  const double mu = exact({0, 0, 1, -0.5});           // int t (1 - t/2) t dt
  const double var = exact({0, 0, 1, 0, -0.75, 0.25});  // int t^2 (1 - t/2)^2 (1 + t) dt
  CHECK(inner_with_a(u) == doctest::Approx(mu).epsilon(1e-13));
  CHECK(cm_inner(u, u) == doctest::Approx(var).epsilon(1e-13));

  for (double lam : {1.0, 2.5}) {
    const double r = 1.0 / std::sqrt(lam);
    const auto prm = ComplexParam::lambda(lam);
    const cplx cos_expected = std::cos(r * mu) * std::exp(-0.5 * r * r * var);
    CHECK(close(analytic_fsi(CosLinear{w0}, c.k2, prm), cos_expected, 1e-13));
    const cplx ce(0.3, 0.7);
    const cplx exp_expected = std::exp(ce * r * mu + 0.5 * ce * ce * r * r * var);
    CHECK(close(analytic_fsi(ExpLinear{w0, ce}, c.k2, prm), exp_expected, 1e-13));
  }
  // the monomial branch composes the kernel
  const MonomialSpec m1{c.theta, {c.k1}};
  CHECK(close(analytic_fsi(m1, c.k2, ComplexParam::lambda(1.0)), exact({0, 0, 1}), 1e-14));
}

TEST_CASE("first variation examples") {
  StdConfig c;
  const auto grid = make_grid(*c.p, 64);
  PathSampler s(c.p, grid, 3);
  std::vector<double> x(grid.size());
  const CMElement theta_k1 = odot(c.theta, c.k1);
  const double sigma = exact({0, 1, 1});
  for (std::uint64_t i = 0; i < 5; ++i) {
    s.values(i, x);
    // F = (theta, x)~
    const MonomialSpec lin{c.theta, {c.b}};
    CHECK(first_variation(lin, c.k1, c.k2, x, grid, theta_k1).real() ==
          doctest::Approx(cm_inner(odot(c.theta, c.k2), theta_k1)));
    CHECK(first_variation(lin, c.k1, c.k2, x, grid, theta_k1).real() == doctest::Approx(sigma).epsilon(1e-13));
    CHECK(first_variation(MonomialSpec{c.theta, {}}, c.k1, c.k2, x, grid, theta_k1) == cplx(0.0, 0.0));
  }
  const auto terms = first_variation_terms(MonomialSpec{c.theta, {c.k1, c.k2}}, c.k1, c.k2, theta_k1);
  REQUIRE(terms.size() == 2);
  CHECK(terms[0].factors.size() == 1);
}

TEST_CASE("property: first variation matches a central difference along the shifted path") {
  testing::Gen g(53);
  for (int trial = 0; trial < 12; ++trial) {
    const auto p = random_profile(g, 1.0);
    const SuppElement k1(CMElement(g.kernel_density(1.0, 1, 2), p));
    const SuppElement k2(CMElement(g.kernel_density(1.0, 1, 2), p));
    const CMElement w(g.piecewise(1.0, 1, 2), p);
    const CMElement w0(g.piecewise(1.0, 1, 2), p);
    std::vector<FunctionalSpec> fs{random_monomial(g, p, g.integer(1, 3)), CosLinear{w0},
                                   ExpLinear{w0, cplx(0.0, g.uniform(-1, 1))}};
    std::vector<CMElement> forms_all;
    for (const auto& f : fs)
      for (const auto& u : linear_forms(f)) forms_all.push_back(u);
    std::vector<const PiecewisePoly*> dens{&k1.density(), &k2.density(), &w.density(), &w0.density()};
    for (const auto& u : forms_all) dens.push_back(&u.density());
    const auto grid = make_grid(*p, 8192, std::span<const PiecewisePoly* const>(dens));
    PathSampler s(p, grid, 1000 + trial);
    std::vector<double> x(grid.size());
    s.values(0, x);
    const auto z1 = z_process_path(k1, x, grid);
    const auto shift = z_shift_path(k2, w, grid);
    for (const auto& f : fs) {
      auto value_at = [&](double alpha) {
        std::vector<double> y(grid.size());
        for (std::size_t j = 0; j < y.size(); ++j) y[j] = z1[j] + alpha * shift[j];
        std::vector<double> forms;
        for (const auto& u : linear_forms(f)) forms.push_back(pwz_integral(u, y, grid));
        return evaluate(f, forms);
      };
      const double h = 1e-4;
      const cplx fd = (value_at(h) - value_at(-h)) / (2 * h);
      const cplx fv = first_variation(f, k1, k2, x, grid, w);
      CHECK(std::abs(fd - fv) <= 2e-3 * std::max(1.0, std::abs(fv)));
    }
  }
}

TEST_CASE("Cameron-Storvick residual") {
  StdConfig c;
  // F = (theta, x)~ and the constant functional
  for (double q : {1.0, -2.0, 3.0}) {
    const auto lin = cameron_storvick_residual(MonomialSpec{c.theta, {c.b}}, c.theta, c.k1, c.k2, q);
    CHECK(std::abs(lin.residual) < 1e-10);
    const auto one = cameron_storvick_residual(MonomialSpec{c.theta, {}}, c.theta, c.k1, c.k2, q);
    CHECK(one.lhs == cplx(0.0, 0.0));
    CHECK(std::abs(one.residual) < 1e-12);
    // RHS of the constant functional by hand: -iq (-iq)^{-1/2} m - (-iq)^{1/2} m
    const auto prm = ComplexParam::feynman(q);
    const double m = inner_with_a(odot(c.theta, c.k2));
    CHECK(std::abs(one.rhs - (prm.value() * prm.inv_sqrt() * m - prm.sqrt() * m)) < 1e-14);
  }
  const auto m3 = cameron_storvick_residual(MonomialSpec{c.theta, {c.k1, c.k2, c.k1}}, c.theta, c.k1, c.k2, 1.0);
  CHECK(std::abs(m3.residual) < 1e-10);
  CHECK(std::abs(m3.corollary_residual) < 1e-10);
  const auto wick = cameron_storvick_residual(MonomialSpec{c.theta, {c.k1, c.k2, c.k1}}, c.theta, c.k1, c.k2, 1.0,
                                              ClosedFormEvaluator::Wick);
  CHECK(std::abs(wick.lhs - m3.lhs) < 1e-12);
  CHECK(std::abs(wick.rhs - m3.rhs) < 1e-12);
  CHECK(code_of([&] { cameron_storvick_residual(MonomialSpec{c.theta, {}}, c.theta, c.k1, c.k2, 0.0); }) ==
        ErrorCode::ZeroParameter);
}

TEST_CASE("property: Cameron-Storvick residual on random inputs, Wick evaluator, k = b reduction") {
  testing::Gen g(54);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_profile(g, g.uniform(0.5, 1.5));
    const auto spec = random_monomial(g, p, g.integer(0, 5));
    const CMElement theta(g.piecewise(p->horizon, 2, 2), p);
    const bool use_b = trial % 3 == 0;
    const SuppElement k1 = use_b ? identity_element(p) : SuppElement(CMElement(g.kernel_density(p->horizon, 2, 2), p));
    const SuppElement k2 = use_b ? identity_element(p) : SuppElement(CMElement(g.kernel_density(p->horizon, 2, 2), p));
    for (double q : {1.0, -2.0, 3.0}) {
      for (auto ev : {ClosedFormEvaluator::Recurrence, ClosedFormEvaluator::Wick}) {
        const auto r = cameron_storvick_residual(spec, theta, k1, k2, q, ev);
        const double scale = std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)});
        CHECK(std::abs(r.residual) < 1e-10 * scale);
        CHECK(std::abs(r.corollary_residual) < 1e-10 * scale);
      }
    }
  }
}
