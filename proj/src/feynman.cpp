#include "gpath/feynman.hpp"

#include <bit>
#include <cmath>
#include <optional>
#include <string>

#include "gpath/error.hpp"

namespace gpath {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_degree(std::size_t m) {
  if (m > kMaxMonomialDegree) {
    throw Error(ErrorCode::TooLargeDegree,
                "degree " + std::to_string(m) + " exceeds the limit of " + std::to_string(kMaxMonomialDegree));
  }
}

// Sum over pair/singleton partitions of the indices in `rest`.
double wick_sum(const GaussianSummary& s, std::uint32_t rest) {
  if (rest == 0) return 1.0;
  const int i = std::countr_zero(rest);
  const std::uint32_t without_i = rest & ~(1u << i);
  double total = s.mean(i) * wick_sum(s, without_i);
  for (std::uint32_t others = without_i; others != 0; others &= others - 1) {
    const int j = std::countr_zero(others);
    total += s.cov(i, j) * wick_sum(s, without_i & ~(1u << j));
  }
  return total;
}

class RecurrenceTable {
 public:
  RecurrenceTable(const GaussianSummary& s, const ComplexParam& p)
      : s_(s), inv_(p.inv()), inv_sqrt_(p.inv_sqrt()), memo_(std::size_t{1} << s.size()) {}

  cplx operator()(std::uint32_t set) {
    auto& slot = memo_[set];
    if (slot) return *slot;
    slot = compute(set);
    return *slot;
  }

 private:
  cplx compute(std::uint32_t set) {
    const int count = std::popcount(set);
    if (count == 0) return 1.0;
    const int top = 31 - std::countl_zero(set);
    if (count == 1) return inv_sqrt_ * s_.mean(top);
    if (count == 2) {
      const int other = std::countr_zero(set);
      return inv_ * (s_.cov(other, top) + s_.mean(other) * s_.mean(top));
    }
    const std::uint32_t rest = set & ~(1u << top);
    cplx paired = 0.0;
    for (std::uint32_t it = rest; it != 0; it &= it - 1) {
      const int l = std::countr_zero(it);
      paired += s_.cov(l, top) * (*this)(rest & ~(1u << l));
    }
    return inv_ * paired + inv_sqrt_ * s_.mean(top) * (*this)(rest);
  }

  const GaussianSummary& s_;
  cplx inv_;
  cplx inv_sqrt_;
  std::vector<std::optional<cplx>> memo_;
};

std::uint32_t full_mask(std::size_t m) { return m == 0 ? 0u : static_cast<std::uint32_t>((std::uint64_t{1} << m) - 1); }

cplx moment_on(const GaussianSummary& s, std::uint32_t mask, const ComplexParam& p, ClosedFormEvaluator ev) {
  const GaussianSummary sub = s.subset(mask);
  return ev == ClosedFormEvaluator::Wick ? wick_moment(sub, p) : recurrence_moment(sub, p);
}

}  // namespace

ComplexParam ComplexParam::lambda(cplx value) {
  if (!(value.real() > 0.0)) throw Error(ErrorCode::BadDomain, "lambda must have positive real part");
  return ComplexParam(value, false, 0.0);
}

ComplexParam ComplexParam::feynman(double q) {
  if (q == 0.0 || !std::isfinite(q)) throw Error(ErrorCode::ZeroParameter, "q must be a nonzero real number");
  return ComplexParam(cplx(0.0, -q), true, q);
}

cplx ComplexParam::inv() const { return feynman_ ? cplx(0.0, 1.0 / q_) : 1.0 / value_; }
cplx ComplexParam::sqrt() const { return std::sqrt(value_); }
cplx ComplexParam::inv_sqrt() const { return std::sqrt(inv()); }

std::vector<CMElement> MonomialSpec::factors() const {
  std::vector<CMElement> out;
  out.reserve(ks.size());
  for (const auto& k : ks) out.push_back(odot(theta, k));
  return out;
}

std::vector<CMElement> linear_forms(const FunctionalSpec& f) {
  return std::visit(overloaded{[](const MonomialSpec& m) { return m.factors(); },
                               [](const ExpLinear& e) { return std::vector<CMElement>{e.w}; },
                               [](const CosLinear& c) { return std::vector<CMElement>{c.w}; }},
                    f);
}

const ProfileRef& profile_of(const FunctionalSpec& f) {
  return std::visit(overloaded{[](const MonomialSpec& m) -> const ProfileRef& { return m.theta.profile(); },
                               [](const ExpLinear& e) -> const ProfileRef& { return e.w.profile(); },
                               [](const CosLinear& c) -> const ProfileRef& { return c.w.profile(); }},
                    f);
}

cplx evaluate(const FunctionalSpec& f, std::span<const double> forms) {
  return std::visit(overloaded{[&](const MonomialSpec&) {
                                 double p = 1.0;
                                 for (double v : forms) p *= v;
                                 return cplx(p);
                               },
                               [&](const ExpLinear& e) { return std::exp(e.c * forms[0]); },
                               [&](const CosLinear&) { return cplx(std::cos(forms[0])); }},
                    f);
}

cplx directional_derivative(const FunctionalSpec& f, std::span<const double> forms,
                            std::span<const double> direction) {
  return std::visit(overloaded{[&](const MonomialSpec&) {
                                 double total = 0.0;
                                 for (std::size_t l = 0; l < forms.size(); ++l) {
                                   double p = direction[l];
                                   for (std::size_t j = 0; j < forms.size(); ++j)
                                     if (j != l) p *= forms[j];
                                   total += p;
                                 }
                                 return cplx(total);
                               },
                               [&](const ExpLinear& e) { return e.c * direction[0] * std::exp(e.c * forms[0]); },
                               [&](const CosLinear&) { return cplx(-std::sin(forms[0]) * direction[0]); }},
                    f);
}

bool GaussianSummary::is_psd(double tol) const {
  if (size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

GaussianSummary GaussianSummary::subset(std::uint32_t mask) const {
  std::vector<int> idx;
  for (std::uint32_t it = mask; it != 0; it &= it - 1) idx.push_back(std::countr_zero(it));
  const auto n = static_cast<Eigen::Index>(idx.size());
  GaussianSummary out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.mean(i) = mean(idx[i]);
    for (Eigen::Index j = 0; j < n; ++j) out.cov(i, j) = cov(idx[i], idx[j]);
  }
  return out;
}

GaussianSummary summarize(std::span<const CMElement> elements) {
  const auto n = static_cast<Eigen::Index>(elements.size());
  GaussianSummary s{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    s.mean(i) = inner_with_a(elements[i]);
    for (Eigen::Index j = 0; j <= i; ++j) {
      s.cov(i, j) = s.cov(j, i) = cm_inner(elements[i], elements[j]);
    }
  }
  return s;
}

GaussianSummary monomial_summary(const MonomialSpec& spec) {
  const auto f = spec.factors();
  return summarize(f);
}

double gaussian_moment(const GaussianSummary& s) {
  require_degree(s.size());
  return wick_sum(s, full_mask(s.size()));
}

cplx wick_moment(const GaussianSummary& s, const ComplexParam& param) {
  const double w = gaussian_moment(s);
  cplx scale = 1.0;
  const cplx r = param.inv_sqrt();
  for (std::size_t i = 0; i < s.size(); ++i) scale *= r;
  return scale * w;
}

cplx recurrence_moment(const GaussianSummary& s, const ComplexParam& param) {
  require_degree(s.size());
  RecurrenceTable table(s, param);
  return table(full_mask(s.size()));
}

cplx feynman_monomial(const MonomialSpec& spec, double q) {
  const auto p = ComplexParam::feynman(q);
  require_degree(spec.degree());
  return recurrence_moment(monomial_summary(spec), p);
}

cplx analytic_fsi_monomial(const MonomialSpec& spec, cplx lambda) {
  const auto p = ComplexParam::lambda(lambda);
  require_degree(spec.degree());
  return recurrence_moment(monomial_summary(spec), p);
}

cplx analytic_fsi(const FunctionalSpec& f, const SuppElement& k, const ComplexParam& param) {
  std::vector<CMElement> forms;
  for (const auto& u : linear_forms(f)) forms.push_back(odot(u, k));
  if (std::holds_alternative<MonomialSpec>(f)) {
    require_degree(forms.size());
    return recurrence_moment(summarize(forms), param);
  }
  // One Gaussian form X ~ N(mu, sigma^2): E[exp(c r X)] = exp(c r mu + c^2 r^2 sigma^2 / 2)
  // with r = lambda^{-1/2}, continued analytically in lambda.
  const double mu = inner_with_a(forms[0]);
  const double var = cm_inner(forms[0], forms[0]);
  const cplx r = param.inv_sqrt(), r2 = param.inv();
  auto char_fn = [&](cplx c) { return std::exp(c * r * mu + 0.5 * c * c * r2 * var); };
  if (const auto* e = std::get_if<ExpLinear>(&f)) return char_fn(e->c);
  const cplx i(0.0, 1.0);
  return 0.5 * (char_fn(i) + char_fn(-i));
}

cplx first_variation(const FunctionalSpec& f, const SuppElement& k1, const SuppElement& k2,
                     std::span<const double> x_path, const TimeGrid& grid, const CMElement& w) {
  const auto us = linear_forms(f);
  std::vector<double> forms, direction;
  for (const auto& u : us) {
    forms.push_back(pwz_integral(odot(u, k1), x_path, grid));
    direction.push_back(cm_inner(odot(u, k2), w));
  }
  return directional_derivative(f, forms, direction);
}

std::vector<VariationTerm> first_variation_terms(const MonomialSpec& f, const SuppElement& k1,
                                                 const SuppElement& k2, const CMElement& w) {
  const auto us = f.factors();
  std::vector<VariationTerm> terms;
  for (std::size_t l = 0; l < us.size(); ++l) {
    VariationTerm t{cm_inner(odot(us[l], k2), w), {}};
    for (std::size_t j = 0; j < us.size(); ++j)
      if (j != l) t.factors.push_back(odot(us[j], k1));
    terms.push_back(std::move(t));
  }
  return terms;
}

CSResidual cameron_storvick_residual(const MonomialSpec& f, const CMElement& theta, const SuppElement& k1,
                                     const SuppElement& k2, double q, ClosedFormEvaluator evaluator) {
  const auto p = ComplexParam::feynman(q);
  const std::size_t m = f.degree();
  require_degree(m + 1);

  const auto us = f.factors();
  const CMElement theta_k1 = odot(theta, k1);
  std::vector<CMElement> elems{odot(theta, k2)};
  for (const auto& u : us) elems.push_back(odot(u, k1));

  CSResidual out;
  out.summary = summarize(elems);
  // Index 0 is theta odot k2; F(Z_k1) uses indices 1..m.
  const std::uint32_t f_mask = full_mask(m + 1) & ~1u;

  out.lhs = 0.0;
  for (std::size_t l = 0; l < m; ++l) {
    const double c = cm_inner(odot(us[l], k2), theta_k1);
    out.variation_coefficients.push_back(c);
    out.lhs += c * moment_on(out.summary, f_mask & ~(1u << (l + 1)), p, evaluator);
  }
  const cplx e_f = moment_on(out.summary, f_mask, p, evaluator);
  const cplx e_prod = moment_on(out.summary, full_mask(m + 1), p, evaluator);
  const double mean0 = out.summary.mean(0);

  out.rhs = p.value() * e_prod - p.sqrt() * mean0 * e_f;
  out.residual = out.lhs - out.rhs;
  out.corollary_residual = e_prod - (p.inv() * out.lhs + p.inv_sqrt() * mean0 * e_f);
  return out;
}

}  // namespace gpath
