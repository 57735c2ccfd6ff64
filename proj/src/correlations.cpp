#include "nonmark/correlations.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <shared_mutex>
#include <tuple>
#include <variant>

namespace nonmark {

namespace {

using CacheKey = std::tuple<int, double, double, double, double, double, double, double, bool, double,
                            double, double, int>;

// Tabulated densities have no cheap value identity and are never memoised.
std::optional<CacheKey> cache_key(const Model& m) {
  const auto& sd = m.kernel().density();
  const ModelParams& p = m.params();
  const quad::QuadratureConfig& q = m.quadrature();
  double a = 0.0, b = 0.0, c = 0.0;
  int kind = 0;
  if (const auto* o = std::get_if<spectral::Ohmic>(&sd)) {
    a = o->coupling;
  } else if (const auto* k = std::get_if<spectral::Peaked>(&sd)) {
    kind = 1;
    a = k->coupling;
    b = k->width;
    c = k->peak;
  } else {
    return std::nullopt;
  }
  return CacheKey{kind, a, b, c, p.omega0, p.beta, p.hbar, p.cutoff, m.kernel().corrupted(),
                  q.half_width, q.rel_tol, q.abs_tol, q.max_subdivisions};
}

std::shared_mutex cache_mutex;
std::map<CacheKey, CovarianceMatrix> cache;

// x coth(x), smooth through x = 0.
double x_coth_x(double x) {
  const double a = std::abs(x);
  return a < 1e-4 ? 1.0 + a * a / 3.0 : a / std::tanh(a);
}

// y / (1 - exp(-y)), smooth through y = 0.
double bose_weight(double y) {
  if (std::abs(y) < 1e-4) return 1.0 + y / 2.0 + y * y / 12.0 - y * y * y * y / 720.0;
  return -y / std::expm1(-y);
}

// Im chi / w = Re gamma |chi|^2 avoids dividing by w.
double im_chi_over_w(const Model& m, double w) {
  return m.kernel().value(w).real() * std::norm(chi_qq(m, w));
}

std::vector<double> positive_breakpoints(const Model& m) {
  std::vector<double> out;
  for (double b : m.breakpoints()) {
    if (b > 0.0) out.push_back(b);
  }
  return out;
}

CovarianceMatrix compute(const Model& m) {
  const ModelParams& p = m.params();
  const double scale = 2.0 / (std::numbers::pi * p.beta);
  const auto bps = positive_breakpoints(m);

  // weight(w) * (1, w^2) * Im chi / w with weight = 1 classically and
  // x coth x (x = beta hbar w / 2) otherwise; hbar w coth(x) = (2/beta) x coth x.
  auto moments = [&](double upper) {
    const double half = 0.5 * p.beta * p.hbar;
    const quad::Integrand qq{[&](double w) {
                               const double wt = p.classical() ? 1.0 : x_coth_x(half * w);
                               return Complex(wt * im_chi_over_w(m, w), 0.0);
                             },
                             quad::Parity::none, bps};
    const quad::Integrand pp{[&](double w) {
                               const double wt = p.classical() ? 1.0 : x_coth_x(half * w);
                               return Complex(wt * w * w * im_chi_over_w(m, w), 0.0);
                             },
                             quad::Parity::none, bps};
    return std::pair{scale * quad::integrate(qq, 0.0, upper, m.quadrature()).value.real(),
                     scale * quad::integrate(pp, 0.0, upper, m.quadrature()).value.real()};
  };

  CovarianceMatrix c;
  if (p.classical()) {
    std::tie(c.qq, c.pp) = moments(std::numeric_limits<double>::infinity());
    return c;
  }
  std::tie(c.qq, c.pp) = moments(p.cutoff);
  const double pp_doubled = moments(2.0 * p.cutoff).second;
  c.cutoff_change = std::abs(pp_doubled - c.pp) / c.pp;
  c.cutoff_sensitive = c.cutoff_change > 0.01;
  return c;
}

}  // namespace

CovarianceMatrix covariance0(const Model& m) {
  const auto key = cache_key(m);
  if (!key) return compute(m);
  {
    std::shared_lock lock(cache_mutex);
    if (auto it = cache.find(*key); it != cache.end()) return it->second;
  }
  const CovarianceMatrix c = compute(m);
  std::unique_lock lock(cache_mutex);
  cache.emplace(*key, c);
  return c;
}

void clear_covariance_cache() {
  std::unique_lock lock(cache_mutex);
  cache.clear();
}

ComplexMatrix2 exact_spectrum(const Model& m, double w) {
  const ModelParams& p = m.params();
  // 2 hbar Im chi / (1 - e^{-y}) = (2/beta) (y / (1 - e^{-y})) Im chi / w, y = beta hbar w.
  const double weight = p.classical() ? 1.0 : bose_weight(p.beta * p.hbar * w);
  const double cqq = (2.0 / p.beta) * weight * im_chi_over_w(m, w);
  const Complex iw(0.0, w);
  return ComplexMatrix2::from(cqq, iw * cqq, -iw * cqq, w * w * cqq);
}

ComplexMatrix2 rt_spectrum(const Model& m, double w, const CovarianceMatrix& c0) {
  const Complex c = chi_qq(m, w);
  const double im = c.imag();
  return ComplexMatrix2::from(2.0 * w * c0.qq * im, c0.pp * c - c0.qq * (w * w * std::conj(c) + 1.0),
                              c0.pp * std::conj(c) - c0.qq * (w * w * c + 1.0), 2.0 * w * c0.pp * im);
}

ComplexMatrix2 rt_spectrum_general(const Model& m, double w, const CovarianceMatrix& c0) {
  const ComplexMatrix2 chi = chi_matrix(m, w);
  const ComplexMatrix2 minv = to_complex(chi_plus_inverse());
  const ComplexMatrix2 cov = to_complex(c0.matrix());
  return chi * minv * cov - cov * minv * adjoint(chi);
}

}  // namespace nonmark
