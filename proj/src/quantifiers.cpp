#include "nonmark/quantifiers.hpp"

#include <algorithm>
#include <cmath>

#include "nonmark/errors.hpp"

namespace nonmark {

namespace {

constexpr double kMinNorm = 1e-14;
constexpr double kClampWindow = 1e-12;

double clamped_distance(Complex inner, double norm2_f, double norm2_g) {
  if (std::sqrt(norm2_f) < kMinNorm || std::sqrt(norm2_g) < kMinNorm) {
    throw ZeroNorm("distance: an argument has vanishing norm");
  }
  const double overlap = std::norm(inner) / (norm2_f * norm2_g);
  double d2 = 1.0 - overlap;
  if (d2 < 0.0 && d2 > -kClampWindow) d2 = 0.0;
  if (d2 > 1.0 && d2 < 1.0 + kClampWindow) d2 = 1.0;
  return std::sqrt(std::clamp(d2, 0.0, 1.0));
}

}  // namespace

double distance(const quad::PairMoments& m) { return clamped_distance(m.inner, m.norm2_f, m.norm2_g); }

double distance(const quad::Integrand& f, const quad::Integrand& g, const quad::QuadratureConfig& cfg) {
  const double nf = quad::norm_l2(f, cfg);
  const double ng = quad::norm_l2(g, cfg);
  if (nf < kMinNorm || ng < kMinNorm) throw ZeroNorm("distance: an argument has vanishing norm");
  return clamped_distance(quad::inner_product_l2(f, g, cfg), nf * nf, ng * ng);
}

MatrixDistance matrix_distance(const MatrixPairEval& eval, quad::Parity parity,
                               std::span<const double> breakpoints, const quad::QuadratureConfig& cfg) {
  const quad::PairEval pairs = [&eval](double w, std::span<Complex> f, std::span<Complex> g) {
    ComplexMatrix2 a, b;
    eval(w, a, b);
    std::copy(a.m.begin(), a.m.end(), f.begin());
    std::copy(b.m.begin(), b.m.end(), g.begin());
  };
  const auto moments = quad::l2_pair_moments(pairs, 4, parity, breakpoints, cfg);
  MatrixDistance out;
  for (int k = 0; k < 4; ++k) {
    out.value.m[k] = distance(moments[k]);
    out.diagnostics.m[k] = {moments[k].tail, moments[k].panels, moments[k].parity_used};
  }
  return out;
}

MatrixDistance n1(const Model& m) {
  if (m.kernel().decoupled()) return {};
  const ComplexMatrix2 minv = to_complex(chi_plus_inverse());
  const MatrixPairEval eval = [&m, &minv](double w, ComplexMatrix2& f, ComplexMatrix2& g) {
    const ComplexMatrix2 chi = chi_matrix(m, w);
    f = chi_prime_matrix(m, w) * Complex(0.0, -1.0);
    g = chi * minv * chi;
  };
  return matrix_distance(eval, quad::Parity::hermitian, m.breakpoints(), m.quadrature());
}

MatrixDistance n2(const Model& m) {
  if (m.kernel().decoupled()) return {};
  const CovarianceMatrix c0 = covariance0(m);
  const MatrixPairEval eval = [&m, &c0](double w, ComplexMatrix2& f, ComplexMatrix2& g) {
    f = exact_spectrum(m, w);
    g = rt_spectrum(m, w, c0);
  };
  // Detailed balance breaks the w -> -w symmetry of the quantum spectrum.
  const quad::Parity parity = m.params().classical() ? quad::Parity::hermitian : quad::Parity::none;
  return matrix_distance(eval, parity, m.breakpoints(), m.quadrature());
}

QuantifierReport quantify(const Model& m, bool want_n1, bool want_n2) {
  QuantifierReport r;
  if (want_n1) {
    const MatrixDistance d = n1(m);
    r.n1 = d.value;
    r.n1_diagnostics = d.diagnostics;
    r.has_n1 = true;
  }
  if (want_n2) {
    const MatrixDistance d = n2(m);
    r.n2 = d.value;
    r.n2_diagnostics = d.diagnostics;
    if (!m.kernel().decoupled()) r.covariance = covariance0(m);
    r.has_n2 = true;
  }
  return r;
}

}  // namespace nonmark
