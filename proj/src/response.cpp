#include "nonmark/response.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <variant>

#include "nonmark/errors.hpp"

namespace nonmark {

namespace {

constexpr Complex I{0.0, 1.0};

// Roots of the monic polynomial sum_k c[k] z^k (c.back() == 1) by Durand-Kerner.
std::vector<Complex> monic_roots(const std::vector<Complex>& c) {
  const std::size_t n = c.size() - 1;
  auto poly = [&c](Complex z) {
    Complex acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
    return acc;
  };
  double radius = 1.0;
  for (std::size_t k = 0; k < n; ++k) radius = std::max(radius, 1.0 + std::abs(c[k]));
  std::vector<Complex> z(n);
  const Complex seed(0.4, 0.9);
  for (std::size_t k = 0; k < n; ++k) z[k] = 0.5 * radius * std::pow(seed, static_cast<double>(k));
  for (int iter = 0; iter < 500; ++iter) {
    double change = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      Complex denom = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != k) denom *= z[k] - z[j];
      }
      const Complex step = poly(z[k]) / denom;
      z[k] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15 * radius) break;
  }
  return z;
}

std::vector<Complex> closed_form_poles(const ModelParams& p, const spectral::SpectralDensity& sd) {
  const double w0 = p.omega0;
  if (const auto* o = std::get_if<spectral::Ohmic>(&sd)) {
    // w^2 + i D w - w0^2 = 0
    return monic_roots({Complex(-w0 * w0), I * o->coupling, 1.0});
  }
  if (const auto* k = std::get_if<spectral::Peaked>(&sd)) {
    // (a - w^2)(Omega^2 - w^2 - i Gamma w) - D^2 with a = w0^2 + D^2/Omega^2
    const double o2 = k->peak * k->peak;
    const double d2 = k->coupling * k->coupling;
    const double a = w0 * w0 + d2 / o2;
    return monic_roots({Complex(a * o2 - d2), -I * a * k->width, Complex(-(a + o2)), I * k->width, 1.0});
  }
  return {};
}

// Local maxima of |chi_qq| on a coarse grid, with the half-maximum width.
std::vector<Complex> scanned_poles(const Model& m) {
  double top = 4.0 * m.params().omega0;
  for (double f : spectral::features(m.kernel().density())) top = std::max(top, 4.0 * f);
  constexpr int n = 400;
  std::vector<double> mag(n + 1);
  const double h = top / n;
  for (int i = 0; i <= n; ++i) mag[i] = std::abs(chi_qq(m, i * h));
  std::vector<Complex> out;
  for (int i = 1; i < n; ++i) {
    if (mag[i] >= mag[i - 1] && mag[i] > mag[i + 1]) {
      int r = i;
      while (r < n && mag[r] > 0.5 * mag[i]) ++r;
      out.emplace_back(i * h, -std::max(h, (r - i) * h));
    }
  }
  return out;
}

std::vector<double> pole_breakpoints(const std::vector<Complex>& poles, double half_width) {
  static constexpr std::array<double, 7> offsets{0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> out;
  for (Complex z : poles) {
    const double centre = std::abs(z.real());
    const double width = std::max(std::abs(z.imag()), 1e-9);
    for (double k : offsets) {
      for (double x : {centre + k * width, centre - k * width}) {
        if (std::abs(x) < half_width) {
          out.push_back(x);
          out.push_back(-x);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

RealMatrix2 free_oscillator(double w0, double t) {
  const double s = std::sin(w0 * t);
  const double c = std::cos(w0 * t);
  return RealMatrix2::from(s / w0, -c, c, w0 * s);
}

}  // namespace

void ModelParams::validate() const {
  if (!(std::isfinite(omega0) && omega0 > 0.0)) throw std::invalid_argument("omega0 must be > 0");
  if (!(std::isfinite(beta) && beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (!(std::isfinite(hbar) && hbar >= 0.0)) throw std::invalid_argument("hbar must be >= 0");
  if (!(std::isfinite(cutoff) && cutoff > omega0)) throw std::invalid_argument("cutoff must exceed omega0");
}

std::vector<std::string> ModelParams::warnings() const {
  std::vector<std::string> out;
  if (cutoff <= 10.0 * omega0) out.emplace_back("cutoff is below 10 omega0; covariances may be biased");
  return out;
}

MemoryKernel::MemoryKernel(spectral::SpectralDensity sd) : sd_(std::move(sd)) {
  spectral::validate(sd_);
}

Complex MemoryKernel::value(double w) const {
  const Complex g = spectral::gamma_tilde(sd_, w).value();
  return flip_ ? std::conj(g) : g;
}

Complex MemoryKernel::derivative(double w) const {
  const Complex g = spectral::gamma_tilde_prime(sd_, w);
  return flip_ ? std::conj(g) : g;
}

MemoryKernel MemoryKernel::with_flipped_imaginary() const {
  MemoryKernel k = *this;
  k.flip_ = !flip_;
  return k;
}

Model::Model(ModelParams params, spectral::SpectralDensity sd, quad::QuadratureConfig cfg)
    : Model(params, MemoryKernel(std::move(sd)), cfg) {}

Model::Model(ModelParams params, MemoryKernel kernel, quad::QuadratureConfig cfg)
    : params_(params), kernel_(std::move(kernel)), cfg_(cfg) {
  params_.validate();
  cfg_.validate();
  poles_ = closed_form_poles(params_, kernel_.density());
  if (poles_.empty() && !kernel_.decoupled()) poles_ = scanned_poles(*this);
  if (kernel_.decoupled()) poles_ = {Complex(params_.omega0, 0.0)};
  breakpoints_ = pole_breakpoints(poles_, cfg_.half_width);
}

Complex chi_qq(const Model& m, double w) {
  const double w0 = m.params().omega0;
  const Complex den = w0 * w0 - w * w - I * w * m.kernel().value(w);
  if (std::abs(den) < 1e-14 * w0 * w0) {
    throw DivisionNearZero("chi_qq: denominator vanishes at w = " + std::to_string(w));
  }
  return 1.0 / den;
}

ComplexMatrix2 chi_matrix(const Model& m, double w) {
  const Complex c = chi_qq(m, w);
  return ComplexMatrix2::from(c, I * w * c, -I * w * c, 1.0 + w * w * c);
}

ComplexMatrix2 chi_prime_matrix(const Model& m, double w) {
  const Complex c = chi_qq(m, w);
  const Complex d = c * c * (2.0 * w + I * m.kernel().value(w) + I * w * m.kernel().derivative(w));
  const Complex cross = c + w * d;
  return ComplexMatrix2::from(d, I * cross, -I * cross, 2.0 * w * c + w * w * d);
}

ComplexMatrix2 divisibility_residual(const Model& m, double w) {
  const ComplexMatrix2 chi = chi_matrix(m, w);
  const ComplexMatrix2 lhs = chi_prime_matrix(m, w) * Complex(0.0, -1.0);
  return lhs - chi * to_complex(chi_plus_inverse()) * chi;
}

RealMatrix2 chi_time(const Model& m, double t) {
  if (t < 0.0) throw std::invalid_argument("chi_time: requires t >= 0");
  const double w0 = m.params().omega0;
  if (m.kernel().decoupled()) return free_oscillator(w0, t);

  // Im of chi_qp and chi_pp decays like 1/w, the signature of their jumps at
  // t = 0. Subtracting j w / (w^2 + k^2), whose transform is j exp(-k t), leaves
  // integrands that decay fast enough for the sine transform.
  const double jump_pp = m.kernel().instantaneous_friction();
  if (t == 0.0) return RealMatrix2::from(0.0, -1.0, 1.0, jump_pp);
  const double k = w0;
  const quad::RealVectorEval eval = [&m, jump_pp, k](double w, std::span<double> out) {
    const Complex c = chi_qq(m, w);
    const double lorentz = w / (w * w + k * k);
    out[0] = c.imag();
    out[1] = w * c.real() + lorentz;          // chi_qp, jump -1
    out[2] = w * w * c.imag() - jump_pp * lorentz;  // chi_pp, jump D
  };
  const std::vector<double> s = quad::sine_transform(eval, 3, t, m.breakpoints(), m.quadrature());
  const double decay = std::exp(-k * t);
  const double qp = s[1] - decay;
  return RealMatrix2::from(s[0], qp, -qp, s[2] + jump_pp * decay);
}

Means propagate_means(const Model& m, double a_q, double a_p, double t) {
  const RealMatrix2 chi = chi_time(m, t);
  return {chi.qq() * a_q + chi.qp() * a_p, chi.pq() * a_q + chi.pp() * a_p};
}

std::vector<Means> propagate_means(const Model& m, double a_q, double a_p, std::span<const double> times) {
  std::vector<Means> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(propagate_means(m, a_q, a_p, t));
  return out;
}

double static_sum_rule(const Model& m) {
  // Im chi / w = Re gamma |chi|^2, which has no removable singularity at w = 0.
  quad::Integrand f;
  f.eval = [&m](double w) { return Complex(m.kernel().value(w).real() * std::norm(chi_qq(m, w)), 0.0); };
  for (double b : m.breakpoints()) {
    if (b > 0.0) f.breakpoints.push_back(b);
  }
  const double inf = std::numeric_limits<double>::infinity();
  return (2.0 / std::numbers::pi) * quad::integrate(f, 0.0, inf, m.quadrature()).value.real();
}

Complex chi_qq(const ModelParams& p, const spectral::SpectralDensity& sd, double w) {
  return chi_qq(Model(p, sd), w);
}
ComplexMatrix2 chi_matrix(const ModelParams& p, const spectral::SpectralDensity& sd, double w) {
  return chi_matrix(Model(p, sd), w);
}
ComplexMatrix2 chi_prime_matrix(const ModelParams& p, const spectral::SpectralDensity& sd, double w) {
  return chi_prime_matrix(Model(p, sd), w);
}
ComplexMatrix2 divisibility_residual(const ModelParams& p, const spectral::SpectralDensity& sd, double w) {
  return divisibility_residual(Model(p, sd), w);
}
RealMatrix2 chi_time(const ModelParams& p, const spectral::SpectralDensity& sd, double t) {
  return chi_time(Model(p, sd), t);
}
Means propagate_means(const ModelParams& p, const spectral::SpectralDensity& sd, double a_q, double a_p,
                      double t) {
  return propagate_means(Model(p, sd), a_q, a_p, t);
}

}  // namespace nonmark
