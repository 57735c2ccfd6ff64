#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "nonmark/matrix2.hpp"
#include "nonmark/quadrature.hpp"
#include "nonmark/spectral.hpp"

namespace nonmark {

struct ModelParams {
  double omega0 = 1.0;
  double beta = 1.0;
  double hbar = 1.0;  // 0 selects the classical branch
  double cutoff = 1000.0;  // UV cutoff for the divergent covariance integrals

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Non-fatal concerns, e.g. a cutoff too close to omega0.
  std::vector<std::string> warnings() const;
  bool classical() const { return hbar == 0.0; }
};

/// gamma_tilde(w) and its derivative for one spectral density. The only
/// source of friction the response functions see.
class MemoryKernel {
 public:
  explicit MemoryKernel(spectral::SpectralDensity sd);

  Complex value(double w) const;
  Complex derivative(double w) const;
  double instantaneous_friction() const { return spectral::instantaneous_friction(sd_); }
  bool decoupled() const { return spectral::decoupled(sd_); }
  const spectral::SpectralDensity& density() const { return sd_; }

  /// Fault-injection hook: a kernel whose imaginary part has the wrong sign.
  MemoryKernel with_flipped_imaginary() const;
  bool corrupted() const { return flip_; }

 private:
  spectral::SpectralDensity sd_;
  bool flip_ = false;
};

/// Caldeira-Leggett oscillator: parameters, kernel, quadrature controls and the
/// resonance breakpoints derived from them.
class Model {
 public:
  Model(ModelParams params, spectral::SpectralDensity sd, quad::QuadratureConfig cfg = {});
  Model(ModelParams params, MemoryKernel kernel, quad::QuadratureConfig cfg = {});

  const ModelParams& params() const { return params_; }
  const MemoryKernel& kernel() const { return kernel_; }
  const quad::QuadratureConfig& quadrature() const { return cfg_; }
  /// Abscissae clustered around the (positive and negative) resonances of chi.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  /// Complex poles of chi_qq in the lower half plane, where known in closed form.
  const std::vector<Complex>& poles() const { return poles_; }

 private:
  ModelParams params_;
  MemoryKernel kernel_;
  quad::QuadratureConfig cfg_;
  std::vector<Complex> poles_;
  std::vector<double> breakpoints_;
};

/// 1 / (omega0^2 - w^2 - i w gamma(w)). Throws DivisionNearZero on an undamped resonance.
Complex chi_qq(const Model& m, double w);
ComplexMatrix2 chi_matrix(const Model& m, double w);
ComplexMatrix2 chi_prime_matrix(const Model& m, double w);

/// -i chi'(w) - chi(w) chi_plus^-1 chi(w); vanishes identically for divisible dynamics.
ComplexMatrix2 divisibility_residual(const Model& m, double w);

/// Time-domain response for t >= 0. At t = 0 the right limit chi(0+) is returned.
RealMatrix2 chi_time(const Model& m, double t);

struct Means {
  double q = 0.0;
  double p = 0.0;
};

/// <(q, p)(t)> = chi(t) (a_q, a_p) after a kick with strengths (a_q, a_p) at t = 0.
Means propagate_means(const Model& m, double a_q, double a_p, double t);
std::vector<Means> propagate_means(const Model& m, double a_q, double a_p, std::span<const double> times);

/// (2/pi) int_0^inf Im chi_qq(w) / w dw; equals chi_qq(0) = 1/omega0^2.
double static_sum_rule(const Model& m);

Complex chi_qq(const ModelParams& p, const spectral::SpectralDensity& sd, double w);
ComplexMatrix2 chi_matrix(const ModelParams& p, const spectral::SpectralDensity& sd, double w);
ComplexMatrix2 chi_prime_matrix(const ModelParams& p, const spectral::SpectralDensity& sd, double w);
ComplexMatrix2 divisibility_residual(const ModelParams& p, const spectral::SpectralDensity& sd, double w);
RealMatrix2 chi_time(const ModelParams& p, const spectral::SpectralDensity& sd, double t);
Means propagate_means(const ModelParams& p, const spectral::SpectralDensity& sd, double a_q, double a_p, double t);

}  // namespace nonmark
