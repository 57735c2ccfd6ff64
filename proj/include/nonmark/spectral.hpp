#pragma once

#include <complex>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "nonmark/quadrature.hpp"

namespace nonmark::spectral {

using Complex = std::complex<double>;

/// J(w) = D w, memoryless friction gamma(t) = D delta(t).
struct Ohmic {
  double coupling = 0.0;
};

/// J(w) = D^2 Gamma w / ((w^2 - Omega^2)^2 + Gamma^2 w^2): a bath mode of
/// frequency `peak` damped at rate `width`, coupled with strength `coupling`.
struct Peaked {
  double coupling = 0.0;
  double width = 0.0;
  double peak = 0.0;

  /// 2 Omega^2 > Gamma^2, the regime in which the residue evaluation of Im gamma
  /// has a complex-conjugate pole pair. The closed form holds either way.
  bool satisfies_root_condition() const { return 2.0 * peak * peak - width * width > 0.0; }
};

/// Fourier-transformed memory kernel.
struct KernelValue {
  double re = 0.0;
  double im = 0.0;
  Complex value() const { return {re, im}; }
};

/// Sampled J(w) on w >= 0, interpolated by a monotone piecewise cubic that is
/// pinned to zero (with zero slope) at the last sample.
class Tabulated {
 public:
  /// Throws std::invalid_argument unless the samples are strictly increasing in
  /// w starting at w = 0, J >= 0, J(0) = 0 and the last sample is negligible.
  Tabulated(std::vector<double> freq, std::vector<double> value);

  /// Reads "w J" pairs, one per line; '#' starts a comment.
  static Tabulated from_file(const std::filesystem::path& path);
  static Tabulated sample(const std::function<double(double)>& j, std::span<const double> grid);

  double operator()(double w) const;  // 0 outside the sampled range, w >= 0
  double derivative(double w) const;  // of the interpolant; 0 outside the range
  double slope_at_zero() const;
  double max_frequency() const { return freq_.back(); }
  double peak_frequency() const { return peak_; }
  std::span<const double> frequencies() const { return freq_; }

  /// gamma_tilde of the interpolant; the principal value is integrated piece by piece.
  KernelValue kernel(double w) const;
  Complex kernel_derivative(double w) const;

 private:
  struct Interp;
  std::vector<double> freq_;
  std::shared_ptr<const Interp> interp_;
  double peak_ = 0.0;
};

using SpectralDensity = std::variant<Ohmic, Peaked, Tabulated>;

/// Throws std::invalid_argument naming the offending parameter. Zero coupling
/// is accepted and denotes the decoupled oscillator.
void validate(const SpectralDensity& sd);

/// True when the system does not couple to the bath at all.
bool decoupled(const SpectralDensity& sd);

/// J(w), extended to w < 0 as an odd function.
double j_omega(const SpectralDensity& sd, double w);

/// Re = J(w)/w (limit J'(0) at w = 0); Im from the closed form, or for
/// tabulated data from the principal value
///   Im(w) = -(2w/pi) PV int_0^inf (J(v)/v) / (v^2 - w^2) dv.
KernelValue gamma_tilde(const SpectralDensity& sd, double w);

/// d gamma_tilde / dw: closed form for Ohmic and Peaked, the principal value of
/// the differentiated ratio J/w for tabulated data.
Complex gamma_tilde_prime(const SpectralDensity& sd, double w);

/// lim_{w -> inf} Re gamma_tilde(w): the delta-function part of gamma(t).
double instantaneous_friction(const SpectralDensity& sd);

/// Frequencies where J has structure, used to seed quadrature grids.
std::vector<double> features(const SpectralDensity& sd);

}  // namespace nonmark::spectral
