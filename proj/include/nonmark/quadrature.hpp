#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nonmark::quad {

using Complex = std::complex<double>;

/// Symmetry of an integrand under x -> -x. `hermitian` means f(-x) = conj(f(x)).
enum class Parity { none, even, odd, hermitian };

struct QuadratureConfig {
  double half_width = 200.0;  // the real line is truncated to [-W, W]
  double rel_tol = 1e-9;
  double abs_tol = 1e-13;
  // Largest accepted uncertainty of the power-law tail model beyond +-W,
  // relative to the result.
  double tail_tol = 1e-6;
  // L2 moments retry with W widened fourfold this many times before giving up
  // on an unresolved tail.
  int tail_widenings = 2;
  double pv_radius = 1e-2;  // initial symmetric exclusion around a PV pole
  int max_subdivisions = 50000;
  int oscillatory_panels_per_period = 2;
  // Initial panelling: uniform panels of `core_panel_width` on |x| <= core_extent,
  // geometrically growing panels beyond.
  double core_extent = 10.0;
  double core_panel_width = 0.05;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// A complex integrand plus optional symmetry hint and abscissae where it has
/// structure (resonances, kinks). Breakpoints seed the initial panel grid.
struct Integrand {
  std::function<Complex(double)> eval;
  Parity parity = Parity::none;
  std::vector<double> breakpoints;
};

struct Estimate {
  Complex value{};
  double error = 0.0;
  int panels = 0;
};

struct LineEstimate {
  Complex value{};  // includes the modelled tail beyond +-W
  double error = 0.0;
  double tail = 0.0;  // magnitude of the tail contribution
  int panels = 0;
  bool parity_used = false;
};

/// Adaptive Gauss-Kronrod (G10/K21) quadrature over [a, b]; b may be +infinity,
/// in which case [a + W, inf) is mapped onto a finite interval.
Estimate integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg);

/// Integral over the real line, truncated at +-W with a power-law tail model
/// fitted on the outer decade. Exploits a verified parity hint.
LineEstimate integrate_line(const Integrand& f, const QuadratureConfig& cfg);

/// Cauchy principal value of f over [a, b], where f has a simple pole at `pole`.
/// Symmetric exclusion with radii eps, eps/2, eps/4 and Richardson extrapolation.
Estimate principal_value(const Integrand& f, double pole, double a, double b,
                         const QuadratureConfig& cfg);

/// (2/pi) * int_0^inf Re f(w) sin(w t) dw with panels locked to the period 2pi/t.
double sine_transform(const Integrand& f, double t, const QuadratureConfig& cfg);

/// Several sine transforms of real integrands sharing one evaluator.
/// `eval(w, out)` fills out[k] = F_k(w).
using RealVectorEval = std::function<void(double, std::span<double>)>;
std::vector<double> sine_transform(const RealVectorEval& eval, std::size_t n, double t,
                                   std::span<const double> breakpoints,
                                   const QuadratureConfig& cfg);

/// <f, g> = int f(w) conj(g(w)) dw over the real line.
Complex inner_product_l2(const Integrand& f, const Integrand& g, const QuadratureConfig& cfg);
double norm_l2(const Integrand& f, const QuadratureConfig& cfg);

/// Moments <f_k, g_k>, ||f_k||^2, ||g_k||^2 for k pairs evaluated together.
struct PairMoments {
  Complex inner{};
  double norm2_f = 0.0;
  double norm2_g = 0.0;
  double tail = 0.0;  // largest relative tail among the three integrals
  int panels = 0;
  bool parity_used = false;
};
using PairEval = std::function<void(double, std::span<Complex> f, std::span<Complex> g)>;
std::vector<PairMoments> l2_pair_moments(const PairEval& eval, std::size_t pairs, Parity parity,
                                         std::span<const double> breakpoints,
                                         const QuadratureConfig& cfg);

/// Spot-checks the parity hint at three fixed pseudo-random abscissae in (0, W).
bool parity_holds(const std::function<Complex(double)>& f, Parity parity, double half_width);

}  // namespace nonmark::quad
