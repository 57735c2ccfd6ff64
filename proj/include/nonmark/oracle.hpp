#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "nonmark/matrix2.hpp"

namespace nonmark::oracle {

/// Classical Ohmic Langevin ensemble prepared by a kick (a_q, a_p) at t = 0.
struct LangevinConfig {
  double coupling = 0.2;  // D
  double omega0 = 1.0;
  double beta = 1.0;
  double dt = 0.005;
  double t_max = 20.0;
  std::size_t n_traj = 100000;
  std::uint64_t seed = 1;
  double a_q = 1.0;
  double a_p = 1.0;
  unsigned threads = 0;  // 0: hardware concurrency; results do not depend on it

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct LangevinSeries {
  std::vector<double> t;
  std::vector<double> q_mean;
  std::vector<double> p_mean;
  std::vector<double> q_stderr;
  std::vector<double> p_stderr;
};

/// Ensemble means at the requested times (each rounded to the nearest step).
/// Initial q, p are drawn from equilibrium and shifted by the kick; memoryless
/// friction adds D a_p to the momentum shift. Throws UnstableStep if any
/// trajectory leaves |x| < 1e6.
LangevinSeries langevin_means(const LangevinConfig& cfg, std::span<const double> times);

/// Impulses int_t^{t+dt} xi ds of the discretised noise, variance 2 D dt / beta.
std::vector<double> noise_impulses(double coupling, double beta, double dt, std::size_t count, std::uint64_t seed);

/// System oscillator coupled with strength D to a bath mode of frequency Omega
/// that is damped at rate Gamma.
struct Embedding {
  double coupling = 0.05;
  double width = 0.05;
  double peak = 1.0;
  double omega0 = 1.0;

  void validate() const;
};

/// chi_qq(t) from the kicked mean-value ODE, integrated by an adaptive
/// Dormand-Prince scheme at tolerance 1e-10. Throws NonConvergence on step failure.
double embedding_response(const Embedding& e, double t);
std::vector<double> embedding_response(const Embedding& e, std::span<const double> times);

/// Full 2x2 response from two kicks; chi(0) is the right limit.
std::vector<RealMatrix2> embedding_chi(const Embedding& e, std::span<const double> times);

/// int_0^inf chi_qq(t) e^{iwt} dt from the resolvent of the embedding generator.
std::complex<double> embedding_transform(const Embedding& e, double w);

/// int_0^inf chi_qq(t) dt, accumulated along the ODE until the state has decayed.
double embedding_static_integral(const Embedding& e);

}  // namespace nonmark::oracle
