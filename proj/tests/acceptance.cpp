// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nonmark/correlations.hpp"
#include "nonmark/errors.hpp"
#include "nonmark/oracle.hpp"
#include "nonmark/quantifiers.hpp"
#include "nonmark/response.hpp"

using namespace nonmark;
using spectral::Ohmic;
using spectral::Peaked;
using spectral::SpectralDensity;

namespace {

constexpr Complex I{0.0, 1.0};
const Peaked kDefaultPeak{1.0, 0.5, 2.0};

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds
  std::function<Outcome()> check;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Outcome within(double worst, double tol, const std::string& what) {
  return {worst <= tol, what + " " + sci(worst) + " (tolerance " + sci(tol) + ")"};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

Outcome residual_identity() {
  double worst = 0.0;
  for (double d : {0.1, 1.0}) {
    const Model m(ModelParams{}, Ohmic{d});
    for (double w : linspace(-10.0, 10.0, 100)) {
      const Complex den = 1.0 - w * w - I * d * w;
      const Complex s = d / (den * den);
      const ComplexMatrix2 expect = ComplexMatrix2::from(s, I * w * s, -I * w * s, w * w * s);
      const ComplexMatrix2 got = divisibility_residual(m, w);
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(got.m[k] - expect.m[k]));
    }
  }
  return within(worst, 1e-10, "max entry deviation");
}

Outcome sum_rule() {
  double worst = 0.0;
  for (const SpectralDensity& sd : {SpectralDensity{Ohmic{0.1}}, SpectralDensity{Ohmic{1.0}}, SpectralDensity{kDefaultPeak}}) {
    worst = std::max(worst, std::abs(static_sum_rule(Model(ModelParams{}, sd)) - 1.0));
  }
  return within(worst, 1e-6, "max relative deviation");
}

Outcome equipartition() {
  double worst = 0.0;
  ModelParams p;
  p.hbar = 0.0;
  for (double d : {0.1, 0.5}) {
    for (const SpectralDensity& sd : {SpectralDensity{Ohmic{d}}, SpectralDensity{Peaked{d, 0.5, 2.0}}}) {
      clear_covariance_cache();
      const CovarianceMatrix c = covariance0(Model(p, sd));
      worst = std::max({worst, std::abs(c.qq - 1.0), std::abs(c.pp - 1.0)});
    }
  }
  return within(worst, 1e-6, "max relative deviation");
}

// Closed-form Im gamma against -(2w/pi) PV int_0^inf (J(v)/v) / (v^2 - w^2) dv
// integrated directly by the principal-value quadrature.
Outcome peaked_kernel() {
  const SpectralDensity sd = kDefaultPeak;
  const double omega = kDefaultPeak.peak;
  const double gap = 0.05 * kDefaultPeak.width;
  quad::QuadratureConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-15;
  std::vector<double> points;
  for (double w : linspace(0.1, 6.0, 31)) {
    if (std::abs(w - omega) >= gap) points.push_back(w);
  }
  points.resize(30);
  double worst = 0.0;
  for (double w : points) {
    const quad::Integrand f{[&sd, w](double v) {
                              const double ratio = v == 0.0 ? spectral::gamma_tilde(sd, 0.0).re : spectral::j_omega(sd, v) / v;
                              return Complex(ratio / ((v + w) * (v - w)), 0.0);
                            },
                            quad::Parity::none,
                            {omega}};
    const quad::Estimate pv = quad::principal_value(f, w, 0.0, 1e3, cfg);
    const double numeric = -2.0 * w / std::numbers::pi * pv.value.real();
    const double exact = spectral::gamma_tilde(sd, w).im;
    worst = std::max(worst, std::abs(numeric - exact) / std::abs(exact));
  }
  return within(worst, 1e-5, "max relative deviation");
}

Outcome ohmic_trend() {
  std::vector<double> values;
  for (double d : {0.01, 0.1, 1.0, 10.0}) values.push_back(n1(Model(ModelParams{}, Ohmic{d})).value.qq());
  bool increasing = true;
  for (std::size_t i = 1; i < values.size(); ++i) increasing = increasing && values[i] > values[i - 1];
  std::string text = "n1_qq =";
  for (double v : values) text += " " + sci(v);
  return {values.front() < 0.05 && increasing, text + " (first < 0.05, strictly increasing)"};
}

Outcome width_non_monotone() {
  const int n = 25;
  std::vector<double> values;
  for (int i = 0; i < n; ++i) {
    const double g = 0.01 * std::pow(5.0 / 0.01, static_cast<double>(i) / (n - 1));
    values.push_back(n1(Model(ModelParams{}, Peaked{0.75, g, 1.0})).value.qq());
  }
  const double top = *std::max_element(values.begin(), values.end());
  const bool ok = values.front() <= 0.95 * top && values.back() <= 0.95 * top;
  return {ok, "max " + sci(top) + ", ends " + sci(values.front()) + " and " + sci(values.back()) +
                  " (ends at least 5% below max)"};
}

Outcome classical_rt_failure() {
  ModelParams p;
  p.hbar = 0.0;
  p.beta = 1.0;
  p.cutoff = 1e3;
  const double strong = n2(Model(p, Ohmic{0.5})).value.qp();
  const double weak = n2(Model(p, Ohmic{1e-3})).value.qp();
  return {strong > 0.05 && weak < 0.05,
          "n2_qp = " + sci(strong) + " at D = 0.5, " + sci(weak) + " at D = 1e-3 (threshold 0.05)"};
}

Outcome damped_oscillator() {
  const double d = 0.2;
  const Model m(ModelParams{}, Ohmic{d});
  const double w1 = std::sqrt(1.0 - 0.25 * d * d);
  double worst = 0.0;
  for (double t : linspace(0.0, 20.0, 201)) {
    const double exact = std::exp(-0.5 * d * t) * std::sin(w1 * t) / w1;
    worst = std::max(worst, std::abs(propagate_means(m, 1.0, 0.0, t).q - exact));
  }
  return within(worst, 1e-4, "max abs deviation");
}

Outcome embedding_time() {
  const oracle::Embedding e{0.05, 0.05, 1.0, 1.0};
  const Model m(ModelParams{}, Peaked{e.coupling, e.width, e.peak});
  const std::vector<double> times = linspace(0.0, 50.0, 201);
  const std::vector<double> ode = oracle::embedding_response(e, times);
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) worst = std::max(worst, std::abs(chi_time(m, times[i]).qq() - ode[i]));
  return within(worst, 1e-3, "max abs deviation");
}

Outcome langevin() {
  oracle::LangevinConfig cfg;
  cfg.coupling = 0.2;
  cfg.n_traj = 100000;
  cfg.seed = 20240;
  cfg.a_q = 1.0;
  cfg.a_p = 1.0;
  const std::vector<double> times = linspace(1.0, 20.0, 20);
  const oracle::LangevinSeries mc = oracle::langevin_means(cfg, times);
  const Model m(ModelParams{}, Ohmic{cfg.coupling});
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Means exact = propagate_means(m, cfg.a_q, cfg.a_p, mc.t[i]);
    worst = std::max({worst, std::abs(mc.q_mean[i] - exact.q) / mc.q_stderr[i],
                      std::abs(mc.p_mean[i] - exact.p) / mc.p_stderr[i]});
  }
  return within(worst, 3.0, "max deviation in standard errors");
}

Outcome distance_properties() {
  const quad::QuadratureConfig cfg;
  const quad::Integrand f{[](double w) { return Complex(1.0, w) / Complex(1.0 - w * w, 0.3 * w); }, quad::Parity::hermitian, {1.0}};
  const quad::Integrand scaled{[&f](double w) { return Complex(3.0, -2.0) * f.eval(w); }, quad::Parity::none, {1.0}};
  const quad::Integrand even{[](double w) { return Complex(std::exp(-0.5 * w * w), 0.0); }, quad::Parity::even, {}};
  const quad::Integrand odd{[](double w) { return Complex(w * std::exp(-0.5 * w * w), 0.0); }, quad::Parity::odd, {}};
  const double self = distance(f, f, cfg);
  const double scale = distance(f, scaled, cfg);
  const double orth = distance(even, odd, cfg);
  bool ok = self < 1e-7 && scale < 1e-7 && std::abs(orth - 1.0) < 1e-12;

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double asym = 0.0;
  bool bounded = true;
  for (int i = 0; i < 10; ++i) {
    ModelParams p;
    p.beta = 0.5 + 2.0 * u(rng);
    const SpectralDensity sd = i % 2 == 0 ? SpectralDensity{Ohmic{0.05 + 2.0 * u(rng)}}
                                          : SpectralDensity{Peaked{0.1 + u(rng), 0.1 + u(rng), 0.5 + 1.5 * u(rng)}};
    const QuantifierReport r = quantify(Model(p, sd));
    for (double x : r.n1.m) bounded = bounded && x >= 0.0 && x <= 1.0;
    for (double x : r.n2.m) bounded = bounded && x >= 0.0 && x <= 1.0;
    asym = std::max(asym, std::abs(r.n1.qp() - r.n1.pq()));
  }
  ok = ok && bounded && asym <= 1e-8;
  return {ok, "D(f,f) " + sci(self) + ", D(f,lf) " + sci(scale) + ", D(even,odd) " + sci(orth) +
                  ", entries in [0,1]: " + (bounded ? "yes" : "no") + ", |n1_qp - n1_pq| " + sci(asym) +
                  " (tolerance 1e-08)"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "ohmic divisibility residual", 1.0, residual_identity},
      {2, "static sum rule", 5.0, sum_rule},
      {3, "classical equipartition", 5.0, equipartition},
      {4, "peaked kernel principal value", 10.0, peaked_kernel},
      {5, "ohmic n1 trend", 120.0, ohmic_trend},
      {6, "peaked n1 non-monotone in width", 300.0, width_non_monotone},
      {7, "classical regression failure", 120.0, classical_rt_failure},
      {8, "ohmic means vs damped oscillator", 30.0, damped_oscillator},
      {9, "peaked response vs embedding", 120.0, embedding_time},
      {10, "langevin ensemble vs means", 180.0, langevin},
      {11, "distance properties", 60.0, distance_properties},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.time_limit;
    const bool pass = out.ok && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %2d %s: %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                out.detail.c_str(), secs, c.time_limit, in_time ? "" : " over time");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
