#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "nonmark/correlations.hpp"

using namespace nonmark;
using spectral::Ohmic;
using spectral::Peaked;

namespace {

constexpr Complex I{0.0, 1.0};

double entry_gap(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  double gap = 0.0;
  for (int k = 0; k < 4; ++k) gap = std::max(gap, std::abs(a.m[k] - b.m[k]));
  return gap;
}

// Imaginary-frequency (Matsubara) sums, independent of any real-axis quadrature:
//   <q^2> = (1/beta) sum_n 1/(w0^2 + v^2 + |v| g(|v|)),
//   <p^2> = (1/beta) sum_n (w0^2 + |v| g(|v|))/(w0^2 + v^2 + |v| g(|v|)),
// with v = 2 pi n / (beta hbar) and g the kernel continued to w = i v.
struct Matsubara {
  double qq;
  double pp;
};

template <class Kernel>
Matsubara matsubara(double w0, double beta, double hbar, Kernel g, long terms) {
  const double step = 2.0 * std::numbers::pi / (beta * hbar);
  double qq = 1.0 / (w0 * w0);
  double pp = 1.0;
  for (long n = 1; n <= terms; ++n) {
    const double v = step * static_cast<double>(n);
    const double den = w0 * w0 + v * v + v * g(v);
    qq += 2.0 / den;
    pp += 2.0 * (w0 * w0 + v * g(v)) / den;
  }
  // Remainders of sum_{n > N} c / n^2 by Euler-Maclaurin.
  const double nn = static_cast<double>(terms);
  const double tail = 1.0 / nn - 0.5 / (nn * nn);
  qq += 2.0 * tail / (step * step);
  pp += 2.0 * w0 * w0 * tail / (step * step);
  return {qq / beta, pp / beta};
}

}  // namespace

TEST(Covariance, ClassicalEquipartition) {
  ModelParams p;
  p.hbar = 0.0;
  p.beta = 2.0;
  for (const spectral::SpectralDensity& sd :
       {spectral::SpectralDensity{Ohmic{0.1}}, spectral::SpectralDensity{Ohmic{0.5}},
        spectral::SpectralDensity{Peaked{0.1, 0.5, 2.0}}, spectral::SpectralDensity{Peaked{0.5, 0.5, 2.0}}}) {
    const CovarianceMatrix c = covariance0(Model(p, sd));
    EXPECT_NEAR(c.qq, 0.5, 0.5e-6);
    EXPECT_NEAR(c.pp, 0.5, 0.5e-6);
    EXPECT_FALSE(c.cutoff_sensitive);
    EXPECT_EQ(c.matrix().qp(), 0.0);
    EXPECT_EQ(c.matrix().pq(), 0.0);
  }
}

TEST(Covariance, WeakCouplingQuantumLimit) {
  const CovarianceMatrix c = covariance0(Model(ModelParams{}, Ohmic{1e-3}));
  const double free = 0.5 / std::tanh(0.5);
  EXPECT_NEAR(c.qq, free, 1e-3 * free);
}

TEST(Covariance, QuantumOhmicPositionMatchesMatsubaraSum) {
  const double d = 0.5;
  const CovarianceMatrix c = covariance0(Model(ModelParams{}, Ohmic{d}));
  const Matsubara m = matsubara(1.0, 1.0, 1.0, [d](double) { return d; }, 200000);
  // The cutoff removes ~ D / (2 pi cutoff^2) from <q^2>.
  EXPECT_NEAR(c.qq, m.qq, 1e-6 * m.qq);
  // <p^2> grows like log(cutoff) for memoryless friction.
  EXPECT_TRUE(c.cutoff_sensitive);
  EXPECT_GT(c.cutoff_change, 0.01);
}

TEST(Covariance, QuantumPeakedMatchesMatsubaraSum) {
  const Peaked s{1.0, 0.5, 2.0};
  ModelParams p;
  p.beta = 0.7;
  const CovarianceMatrix c = covariance0(Model(p, s));
  const auto g = [&s](double v) {
    const double d2 = s.coupling * s.coupling, o2 = s.peak * s.peak;
    return (d2 / o2 - d2 / (o2 + v * v + s.width * v)) / v;
  };
  const Matsubara m = matsubara(1.0, p.beta, p.hbar, g, 200000);
  EXPECT_NEAR(c.qq, m.qq, 1e-6 * m.qq);
  EXPECT_NEAR(c.pp, m.pp, 1e-6 * m.pp);
  EXPECT_FALSE(c.cutoff_sensitive);
}

TEST(Covariance, CachedAndThreadSafe) {
  clear_covariance_cache();
  const Model m(ModelParams{}, Peaked{0.8, 0.3, 1.5});
  const CovarianceMatrix first = covariance0(m);
  std::vector<CovarianceMatrix> seen(8);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < seen.size(); ++i) pool.emplace_back([&, i] { seen[i] = covariance0(m); });
  for (auto& t : pool) t.join();
  for (const auto& c : seen) {
    EXPECT_EQ(c.qq, first.qq);
    EXPECT_EQ(c.pp, first.pp);
  }
}

TEST(ExactSpectrum, OhmicClassicalExample) {
  ModelParams p;
  p.hbar = 0.0;
  const ComplexMatrix2 c = exact_spectrum(Model(p, Ohmic{1.0}), 1.0);
  EXPECT_NEAR(c.qq().real(), 2.0, 1e-14);
  EXPECT_EQ(c.qq().imag(), 0.0);
}

TEST(ExactSpectrum, MatrixStructure) {
  const Model m(ModelParams{}, Peaked{1.0, 0.5, 2.0});
  for (double w = -5.0; w <= 5.0; w += 0.31) {
    const ComplexMatrix2 c = exact_spectrum(m, w);
    const ComplexMatrix2 expected = ComplexMatrix2::from(1.0, I * w, -I * w, w * w) * c.qq();
    EXPECT_LT(entry_gap(c, expected), 1e-12 * std::max(1.0, std::abs(c.pp())));
  }
}

TEST(ExactSpectrum, DetailedBalance) {
  ModelParams p;
  p.beta = 1.3;
  const Model m(p, Ohmic{0.4});
  for (double w : {0.01, 0.3, 1.0, 2.7, 8.0}) {
    const double plus = exact_spectrum(m, w).qq().real();
    const double minus = exact_spectrum(m, -w).qq().real();
    EXPECT_NEAR(minus, std::exp(-p.beta * p.hbar * w) * plus, 1e-13 * plus);
  }
}

TEST(ExactSpectrum, ClassicalLimitAndSeriesBranch) {
  ModelParams classical;
  classical.hbar = 0.0;
  const Model mc(classical, Ohmic{0.6});
  // The quantum spectrum exceeds the classical one by y / (1 - e^-y) = 1 + y/2 + ...,
  // y = beta hbar w, so pointwise agreement to 1e-8 needs y below ~2e-8.
  for (double hbar : {1e-9, 1e-7}) {
    ModelParams tiny;
    tiny.hbar = hbar;
    const Model mq(tiny, Ohmic{0.6});
    for (double w : {0.5, 1.0, 5.0}) {
      const double a = exact_spectrum(mc, w).qq().real();
      const double b = exact_spectrum(mq, w).qq().real();
      const double y = tiny.beta * hbar * w;
      EXPECT_NEAR(b / a - 1.0, 0.5 * y, 1e-12);
      if (y < 1e-8) EXPECT_NEAR(a, b, 1e-8 * a);
    }
  }
  // Both sides of the series threshold |beta hbar w| = 1e-4 agree smoothly.
  const Model m(ModelParams{}, Ohmic{0.6});
  const double below = exact_spectrum(m, 0.99e-4).qq().real();
  const double above = exact_spectrum(m, 1.01e-4).qq().real();
  EXPECT_NEAR(below, above, 1e-5 * above);
  EXPECT_TRUE(std::isfinite(exact_spectrum(m, 0.0).qq().real()));
}

TEST(RtSpectrum, ExplicitEntriesMatchGeneralForm) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    ModelParams p;
    p.omega0 = 0.5 + u(rng);
    const double w = -6.0 + 12.0 * u(rng);
    const spectral::SpectralDensity sd = (i % 2 == 0) ? spectral::SpectralDensity{Ohmic{2.0 * u(rng)}}
                                                      : spectral::SpectralDensity{Peaked{u(rng), 0.1 + u(rng), 0.5 + 2.0 * u(rng)}};
    const Model m(p, sd);
    const CovarianceMatrix c0{0.3 + u(rng), 0.3 + u(rng)};
    const ComplexMatrix2 a = rt_spectrum(m, w, c0);
    const ComplexMatrix2 b = rt_spectrum_general(m, w, c0);
    double scale = 1.0;
    for (const Complex& x : a.m) scale = std::max(scale, std::abs(x));
    EXPECT_LT(entry_gap(a, b), 1e-12 * scale) << "i=" << i;
    EXPECT_LT(std::abs(a.qp() - std::conj(a.pq())), 1e-14 * scale);
  }
}

TEST(RtSpectrum, VanishesAtZeroFrequency) {
  const Model m(ModelParams{}, Ohmic{0.5});
  const CovarianceMatrix c0 = covariance0(m);
  EXPECT_EQ(rt_spectrum(m, 0.0, c0).qq(), Complex(0.0, 0.0));
}

TEST(RtSpectrum, ClassicalMomentumEntryIsExact) {
  ModelParams p;
  p.hbar = 0.0;
  const Model m(p, Ohmic{0.5});
  const CovarianceMatrix c0 = covariance0(m);
  for (double w : {0.3, 1.0, 4.0}) {
    EXPECT_NEAR(std::abs(rt_spectrum(m, w, c0).pp() - exact_spectrum(m, w).pp()), 0.0, 1e-6);
  }
}
