#include "nonmark/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "nonmark/errors.hpp"

namespace nonmark::spectral {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

struct PeakedParts {
  double den;
  double den_prime;
  double num;  // w (Gamma^2 + w^2 - Omega^2)
  double num_prime;
};

PeakedParts peaked_parts(const Peaked& s, double w) {
  const double w2 = w * w;
  const double detune = w2 - s.peak * s.peak;
  const double g2 = s.width * s.width;
  return {detune * detune + g2 * w2, 4.0 * w * detune + 2.0 * g2 * w, w * (g2 + detune),
          g2 + 3.0 * w2 - s.peak * s.peak};
}

}  // namespace

// One Hermite cubic per table interval, in the local variable s = w - x0.
struct Segment {
  double x0, dx;
  double c0, c1, c2, c3;

  double j(double w) const {
    const double t = w - x0;
    return c0 + t * (c1 + t * (c2 + t * c3));
  }
  double j_prime(double w) const {
    const double t = w - x0;
    return c1 + t * (2.0 * c2 + 3.0 * t * c3);
  }
  // J / w and its derivative, continued analytically off the interval. The
  // first segment starts at J(0) = 0, so its ratio is a polynomial.
  double ratio(double w) const {
    if (x0 == 0.0) return c1 + w * (c2 + w * c3);
    return j(w) / w;
  }
  double ratio_prime(double w) const {
    if (x0 == 0.0) return c2 + 2.0 * w * c3;
    return (j_prime(w) * w - j(w)) / (w * w);
  }
};

struct Tabulated::Interp {
  std::vector<Segment> seg;

  const Segment& at(double w) const {
    const auto it = std::upper_bound(seg.begin(), seg.end(), w, [](double v, const Segment& s) { return v < s.x0; });
    return it == seg.begin() ? seg.front() : *std::prev(it);
  }

  // PV int_0^top f(v) / (v - z) dv for the piecewise-analytic f = (segment.*part).
  // Far segments take a fixed Gauss rule; a segment near the pole subtracts
  // f_k(z) from its own continuation and adds the log term exactly.
  double cauchy(double (Segment::*part)(double) const, double z) const {
    using boost::math::quadrature::gauss;
    double total = 0.0;
    for (const Segment& s : seg) {
      const double a = s.x0, b = s.x0 + s.dx;
      const double dist = z < a ? a - z : (z > b ? z - b : 0.0);
      const auto plain = [&](double v) { return (s.*part)(v) / (v - z); };
      if (dist >= 5.0 * s.dx) {
        total += gauss<double, 7>::integrate(plain, a, b);
      } else if (dist >= 0.5 * s.dx) {
        total += gauss<double, 15>::integrate(plain, a, b);
      } else {
        const double fz = (s.*part)(z);
        total += gauss<double, 10>::integrate([&](double v) { return v == z ? 0.0 : ((s.*part)(v) - fz) / (v - z); }, a, b);
        // At a knot that coincides with z the neighbours' logs cancel by continuity.
        const double la = a == z ? 0.0 : std::log(std::abs(a - z));
        const double lb = b == z ? 0.0 : std::log(std::abs(b - z));
        total += fz * (lb - la);
      }
    }
    return total;
  }
};

Tabulated::Tabulated(std::vector<double> freq, std::vector<double> value) : freq_(std::move(freq)) {
  require(freq_.size() == value.size(), "tabulated: frequency and value columns differ in length");
  require(freq_.size() >= 4, "tabulated: at least four samples are required");
  require(freq_.front() == 0.0, "tabulated: first sample must be at w = 0");
  double jmax = 0.0;
  for (std::size_t i = 0; i < freq_.size(); ++i) {
    require(std::isfinite(freq_[i]) && std::isfinite(value[i]), "tabulated: non-finite sample");
    require(value[i] >= 0.0, "tabulated: J must be non-negative");
    if (i > 0) require(freq_[i] > freq_[i - 1], "tabulated: frequencies must be strictly increasing");
    if (value[i] > jmax) {
      jmax = value[i];
      peak_ = freq_[i];
    }
  }
  require(jmax > 0.0, "tabulated: J vanishes identically");
  require(value.front() <= 1e-12 * jmax, "tabulated: J(0) must be 0");
  require(value.back() <= 1e-3 * jmax, "tabulated: last sample must be negligible relative to max J");
  // Both ends are pinned to zero, the far end flat, so that J / w and its
  // derivative continue continuously into the empty region beyond the table.
  value.front() = 0.0;
  value.back() = 0.0;
  const std::vector<double> y = value;
  const boost::math::interpolators::pchip<std::vector<double>> spline(std::vector<double>(freq_), std::move(value),
                                                                      std::numeric_limits<double>::quiet_NaN(), 0.0);
  auto interp = std::make_shared<Interp>();
  interp->seg.reserve(freq_.size() - 1);
  for (std::size_t k = 0; k + 1 < freq_.size(); ++k) {
    const double h = freq_[k + 1] - freq_[k];
    const double d0 = spline.prime(freq_[k]);
    const double d1 = k + 2 == freq_.size() ? 0.0 : spline.prime(freq_[k + 1]);
    const double secant = (y[k + 1] - y[k]) / h;
    interp->seg.push_back({freq_[k], h, y[k], d0, (3.0 * secant - 2.0 * d0 - d1) / h, (d0 + d1 - 2.0 * secant) / (h * h)});
  }
  interp_ = std::move(interp);
}

Tabulated Tabulated::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("tabulated: cannot open " + path.string());
  std::vector<double> w, j;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double a, b;
    if (!(fields >> a)) continue;
    std::string rest;
    if (!(fields >> b) || (fields >> rest)) {
      throw std::invalid_argument("tabulated: " + path.string() + ":" + std::to_string(lineno) +
                                  ": expected two columns 'w J'");
    }
    w.push_back(a);
    j.push_back(b);
  }
  return Tabulated(std::move(w), std::move(j));
}

Tabulated Tabulated::sample(const std::function<double(double)>& j, std::span<const double> grid) {
  std::vector<double> w(grid.begin(), grid.end()), v;
  v.reserve(w.size());
  for (double x : w) v.push_back(j(x));
  return Tabulated(std::move(w), std::move(v));
}

double Tabulated::operator()(double w) const {
  if (w <= 0.0 || w >= freq_.back()) return 0.0;
  return interp_->at(w).j(w);
}

double Tabulated::derivative(double w) const {
  if (w < 0.0 || w > freq_.back()) return 0.0;
  return interp_->at(w).j_prime(w);
}

double Tabulated::slope_at_zero() const { return interp_->seg.front().c1; }

// With r = J / w extended evenly, Im gamma = -(1/pi) PV int r(v) / (v - w) dv over
// the whole line, which folds onto the table as C(w) - C(-w).
KernelValue Tabulated::kernel(double w) const {
  const double a = std::abs(w);
  const double re = a > 0.0 ? (a < freq_.back() ? interp_->at(a).ratio(a) : 0.0) : slope_at_zero();
  if (w == 0.0) return {re, 0.0};
  const double im = -(interp_->cauchy(&Segment::ratio, a) - interp_->cauchy(&Segment::ratio, -a)) / std::numbers::pi;
  return {re, w < 0.0 ? -im : im};
}

// The derivative commutes with the Hilbert transform; the boundary terms at 0
// cancel between +-w and vanish at the flat table end. r' jumps at w = 0, which
// makes the imaginary part log-singular there, so |w| is floored.
Complex Tabulated::kernel_derivative(double w) const {
  constexpr double kOrigin = 1e-9;
  const double a = std::max(std::abs(w), kOrigin);
  double re = a < freq_.back() ? interp_->at(a).ratio_prime(a) : 0.0;
  re = w == 0.0 ? 0.0 : (w < 0.0 ? -re : re);
  const double im =
      -(interp_->cauchy(&Segment::ratio_prime, a) + interp_->cauchy(&Segment::ratio_prime, -a)) / std::numbers::pi;
  return {re, im};
}

void validate(const SpectralDensity& sd) {
  std::visit(overloaded{
                 [](const Ohmic& s) { require(std::isfinite(s.coupling) && s.coupling >= 0.0, "D must be >= 0"); },
                 [](const Peaked& s) {
                   require(std::isfinite(s.coupling) && s.coupling >= 0.0, "D must be >= 0");
                   require(std::isfinite(s.width) && s.width > 0.0, "gamma must be > 0");
                   require(std::isfinite(s.peak) && s.peak > 0.0, "omega-big must be > 0");
                 },
                 [](const Tabulated&) {},
             },
             sd);
}

bool decoupled(const SpectralDensity& sd) {
  return std::visit(overloaded{
                        [](const Ohmic& s) { return s.coupling == 0.0; },
                        [](const Peaked& s) { return s.coupling == 0.0; },
                        [](const Tabulated&) { return false; },
                    },
                    sd);
}

double j_omega(const SpectralDensity& sd, double w) {
  if (w < 0.0) return -j_omega(sd, -w);
  return std::visit(overloaded{
                        [w](const Ohmic& s) { return s.coupling * w; },
                        [w](const Peaked& s) {
                          const double detune = w * w - s.peak * s.peak;
                          return s.coupling * s.coupling * s.width * w /
                                 (detune * detune + s.width * s.width * w * w);
                        },
                        [w](const Tabulated& t) { return t(w); },
                    },
                    sd);
}

KernelValue gamma_tilde(const SpectralDensity& sd, double w) {
  return std::visit(overloaded{
                        [](const Ohmic& s) { return KernelValue{s.coupling, 0.0}; },
                        [w](const Peaked& s) {
                          const PeakedParts p = peaked_parts(s, w);
                          const double d2 = s.coupling * s.coupling;
                          return KernelValue{d2 * s.width / p.den, d2 * p.num / (s.peak * s.peak * p.den)};
                        },
                        [w](const Tabulated& t) { return t.kernel(w); },
                    },
                    sd);
}

Complex gamma_tilde_prime(const SpectralDensity& sd, double w) {
  return std::visit(
      overloaded{
          [](const Ohmic&) { return Complex{}; },
          [w](const Peaked& s) {
            const PeakedParts p = peaked_parts(s, w);
            const double d2 = s.coupling * s.coupling;
            const double den2 = p.den * p.den;
            const double re = -d2 * s.width * p.den_prime / den2;
            const double im = d2 / (s.peak * s.peak) * (p.num_prime * p.den - p.num * p.den_prime) / den2;
            return Complex(re, im);
          },
          [w](const Tabulated& t) { return t.kernel_derivative(w); },
      },
      sd);
}

double instantaneous_friction(const SpectralDensity& sd) {
  if (const auto* o = std::get_if<Ohmic>(&sd)) return o->coupling;
  return 0.0;
}

std::vector<double> features(const SpectralDensity& sd) {
  return std::visit(overloaded{
                        [](const Ohmic&) { return std::vector<double>{}; },
                        [](const Peaked& s) { return std::vector<double>{s.peak}; },
                        [](const Tabulated& t) { return std::vector<double>{t.peak_frequency()}; },
                    },
                    sd);
}

}  // namespace nonmark::spectral
