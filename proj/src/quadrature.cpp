#include "nonmark/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>

#include "gauss_kronrod.hpp"
#include "nonmark/errors.hpp"

namespace nonmark::quad {

namespace detail {
namespace {

// Kronrod abscissae and weights (21 points) with the embedded 10-point Gauss
// weights; the Gauss nodes are the odd entries of kXgk.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

struct Panel {
  double a = 0.0;
  double b = 0.0;
  std::vector<Complex> value;
  std::vector<double> error;
  std::vector<double> abs_value;  // integral of |f| over the panel
  bool alive = true;
};

class Kronrod21 {
 public:
  Kronrod21(const VecEval& f, std::size_t n) : f_(f), n_(n), samples_(21 * n) {}

  void evaluate(Panel& p) {
    const double centre = 0.5 * (p.a + p.b);
    const double half = 0.5 * (p.b - p.a);
    sample(0, centre);
    for (std::size_t j = 0; j < 10; ++j) {
      sample(1 + 2 * j, centre - half * kXgk[j]);
      sample(2 + 2 * j, centre + half * kXgk[j]);
    }
    p.value.assign(n_, Complex{});
    p.error.assign(n_, 0.0);
    p.abs_value.assign(n_, 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
      const Complex fc = at(0, k);
      Complex resk = kWgk[10] * fc;
      Complex resg{};
      double resabs = kWgk[10] * std::abs(fc);
      for (std::size_t j = 0; j < 10; ++j) {
        const Complex f1 = at(1 + 2 * j, k);
        const Complex f2 = at(2 + 2 * j, k);
        resk += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
      }
      const Complex mean = 0.5 * resk;
      double resasc = kWgk[10] * std::abs(fc - mean);
      for (std::size_t j = 0; j < 10; ++j) {
        resasc += kWgk[j] * (std::abs(at(1 + 2 * j, k) - mean) + std::abs(at(2 + 2 * j, k) - mean));
      }
      const double h = std::abs(half);
      double err = std::abs((resk - resg) * half);
      resasc *= h;
      resabs *= h;
      if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
      }
      if (resabs > kTiny / (50.0 * kEps)) err = std::max(50.0 * kEps * resabs, err);
      p.value[k] = resk * half;
      p.error[k] = err;
      p.abs_value[k] = resabs;
    }
  }

 private:
  void sample(std::size_t node, double x) {
    std::span<Complex> out(samples_.data() + node * n_, n_);
    f_(x, out);
    for (const Complex& v : out) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw NonFinite("integrand returned a non-finite value at x = " + std::to_string(x), x);
      }
    }
  }
  const Complex& at(std::size_t node, std::size_t k) const { return samples_[node * n_ + k]; }

  const VecEval& f_;
  std::size_t n_;
  std::vector<Complex> samples_;
};

std::vector<double> normalize(std::vector<double> pts, double a, double b) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  out.reserve(pts.size());
  const double gap = 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  for (double x : pts) {
    if (x < a || x > b) continue;
    if (!out.empty() && x - out.back() <= gap) continue;
    out.push_back(x);
  }
  if (out.empty() || out.front() != a) out.insert(out.begin(), a);
  if (out.back() != b) {
    if (b - out.back() <= gap) out.back() = b;
    else out.push_back(b);
  }
  return out;
}

}  // namespace

std::vector<double> initial_grid(double a, double b, const QuadratureConfig& cfg,
                                 std::span<const double> extra) {
  std::vector<double> pts{a, b};
  const double core = cfg.core_extent;
  const double h = cfg.core_panel_width;
  const auto steps = static_cast<long>(std::floor(2.0 * core / h + 0.5));
  for (long i = 0; i <= steps; ++i) {
    const double x = -core + static_cast<double>(i) * h;
    if (x > a && x < b) pts.push_back(x);
  }
  for (double x = core * 1.25; x < b || -x > a; x *= 1.25) {
    if (x > a && x < b) pts.push_back(x);
    if (-x > a && -x < b) pts.push_back(-x);
  }
  for (double x : extra) {
    if (x > a && x < b) pts.push_back(x);
  }
  return normalize(std::move(pts), a, b);
}

std::vector<double> add_periodic_points(std::vector<double> grid, double a, double b,
                                        double spacing) {
  const auto count = static_cast<long>(std::floor((b - a) / spacing));
  grid.reserve(grid.size() + static_cast<std::size_t>(count) + 1);
  for (long k = 1; k <= count; ++k) grid.push_back(a + static_cast<double>(k) * spacing);
  return normalize(std::move(grid), a, b);
}

VecEstimate adaptive_impl(const VecEval& f, std::size_t n, std::span<const double> grid,
                          const QuadratureConfig& cfg, bool tol_from_abs) {
  if (grid.size() < 2) throw std::invalid_argument("quadrature grid needs at least two points");
  Kronrod21 rule(f, n);
  std::vector<Panel> panels;
  panels.reserve(grid.size() * 2);
  std::vector<Complex> total(n);
  std::vector<double> total_err(n, 0.0);
  std::vector<double> total_abs(n, 0.0);

  auto add = [&](const Panel& p, double sign) {
    for (std::size_t k = 0; k < n; ++k) {
      total[k] += sign * p.value[k];
      total_err[k] += sign * p.error[k];
      total_abs[k] += sign * p.abs_value[k];
    }
  };
  auto tolerance = [&](std::size_t k) {
    const double ref = tol_from_abs ? std::max(std::abs(total[k]), total_abs[k]) : std::abs(total[k]);
    return std::max(cfg.abs_tol, cfg.rel_tol * ref);
  };
  auto priority = [&](const Panel& p) {
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, p.error[k] / tolerance(k));
    return worst;
  };

  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    Panel p;
    p.a = grid[i];
    p.b = grid[i + 1];
    rule.evaluate(p);
    add(p, 1.0);
    panels.push_back(std::move(p));
  }

  using Entry = std::pair<double, std::size_t>;
  auto cmp = [&panels](const Entry& x, const Entry& y) {
    if (x.first != y.first) return x.first < y.first;
    return panels[x.second].a > panels[y.second].a;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  for (std::size_t i = 0; i < panels.size(); ++i) heap.emplace(priority(panels[i]), i);

  auto satisfied = [&] {
    for (std::size_t k = 0; k < n; ++k) {
      if (total_err[k] > tolerance(k)) return false;
    }
    return true;
  };

  bool converged = true;
  int splits = 0;
  while (!satisfied()) {
    if (splits >= cfg.max_subdivisions || heap.empty()) {
      converged = false;
      break;
    }
    const std::size_t idx = heap.top().second;
    heap.pop();
    const double a = panels[idx].a;
    const double b = panels[idx].b;
    const double mid = 0.5 * (a + b);
    if (!(mid > a && mid < b) || (b - a) < 1e-13 * std::max(1.0, std::abs(mid))) {
      // Cannot refine below rounding; leave the panel as it is.
      continue;
    }
    add(panels[idx], -1.0);
    panels[idx].alive = false;
    Panel left;
    left.a = a;
    left.b = mid;
    Panel right;
    right.a = mid;
    right.b = b;
    rule.evaluate(left);
    rule.evaluate(right);
    add(left, 1.0);
    add(right, 1.0);
    panels.push_back(std::move(left));
    panels.push_back(std::move(right));
    heap.emplace(priority(panels[panels.size() - 2]), panels.size() - 2);
    heap.emplace(priority(panels.back()), panels.size() - 1);
    ++splits;
  }

  // Re-sum in abscissa order so the result does not depend on refinement history.
  std::vector<const Panel*> alive;
  alive.reserve(panels.size());
  for (const Panel& p : panels) {
    if (p.alive) alive.push_back(&p);
  }
  std::sort(alive.begin(), alive.end(), [](const Panel* x, const Panel* y) { return x->a < y->a; });
  VecEstimate out;
  out.value.assign(n, Complex{});
  out.error.assign(n, 0.0);
  out.abs_value.assign(n, 0.0);
  for (const Panel* p : alive) {
    for (std::size_t k = 0; k < n; ++k) {
      out.value[k] += p->value[k];
      out.error[k] += p->error[k];
      out.abs_value[k] += p->abs_value[k];
    }
  }
  out.panels = static_cast<int>(alive.size());
  out.converged = converged;
  return out;
}

VecEstimate adaptive(const VecEval& f, std::size_t n, std::span<const double> grid,
                     const QuadratureConfig& cfg) {
  return adaptive_impl(f, n, grid, cfg, false);
}

}  // namespace detail

namespace {

using detail::VecEstimate;

struct TailFit {
  Complex correction{};
  double magnitude = 0.0;    // |correction|, or the crude bound |f(W)| W when unmodelled
  double uncertainty = 0.0;  // spread between the fitted exponent and its extrapolation
};

// Fits |f| ~ A w^-p on [W/10, W] and integrates the model from W to infinity.
// The local exponent is measured on both half decades and extrapolated assuming
// subleading terms ~ w^-2 relative, which shrink tenfold per half decade.
TailFit fit_tail(Complex f_lo, Complex f_mid, Complex f_hi, double width) {
  TailFit fit;
  const double lo = std::abs(f_lo);
  const double mid = std::abs(f_mid);
  const double hi = std::abs(f_hi);
  if (hi == 0.0) return fit;
  const double half_decade = 0.5 * std::log(10.0);
  const double p1 = std::log(lo / mid) / half_decade;
  const double p2 = std::log(mid / hi) / half_decade;
  const double p = p2 - (p1 - p2) / 9.0;
  if (std::isfinite(p1) && std::isfinite(p2) && p > 1.05 && p2 > 1.05) {
    fit.correction = f_hi * width / (p - 1.0);
    fit.magnitude = std::abs(fit.correction);
    fit.uncertainty = hi * width * std::abs(1.0 / (p2 - 1.0) - 1.0 / (p - 1.0));
    return fit;
  }
  fit.magnitude = hi * width;
  fit.uncertainty = fit.magnitude;
  return fit;
}

void check_tail(const TailFit& fit, Complex result, double reference, const QuadratureConfig& cfg) {
  const double scale = std::max(std::abs(result), reference);
  if (fit.uncertainty > cfg.tail_tol * scale) {
    throw TailDominates("tail beyond W = " + std::to_string(cfg.half_width) +
                        " is not a resolvable power law; its uncertainty " + std::to_string(fit.uncertainty) +
                        " exceeds the tolerance on " + std::to_string(scale));
  }
}

Complex expected_mirror(Complex fp, Parity parity) {
  switch (parity) {
    case Parity::even: return fp;
    case Parity::odd: return -fp;
    case Parity::hermitian: return std::conj(fp);
    case Parity::none: break;
  }
  return fp;
}

std::array<double, 3> spot_points(double half_width) {
  // splitmix64 with a fixed seed: the same abscissae on every call.
  std::uint64_t state = 0x243f6a8885a308d3ULL;
  std::array<double, 3> pts{};
  for (double& x : pts) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
    x = half_width * (0.001 + 0.999 * u * u);
  }
  return pts;
}

bool close(Complex got, Complex want) {
  const double scale = std::max(std::abs(got), std::abs(want));
  return std::abs(got - want) <= 1e-10 * scale + 1e-300;
}

void throw_nonconvergence(const std::string& what, const VecEstimate& est) {
  throw NonConvergence(what + ": subdivision budget exhausted", est.value.empty() ? Complex{} : est.value[0],
                       est.error.empty() ? 0.0 : est.error[0]);
}

// Tail checks for one (f, g) pair; the inner product is judged against ||f|| ||g||.
PairMoments finish_pair(const std::array<Complex, 3>& v, const std::array<TailFit, 3>& right,
                        const std::array<TailFit, 3>& left, const QuadratureConfig& cfg) {
  const double norm_f = std::abs(v[1]);
  const double norm_g = std::abs(v[2]);
  const std::array<double, 3> ref = {std::sqrt(norm_f * norm_g), norm_f, norm_g};
  double worst = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    check_tail(right[c], v[c], ref[c], cfg);
    check_tail(left[c], v[c], ref[c], cfg);
    const double mag = right[c].magnitude + left[c].magnitude;
    worst = std::max(worst, mag / std::max(ref[c], 1e-300));
  }
  PairMoments m;
  m.inner = v[0];
  m.norm2_f = norm_f;
  m.norm2_g = norm_g;
  m.tail = worst;
  return m;
}

std::vector<double> mirrored(std::span<const double> pts) {
  std::vector<double> out;
  out.reserve(2 * pts.size());
  for (double x : pts) {
    out.push_back(x);
    out.push_back(-x);
  }
  return out;
}

std::vector<double> absolute(std::span<const double> pts) {
  std::vector<double> out;
  out.reserve(pts.size());
  for (double x : pts) out.push_back(std::abs(x));
  return out;
}

}  // namespace

void QuadratureConfig::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(std::string("QuadratureConfig: invalid ") + field);
  };
  require(half_width > 0.0 && std::isfinite(half_width), "half_width");
  require(rel_tol > 0.0, "rel_tol");
  require(abs_tol > 0.0, "abs_tol");
  require(tail_tol > 0.0, "tail_tol");
  require(tail_widenings >= 0, "tail_widenings");
  require(pv_radius > 0.0, "pv_radius");
  require(max_subdivisions >= 1, "max_subdivisions");
  require(oscillatory_panels_per_period >= 1, "oscillatory_panels_per_period");
  require(core_extent > 0.0, "core_extent");
  require(core_panel_width > 0.0 && core_panel_width <= core_extent, "core_panel_width");
}

bool parity_holds(const std::function<Complex(double)>& f, Parity parity, double half_width) {
  if (parity == Parity::none) return true;
  for (double x : spot_points(half_width)) {
    const Complex fp = f(x);
    const Complex fm = f(-x);
    if (!close(fm, expected_mirror(fp, parity))) return false;
  }
  return true;
}

Estimate integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(a < b)) throw std::invalid_argument("integrate: requires a < b");
  if (std::isinf(a)) throw std::invalid_argument("integrate: lower limit must be finite");
  const detail::VecEval vf = [&f](double x, std::span<Complex> out) { out[0] = f.eval(x); };

  if (std::isfinite(b)) {
    const auto grid = detail::initial_grid(a, b, cfg, f.breakpoints);
    const VecEstimate est = detail::adaptive(vf, 1, grid, cfg);
    if (!est.converged) throw_nonconvergence("integrate", est);
    return {est.value[0], est.error[0], est.panels};
  }

  // [a, a + W] directly, then x = c + s / (1 - s) maps [c, inf) onto [0, 1).
  const double c = a + cfg.half_width;
  const auto grid = detail::initial_grid(a, c, cfg, f.breakpoints);
  const detail::VecEval mapped = [&f, c](double s, std::span<Complex> out) {
    const double one_minus = 1.0 - s;
    const double x = c + s / one_minus;
    out[0] = f.eval(x) / (one_minus * one_minus);
  };
  std::vector<double> unit_grid;
  for (int i = 0; i <= 16; ++i) unit_grid.push_back(static_cast<double>(i) / 16.0);
  const VecEstimate head = detail::adaptive(vf, 1, grid, cfg);
  const VecEstimate tail = detail::adaptive(mapped, 1, unit_grid, cfg);
  if (!head.converged) throw_nonconvergence("integrate", head);
  if (!tail.converged) throw_nonconvergence("integrate (mapped tail)", tail);
  return {head.value[0] + tail.value[0], head.error[0] + tail.error[0], head.panels + tail.panels};
}

LineEstimate integrate_line(const Integrand& f, const QuadratureConfig& cfg) {
  cfg.validate();
  const double w = cfg.half_width;
  LineEstimate out;
  const bool use_parity = f.parity != Parity::none && parity_holds(f.eval, f.parity, w);
  const detail::VecEval vf = [&f](double x, std::span<Complex> o) { o[0] = f.eval(x); };
  const double r10 = std::sqrt(10.0);

  if (use_parity) {
    out.parity_used = true;
    if (f.parity == Parity::odd) return out;
    const auto bps = absolute(f.breakpoints);
    const auto grid = detail::initial_grid(0.0, w, cfg, bps);
    const VecEstimate est = detail::adaptive(vf, 1, grid, cfg);
    if (!est.converged) throw_nonconvergence("integrate_line", est);
    const TailFit tail = fit_tail(f.eval(w / 10.0), f.eval(w / r10), f.eval(w), w);
    Complex half = est.value[0] + tail.correction;
    if (f.parity == Parity::hermitian) half = Complex(half.real(), 0.0);
    out.value = 2.0 * half;
    out.error = 2.0 * est.error[0];
    out.tail = 2.0 * tail.magnitude;
    out.panels = est.panels;
    check_tail(tail, out.value, 2.0 * est.abs_value[0], cfg);
    return out;
  }

  const auto grid = detail::initial_grid(-w, w, cfg, f.breakpoints);
  const VecEstimate est = detail::adaptive(vf, 1, grid, cfg);
  if (!est.converged) throw_nonconvergence("integrate_line", est);
  const TailFit right = fit_tail(f.eval(w / 10.0), f.eval(w / r10), f.eval(w), w);
  const TailFit left = fit_tail(f.eval(-w / 10.0), f.eval(-w / r10), f.eval(-w), w);
  out.value = est.value[0] + right.correction + left.correction;
  out.error = est.error[0];
  out.tail = right.magnitude + left.magnitude;
  out.panels = est.panels;
  check_tail(right, out.value, est.abs_value[0], cfg);
  check_tail(left, out.value, est.abs_value[0], cfg);
  return out;
}

Estimate principal_value(const Integrand& f, double pole, double a, double b,
                         const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(a < pole && pole < b)) throw std::invalid_argument("principal_value: requires a < pole < b");
  const double reach = std::min(pole - a, b - pole);
  const double eps = std::min(cfg.pv_radius, 0.25 * reach);

  // Folding the two sides of the pole, s(u) = f(c + u) + f(c - u), cancels the
  // 1/u singularity, so each symmetric-exclusion integral is well conditioned.
  const detail::VecEval folded = [&f, pole](double u, std::span<Complex> o) {
    o[0] = f.eval(pole + u) + f.eval(pole - u);
  };
  std::vector<double> ubps;
  for (double x : f.breakpoints) ubps.push_back(std::abs(x - pole));

  auto piece = [&](double lo, double hi) {
    const auto grid = detail::initial_grid(lo, hi, cfg, ubps);
    VecEstimate est = detail::adaptive(folded, 1, grid, cfg);
    if (!est.converged) throw_nonconvergence("principal_value", est);
    return est;
  };
  const VecEstimate outer = piece(eps, reach);
  const VecEstimate mid = piece(0.5 * eps, eps);
  const VecEstimate inner = piece(0.25 * eps, 0.5 * eps);

  Estimate rest;
  if (b - pole > reach * (1.0 + 1e-12)) {
    rest = integrate(f, pole + reach, b, cfg);
  } else if (pole - a > reach * (1.0 + 1e-12)) {
    rest = integrate(f, a, pole - reach, cfg);
  }

  const Complex j1 = outer.value[0];
  const Complex j2 = j1 + mid.value[0];
  const Complex j4 = j2 + inner.value[0];
  const Complex r1a = 2.0 * j2 - j1;
  const Complex r1b = 2.0 * j4 - j2;
  const Complex r2 = (8.0 * r1b - r1a) / 7.0;

  const double quad_err = outer.error[0] + mid.error[0] + inner.error[0] + rest.error;
  const double d1 = std::abs(mid.value[0]);
  const double d2 = std::abs(inner.value[0]);
  const double noise = 100.0 * quad_err + cfg.abs_tol;
  if (d1 > noise && d2 > 0.75 * d1) {
    throw NonConvergence("principal_value: exclusion sequence does not contract (is the pole simple?)",
                         r2 + rest.value, d2);
  }
  Estimate out;
  out.value = r2 + rest.value;
  out.error = std::abs(r2 - r1b) + quad_err;
  out.panels = outer.panels + mid.panels + inner.panels + rest.panels;
  return out;
}

std::vector<double> sine_transform(const RealVectorEval& eval, std::size_t n, double t,
                                   std::span<const double> breakpoints,
                                   const QuadratureConfig& cfg) {
  cfg.validate();
  if (t < 0.0) throw std::invalid_argument("sine_transform: requires t >= 0");
  std::vector<double> out(n, 0.0);
  if (t == 0.0) return out;
  // The asymptotic tail below needs many periods beyond the cut, so small t
  // pushes the cut out past W.
  const double w = std::max(cfg.half_width, 100.0 / t);
  const double period = 2.0 * std::numbers::pi / t;
  auto grid = detail::initial_grid(0.0, w, cfg, breakpoints);
  grid = detail::add_periodic_points(std::move(grid), 0.0, w,
                                     period / cfg.oscillatory_panels_per_period);

  std::vector<double> scratch(n);
  const detail::VecEval vf = [&](double x, std::span<Complex> o) {
    eval(x, scratch);
    const double s = std::sin(x * t);
    for (std::size_t k = 0; k < n; ++k) o[k] = scratch[k] * s;
  };
  const VecEstimate est = detail::adaptive_impl(vf, n, grid, cfg, true);
  if (!est.converged) throw_nonconvergence("sine_transform", est);
  // int_W^inf F sin(wt) dw ~ F(W) cos(Wt) / t for slowly varying F.
  std::vector<double> at_w(n);
  eval(w, at_w);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = (2.0 / std::numbers::pi) * (est.value[k].real() + at_w[k] * std::cos(w * t) / t);
  }
  return out;
}

double sine_transform(const Integrand& f, double t, const QuadratureConfig& cfg) {
  const RealVectorEval eval = [&f](double x, std::span<double> o) { o[0] = f.eval(x).real(); };
  return sine_transform(eval, 1, t, f.breakpoints, cfg)[0];
}

Complex inner_product_l2(const Integrand& f, const Integrand& g, const QuadratureConfig& cfg) {
  Integrand h;
  h.eval = [&f, &g](double x) { return f.eval(x) * std::conj(g.eval(x)); };
  const bool sym = [&] {
    const bool fe = f.parity == Parity::even || f.parity == Parity::odd;
    const bool ge = g.parity == Parity::even || g.parity == Parity::odd;
    return fe && ge;
  }();
  if (sym) {
    h.parity = (f.parity == g.parity) ? Parity::even : Parity::odd;
  } else if (f.parity == Parity::hermitian && g.parity == Parity::hermitian) {
    h.parity = Parity::hermitian;
  }
  h.breakpoints = f.breakpoints;
  h.breakpoints.insert(h.breakpoints.end(), g.breakpoints.begin(), g.breakpoints.end());
  return integrate_line(h, cfg).value;
}

double norm_l2(const Integrand& f, const QuadratureConfig& cfg) {
  Integrand h;
  h.eval = [&f](double x) { return Complex(std::norm(f.eval(x)), 0.0); };
  h.parity = f.parity == Parity::none ? Parity::none : Parity::even;
  h.breakpoints = f.breakpoints;
  return std::sqrt(std::max(0.0, integrate_line(h, cfg).value.real()));
}

namespace {

std::vector<PairMoments> pair_moments_at(const PairEval& eval, std::size_t pairs, Parity parity,
                                         std::span<const double> breakpoints, const QuadratureConfig& cfg) {
  const double w = cfg.half_width;
  std::vector<Complex> fbuf(pairs);
  std::vector<Complex> gbuf(pairs);

  bool use_parity = parity != Parity::none;
  if (use_parity) {
    std::vector<Complex> fm(pairs);
    std::vector<Complex> gm(pairs);
    for (double x : spot_points(w)) {
      eval(x, fbuf, gbuf);
      eval(-x, fm, gm);
      for (std::size_t k = 0; k < pairs && use_parity; ++k) {
        use_parity = close(fm[k], expected_mirror(fbuf[k], parity)) &&
                     close(gm[k], expected_mirror(gbuf[k], parity));
      }
    }
  }

  // Components per pair: f conj(g), |f|^2, |g|^2.
  const std::size_t n = 3 * pairs;
  const detail::VecEval vf = [&](double x, std::span<Complex> o) {
    eval(x, fbuf, gbuf);
    for (std::size_t k = 0; k < pairs; ++k) {
      o[3 * k] = fbuf[k] * std::conj(gbuf[k]);
      o[3 * k + 1] = std::norm(fbuf[k]);
      o[3 * k + 2] = std::norm(gbuf[k]);
    }
  };
  auto sample = [&](double x) {
    std::vector<Complex> o(n);
    vf(x, o);
    return o;
  };

  const double r10 = std::sqrt(10.0);
  std::vector<PairMoments> out(pairs);
  if (use_parity) {
    const auto grid = detail::initial_grid(0.0, w, cfg, absolute(breakpoints));
    const VecEstimate est = detail::adaptive_impl(vf, n, grid, cfg, true);
    if (!est.converged) throw_nonconvergence("l2_pair_moments", est);
    const auto lo = sample(w / 10.0), mid = sample(w / r10), hi = sample(w);
    for (std::size_t k = 0; k < pairs; ++k) {
      std::array<Complex, 3> v{};
      std::array<TailFit, 3> tails{};
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t i = 3 * k + c;
        tails[c] = fit_tail(lo[i], mid[i], hi[i], w);
        Complex half = est.value[i] + tails[c].correction;
        if (c > 0 || parity == Parity::hermitian) half = Complex(half.real(), 0.0);
        v[c] = 2.0 * half;
        tails[c].magnitude *= 2.0;
        tails[c].uncertainty *= 2.0;
      }
      out[k] = finish_pair(v, tails, {}, cfg);
      out[k].panels = est.panels;
      out[k].parity_used = true;
    }
    return out;
  }

  const auto grid = detail::initial_grid(-w, w, cfg, mirrored(breakpoints));
  const VecEstimate est = detail::adaptive_impl(vf, n, grid, cfg, true);
  if (!est.converged) throw_nonconvergence("l2_pair_moments", est);
  const auto lo_r = sample(w / 10.0), mid_r = sample(w / r10), hi_r = sample(w);
  const auto lo_l = sample(-w / 10.0), mid_l = sample(-w / r10), hi_l = sample(-w);
  for (std::size_t k = 0; k < pairs; ++k) {
    std::array<Complex, 3> v{};
    std::array<TailFit, 3> right{};
    std::array<TailFit, 3> left{};
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t i = 3 * k + c;
      right[c] = fit_tail(lo_r[i], mid_r[i], hi_r[i], w);
      left[c] = fit_tail(lo_l[i], mid_l[i], hi_l[i], w);
      v[c] = est.value[i] + right[c].correction + left[c].correction;
    }
    out[k] = finish_pair(v, right, left, cfg);
    out[k].panels = est.panels;
  }
  return out;
}

}  // namespace

std::vector<PairMoments> l2_pair_moments(const PairEval& eval, std::size_t pairs, Parity parity,
                                         std::span<const double> breakpoints,
                                         const QuadratureConfig& cfg) {
  cfg.validate();
  QuadratureConfig wide = cfg;
  for (int attempt = 0;; ++attempt) {
    try {
      return pair_moments_at(eval, pairs, parity, breakpoints, wide);
    } catch (const TailDominates&) {
      if (attempt == cfg.tail_widenings) throw;
    }
    wide.half_width *= 4.0;
  }
}

}  // namespace nonmark::quad
