#include "nonmark/oracle.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include <boost/numeric/odeint.hpp>

#include "nonmark/errors.hpp"

namespace nonmark::oracle {

namespace {

constexpr std::size_t kBlock = 1024;
constexpr double kRunaway = 1e6;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{splitmix64(seed), splitmix64(seed ^ (block * 0xd1b54a32d192ed03ULL + 1))};
  return std::mt19937_64(seq);
}

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + why);
}

// Running sums of q, q^2, p, p^2 at each sample index.
struct Sums {
  std::vector<double> q, q2, p, p2;
  explicit Sums(std::size_t n) : q(n), q2(n), p(n), p2(n) {}
};

struct Sample {
  std::size_t step;
  std::size_t slot;
};

void run_block(const LangevinConfig& cfg, std::size_t block, std::size_t count, std::size_t steps,
               std::span<const Sample> samples, Sums& out) {
  std::mt19937_64 rng = block_engine(cfg.seed, block);
  std::normal_distribution<double> normal;
  const double w2 = cfg.omega0 * cfg.omega0;
  const double sq = 1.0 / std::sqrt(cfg.beta * w2);
  const double sp = 1.0 / std::sqrt(cfg.beta);

  std::vector<double> q(count), p(count);
  for (std::size_t i = 0; i < count; ++i) {
    q[i] = sq * normal(rng) - cfg.a_p;
    p[i] = sp * normal(rng) + cfg.a_q + cfg.coupling * cfg.a_p;
  }

  const double h = cfg.dt;
  const double c = std::exp(-cfg.coupling * h);
  const double kick = sp * std::sqrt(-std::expm1(-2.0 * cfg.coupling * h));

  auto record = [&](std::size_t slot) {
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (std::size_t i = 0; i < count; ++i) {
      s1 += q[i];
      s2 += q[i] * q[i];
      s3 += p[i];
      s4 += p[i] * p[i];
    }
    out.q[slot] = s1;
    out.q2[slot] = s2;
    out.p[slot] = s3;
    out.p2[slot] = s4;
  };

  std::size_t next = 0;
  while (next < samples.size() && samples[next].step == 0) record(samples[next++].slot);
  for (std::size_t k = 1; k <= steps && next < samples.size(); ++k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      // B A O A B
      double pi = p[i] - 0.5 * h * w2 * q[i];
      double qi = q[i] + 0.5 * h * pi;
      pi = c * pi + kick * normal(rng);
      qi += 0.5 * h * pi;
      pi -= 0.5 * h * w2 * qi;
      q[i] = qi;
      p[i] = pi;
      worst = std::max({worst, std::abs(qi), std::abs(pi)});
    }
    if (!(worst < kRunaway)) {
      throw UnstableStep("langevin_means: trajectory left |x| < 1e6 at t = " + std::to_string(static_cast<double>(k) * h));
    }
    while (next < samples.size() && samples[next].step == k) record(samples[next++].slot);
  }
}

}  // namespace

void LangevinConfig::validate() const {
  require(std::isfinite(coupling) && coupling >= 0.0, "coupling", "must be finite and >= 0");
  require(std::isfinite(omega0) && omega0 > 0.0, "omega0", "must be positive");
  require(std::isfinite(beta) && beta > 0.0, "beta", "must be positive");
  require(std::isfinite(t_max) && t_max > 0.0, "t_max", "must be positive");
  require(std::isfinite(dt) && dt > 0.0 && dt <= 0.01 / std::max(omega0, coupling) * (1.0 + 1e-12), "dt",
          "must satisfy 0 < dt <= 0.01 / max(omega0, D)");
  require(n_traj >= 1000, "n_traj", "must be at least 1000");
  require(std::isfinite(a_q) && std::isfinite(a_p), "kick", "must be finite");
}

LangevinSeries langevin_means(const LangevinConfig& cfg, std::span<const double> times) {
  cfg.validate();
  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_max / cfg.dt));
  std::vector<Sample> samples;
  samples.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(times[i] >= 0.0 && times[i] <= cfg.t_max * (1.0 + 1e-12), "times", "must lie in [0, t_max]");
    samples.push_back({static_cast<std::size_t>(std::llround(times[i] / cfg.dt)), i});
  }
  std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.step < b.step; });

  const std::size_t blocks = (cfg.n_traj + kBlock - 1) / kBlock;
  std::vector<Sums> partial(blocks, Sums(times.size()));
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t b; !failed && (b = cursor.fetch_add(1)) < blocks;) {
      const std::size_t count = std::min(kBlock, cfg.n_traj - b * kBlock);
      try {
        run_block(cfg, b, count, steps, samples, partial[b]);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  unsigned n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, blocks));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  // Fixed block order keeps the reduction independent of scheduling.
  Sums total(times.size());
  for (const Sums& s : partial) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      total.q[k] += s.q[k];
      total.q2[k] += s.q2[k];
      total.p[k] += s.p[k];
      total.p2[k] += s.p2[k];
    }
  }
  const double n = static_cast<double>(cfg.n_traj);
  auto stderr_of = [n](double sum, double sum2) {
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0)) / n);
  };
  LangevinSeries out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    out.t.push_back(times[k]);
    out.q_mean.push_back(total.q[k] / n);
    out.p_mean.push_back(total.p[k] / n);
    out.q_stderr.push_back(stderr_of(total.q[k], total.q2[k]));
    out.p_stderr.push_back(stderr_of(total.p[k], total.p2[k]));
  }
  return out;
}

std::vector<double> noise_impulses(double coupling, double beta, double dt, std::size_t count, std::uint64_t seed) {
  require(coupling >= 0.0 && beta > 0.0 && dt > 0.0, "noise_impulses", "needs D >= 0, beta > 0, dt > 0");
  std::mt19937_64 rng = block_engine(seed, 0);
  std::normal_distribution<double> normal;
  const double scale = std::sqrt(2.0 * coupling * dt / beta);
  std::vector<double> out(count);
  for (double& x : out) x = scale * normal(rng);
  return out;
}

// ---------------------------------------------------------------------------
// Pseudo-mode embedding. State (q, p, x, y) plus, optionally, a running integral of q.

void Embedding::validate() const {
  require(std::isfinite(coupling) && coupling >= 0.0, "coupling", "must be finite and >= 0");
  require(std::isfinite(width) && width > 0.0, "width", "must be positive");
  require(std::isfinite(peak) && peak > 0.0, "peak", "must be positive");
  require(std::isfinite(omega0) && omega0 > 0.0, "omega0", "must be positive");
}

namespace {

using namespace boost::numeric::odeint;

constexpr double kOdeTol = 1e-10;

template <std::size_t N>
struct Generator {
  const Embedding& e;
  void operator()(const std::array<double, N>& s, std::array<double, N>& ds, double) const {
    const double d = e.coupling, o2 = e.peak * e.peak;
    ds[0] = s[1];
    ds[1] = -(e.omega0 * e.omega0 + d * d / o2) * s[0] + d * s[2];
    ds[2] = s[3];
    ds[3] = -o2 * s[2] + d * s[0] - e.width * s[3];
    if constexpr (N == 5) ds[4] = s[0];
  }
};

// (q, p) at each time, starting from (q0, p0) with the pseudo-mode at rest.
std::vector<std::array<double, 2>> trajectory(const Embedding& e, double q0, double p0, std::span<const double> times) {
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  std::vector<double> grid{0.0};
  for (std::size_t i : order) {
    if (times[i] > 0.0 && times[i] != grid.back()) grid.push_back(times[i]);
  }
  std::vector<std::array<double, 2>> at_grid;
  at_grid.reserve(grid.size());
  std::array<double, 4> state{q0, p0, 0.0, 0.0};
  if (grid.size() == 1) {
    at_grid.push_back({q0, p0});
  } else {
    try {
      auto stepper = make_controlled(kOdeTol, kOdeTol, runge_kutta_dopri5<std::array<double, 4>>());
      integrate_times(stepper, Generator<4>{e}, state, grid.begin(), grid.end(), 1e-3,
                      [&](const std::array<double, 4>& s, double) { at_grid.push_back({s[0], s[1]}); });
    } catch (const std::exception& ex) {
      throw NonConvergence(std::string("embedding: ODE step failure: ") + ex.what(), {}, kOdeTol);
    }
  }
  std::vector<std::array<double, 2>> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0) continue;
    const auto pos = std::lower_bound(grid.begin(), grid.end(), times[i]) - grid.begin();
    out[i] = at_grid[static_cast<std::size_t>(pos)];
    if (!std::isfinite(out[i][0]) || !std::isfinite(out[i][1])) throw NonFinite("embedding: non-finite state", times[i]);
  }
  return out;
}

}  // namespace

std::vector<double> embedding_response(const Embedding& e, std::span<const double> times) {
  e.validate();
  const auto traj = trajectory(e, 0.0, 1.0, times);
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = traj[i][0];
  return out;
}

double embedding_response(const Embedding& e, double t) { return embedding_response(e, std::span(&t, 1)).front(); }

std::vector<RealMatrix2> embedding_chi(const Embedding& e, std::span<const double> times) {
  e.validate();
  // A unit a_q kick raises p; a unit a_p kick lowers q.
  const auto from_q = trajectory(e, 0.0, 1.0, times);
  const auto from_p = trajectory(e, -1.0, 0.0, times);
  std::vector<RealMatrix2> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0) continue;
    out[i] = RealMatrix2::from(from_q[i][0], from_p[i][0], from_q[i][1], from_p[i][1]);
  }
  return out;
}

std::complex<double> embedding_transform(const Embedding& e, double w) {
  e.validate();
  using C = std::complex<double>;
  const double d = e.coupling, o2 = e.peak * e.peak;
  const C iw(0.0, w);
  // (A + i w) x = -x0 with x0 = (0, 1, 0, 0).
  std::array<std::array<C, 5>, 4> a{{
      {iw, 1.0, 0.0, 0.0, 0.0},
      {-(e.omega0 * e.omega0 + d * d / o2), iw, d, 0.0, -1.0},
      {0.0, 0.0, iw, 1.0, 0.0},
      {d, 0.0, -o2, -e.width + iw, 0.0},
  }};
  for (std::size_t col = 0; col < 4; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 4; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) == 0.0) throw DivisionNearZero("embedding_transform: singular generator");
    std::swap(a[col], a[piv]);
    for (std::size_t r = col + 1; r < 4; ++r) {
      const C f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < 5; ++k) a[r][k] -= f * a[col][k];
    }
  }
  std::array<C, 4> x{};
  for (std::size_t r = 4; r-- > 0;) {
    C s = a[r][4];
    for (std::size_t k = r + 1; k < 4; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x[0];
}

double embedding_static_integral(const Embedding& e) {
  e.validate();
  std::array<double, 5> state{0.0, 1.0, 0.0, 0.0, 0.0};
  const double chunk = 10.0 / e.omega0;
  double t = 0.0;
  try {
    auto stepper = make_controlled(kOdeTol * 1e-2, kOdeTol * 1e-2, runge_kutta_dopri5<std::array<double, 5>>());
    for (int i = 0; i < 100000; ++i) {
      integrate_adaptive(stepper, Generator<5>{e}, state, t, t + chunk, 1e-3);
      t += chunk;
      const double size = std::abs(state[0]) + std::abs(state[1]) + std::abs(state[2]) + std::abs(state[3]);
      if (size < 1e-9) return state[4];  // the remaining tail is ~ size / decay rate
    }
  } catch (const std::exception& ex) {
    throw NonConvergence(std::string("embedding_static_integral: ODE step failure: ") + ex.what(), state[4], kOdeTol);
  }
  throw NonConvergence("embedding_static_integral: state did not decay", state[4], std::abs(state[0]));
}

}  // namespace nonmark::oracle
