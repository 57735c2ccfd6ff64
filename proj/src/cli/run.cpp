#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "nonmark/cli.hpp"
#include "nonmark/errors.hpp"
#include "nonmark/oracle.hpp"
#include "nonmark/quantifiers.hpp"

namespace nonmark::cli {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

// Owns the output stream: the file named in cfg.out, or the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw ConfigError("out", "cannot open '" + path + "' for writing");
    out_ = &file_;
  }
  std::ostream& operator*() { return *out_; }
  void row(const std::string& line) { *out_ << line << '\n' << std::flush; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

void write_plot_script(const std::string& csv, const std::string& xlabel, bool logx, int first, int last) {
  if (csv.empty()) return;
  std::filesystem::path script(csv);
  script.replace_extension(".gp");
  std::ofstream gp(script);
  if (!gp) throw ConfigError("out", "cannot write plot script " + script.string());
  const std::string name = std::filesystem::path(csv).filename().string();
  gp << "# gnuplot " << script.filename().string() << "\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel '" << xlabel << "'\n";
  if (logx) gp << "set logscale x\n";
  gp << "plot";
  for (int c = first; c <= last; ++c) gp << (c == first ? " '" + name + "'" : ", ''") << " using 1:" << c << " with linespoints";
  gp << "\n";
}

struct Row {
  QuantifierReport report;
  std::string error;  // empty on success
};

Row evaluate(const RunConfig& cfg) {
  Row row;
  const char* stage = "model";
  try {
    const Model m = make_model(cfg);
    if (cfg.quantifier != Quantifier::n2) {
      stage = "n1";
      row.report = quantify(m, true, false);
    }
    if (cfg.quantifier != Quantifier::n1) {
      stage = "n2";
      const QuantifierReport second = quantify(m, false, true);
      row.report.n2 = second.n2;
      row.report.n2_diagnostics = second.n2_diagnostics;
      row.report.covariance = second.covariance;
      row.report.has_n2 = true;
    }
  } catch (const std::exception& e) {
    row.error = std::string(stage) + ": " + e.what();
  }
  return row;
}

double max_tail(const Matrix2<EntryDiagnostics>& d) {
  double t = 0.0;
  for (const auto& e : d.m) t = std::max(t, e.tail);
  return t;
}

std::string format_row(double x, const Row& row) {
  std::string line = fmt(x);
  const auto& r = row.report;
  const bool ok = row.error.empty();
  auto entries = [&](bool has, const RealMatrix2& v) {
    for (double e : {v.qq(), v.qp(), v.pp()}) line += "," + (ok && has ? fmt(e) : std::string());
  };
  entries(r.has_n1, r.n1);
  entries(r.has_n2, r.n2);
  line += "," + (ok && r.has_n1 ? fmt(max_tail(r.n1_diagnostics)) : std::string());
  line += "," + (ok && r.has_n2 ? fmt(max_tail(r.n2_diagnostics)) : std::string());
  line += "," + (ok && r.has_n2 ? fmt(r.covariance.cutoff_change) : std::string());
  line += "," + (ok && r.has_n2 ? std::string(r.covariance.cutoff_sensitive ? "1" : "0") : std::string());
  line += "," + csv_safe(row.error);
  return line;
}

int run_grid(const RunConfig& cfg, SweepParam param, const std::vector<double>& grid, std::ostream& out,
             std::ostream& log) {
  Sink sink(cfg.out, out);
  sink.row(std::string(param_name(param)) +
           ",n1_qq,n1_qp,n1_pp,n2_qq,n2_qp,n2_pp,n1_max_tail,n2_max_tail,cutoff_change,cutoff_sensitive,error");

  std::vector<std::optional<Row>> rows(grid.size());
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t i; (i = cursor.fetch_add(1)) < grid.size();) {
      Row r = evaluate(with_param(cfg, param, grid[i]));
      std::lock_guard lock(mu);
      rows[i] = std::move(r);
      ready.notify_all();
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto n = static_cast<unsigned>(std::min<std::size_t>(cfg.threads ? cfg.threads : hw, grid.size()));
  std::vector<std::jthread> pool;
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);

  int failures = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::unique_lock lock(mu);
    ready.wait(lock, [&] { return rows[i].has_value(); });
    const Row row = std::move(*rows[i]);
    lock.unlock();
    sink.row(format_row(grid[i], row));
    if (!row.error.empty()) {
      ++failures;
      log << "numerical failure at grid point " << i << " (" << param_name(param) << " = " << fmt(grid[i])
          << "): " << row.error << "\n";
    }
  }
  write_plot_script(cfg.out, param_name(param), cfg.range && cfg.range->log,
                    cfg.quantifier == Quantifier::n2 ? 5 : 2, cfg.quantifier == Quantifier::n1 ? 4 : 7);
  return failures ? numerical_failure : ok;
}

int run_means(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const auto times = linspace(0.0, cfg.t_max, cfg.t_steps);
  std::vector<Means> means;
  try {
    means = propagate_means(make_model(cfg), cfg.a_q, cfg.a_p, times);
  } catch (const NumericalError& e) {
    log << "numerical failure in means: " << e.what() << "\n";
    return numerical_failure;
  }
  Sink sink(cfg.out, out);
  sink.row("t,q_mean,p_mean");
  for (std::size_t i = 0; i < times.size(); ++i) sink.row(fmt(times[i]) + "," + fmt(means[i].q) + "," + fmt(means[i].p));
  write_plot_script(cfg.out, "t", false, 2, 3);
  return ok;
}

struct Check {
  std::string name;
  double worst = 0.0;
  double tolerance = 0.0;
  std::string where;
  bool pass() const { return worst <= tolerance; }
};

Check langevin_check(const RunConfig& cfg, const Model& m) {
  oracle::LangevinConfig lc;
  lc.coupling = cfg.coupling;
  lc.beta = cfg.beta;
  lc.dt = std::min(0.005, 0.01 / std::max(1.0, cfg.coupling));
  lc.t_max = cfg.t_max;
  lc.n_traj = cfg.n_traj;
  lc.seed = cfg.seed;
  lc.a_q = cfg.a_q;
  lc.a_p = cfg.a_p;
  lc.threads = cfg.threads;
  const auto times = linspace(0.0, cfg.t_max, 20);
  const oracle::LangevinSeries s = oracle::langevin_means(lc, times);
  const auto expected = propagate_means(m, cfg.a_q, cfg.a_p, times);
  Check c{"langevin vs propagate_means, |dev| / stderr", 0.0, 3.0, ""};
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (auto [dev, se, label] : {std::tuple{s.q_mean[i] - expected[i].q, s.q_stderr[i], "q"},
                                  std::tuple{s.p_mean[i] - expected[i].p, s.p_stderr[i], "p"}}) {
      const double z = std::abs(dev) / std::max(se, 1e-300);
      if (z > c.worst) {
        c.worst = z;
        c.where = std::string(label) + " at t = " + fmt(times[i]);
      }
    }
  }
  return c;
}

std::vector<Check> embedding_checks(const RunConfig& cfg, const Model& m) {
  const oracle::Embedding e{cfg.coupling, cfg.width, cfg.peak, 1.0};
  const auto times = linspace(0.0, 50.0, 101);
  const auto chi = oracle::embedding_chi(e, times);
  Check time{"embedding vs chi_time, max abs deviation", 0.0, 1e-3, ""};
  for (std::size_t i = 0; i < times.size(); ++i) {
    const RealMatrix2 ref = chi_time(m, times[i]);
    for (int k = 0; k < 4; ++k) {
      const double dev = std::abs(chi[i].m[k] - ref.m[k]);
      if (dev > time.worst) {
        time.worst = dev;
        time.where = "t = " + fmt(times[i]);
      }
    }
  }
  Check freq{"embedding transform vs chi_qq, max rel deviation", 0.0, 1e-3, ""};
  for (double w : linspace(-6.0, 6.0, 50)) {
    const Complex ref = chi_qq(m, w);
    const double dev = std::abs(oracle::embedding_transform(e, w) - ref) / std::abs(ref);
    if (dev > freq.worst) {
      freq.worst = dev;
      freq.where = "w = " + fmt(w);
    }
  }
  return {time, freq};
}

int run_oracle_check(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  std::vector<Check> checks;
  try {
    const Model m = make_model(cfg);
    if (cfg.density == DensityKind::ohmic) {
      checks.push_back(langevin_check(cfg, m));
    } else {
      checks = embedding_checks(cfg, m);
    }
  } catch (const NumericalError& e) {
    log << "numerical failure in oracle check: " << e.what() << "\n";
    return numerical_failure;
  }
  bool all = true;
  for (const Check& c : checks) {
    out << (c.pass() ? "PASS " : "FAIL ") << c.name << " = " << fmt(c.worst) << " (tolerance " << fmt(c.tolerance)
        << ", worst " << c.where << ")\n";
    all = all && c.pass();
  }
  return all ? ok : oracle_mismatch;
}

}  // namespace

Model make_model(const RunConfig& cfg) {
  ModelParams p;
  p.beta = cfg.beta;
  p.hbar = cfg.hbar;
  p.cutoff = cfg.cutoff;
  spectral::SpectralDensity sd = spectral::Ohmic{cfg.coupling};
  switch (cfg.density) {
    case DensityKind::ohmic: break;
    case DensityKind::peaked: sd = spectral::Peaked{cfg.coupling, cfg.width, cfg.peak}; break;
    case DensityKind::tabulated:
      try {
        sd = spectral::Tabulated::from_file(cfg.table_path);
      } catch (const std::exception& e) {
        throw ConfigError("sd", e.what());
      }
      break;
  }
  MemoryKernel kernel(sd);
  if (cfg.corrupt_kernel) kernel = kernel.with_flipped_imaginary();
  return Model(p, kernel, cfg.quadrature);
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  try {
    cfg.validate();
    const Model probe = make_model(cfg);
    for (const std::string& w : probe.params().warnings()) log << "warning: " << w << "\n";
    switch (cfg.mode) {
      case Mode::quantify: {
        const SweepParam p = cfg.param.value_or(SweepParam::coupling);
        return run_grid(cfg, p, {param_value(cfg, p)}, out, log);
      }
      case Mode::sweep: return run_grid(cfg, *cfg.param, cfg.range->grid(), out, log);
      case Mode::means: return run_means(cfg, out, log);
      case Mode::oracle_check: return run_oracle_check(cfg, out, log);
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << "\n";
    return config_error;
  }
  return ok;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = parse(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return ok;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return config_error;
  }
  return run(cfg, out, log);
}

}  // namespace nonmark::cli
