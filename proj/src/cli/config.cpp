#include <cmath>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "nonmark/cli.hpp"

namespace nonmark::cli {

namespace {

template <class E>
E lookup(const std::map<std::string, E>& table, const std::string& key, const std::string& text) {
  const auto it = table.find(text);
  if (it == table.end()) throw ConfigError(key, "unknown value '" + text + "'");
  return it->second;
}

double number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) throw ConfigError(key, "'" + text + "' is not a finite number");
  return v;
}

}  // namespace

Range Range::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3 && parts.size() != 4) throw ConfigError("range", "expected start:stop:steps[:log]");
  Range r;
  r.start = number("range", parts[0]);
  r.stop = number("range", parts[1]);
  const double steps = number("range", parts[2]);
  if (steps != std::floor(steps) || steps < 2 || steps > 1e6) throw ConfigError("range", "steps must be an integer >= 2");
  r.steps = static_cast<int>(steps);
  if (parts.size() == 4) {
    if (parts[3] != "log" && parts[3] != "lin") throw ConfigError("range", "fourth field must be 'log' or 'lin'");
    r.log = parts[3] == "log";
  }
  if (r.log && (r.start <= 0.0 || r.stop <= 0.0)) throw ConfigError("range", "log spacing needs positive endpoints");
  return r;
}

std::vector<double> Range::grid() const {
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double f = static_cast<double>(i) / (steps - 1);
    out[i] = log ? start * std::pow(stop / start, f) : start + (stop - start) * f;
  }
  out.back() = stop;
  return out;
}

const char* param_name(SweepParam p) {
  switch (p) {
    case SweepParam::coupling: return "D";
    case SweepParam::width: return "gamma";
    case SweepParam::peak: return "omega_big";
    case SweepParam::beta: return "beta";
    case SweepParam::hbar: return "hbar";
  }
  return "?";
}

double param_value(const RunConfig& cfg, SweepParam p) {
  switch (p) {
    case SweepParam::coupling: return cfg.coupling;
    case SweepParam::width: return cfg.width;
    case SweepParam::peak: return cfg.peak;
    case SweepParam::beta: return cfg.beta;
    case SweepParam::hbar: return cfg.hbar;
  }
  return 0.0;
}

RunConfig with_param(RunConfig cfg, SweepParam p, double value) {
  switch (p) {
    case SweepParam::coupling: cfg.coupling = value; break;
    case SweepParam::width: cfg.width = value; break;
    case SweepParam::peak: cfg.peak = value; break;
    case SweepParam::beta: cfg.beta = value; break;
    case SweepParam::hbar: cfg.hbar = value; break;
  }
  return cfg;
}

void RunConfig::validate() const {
  if (coupling < 0.0) throw ConfigError("d", "must be >= 0");
  if (width <= 0.0) throw ConfigError("gamma", "must be positive");
  if (peak <= 0.0) throw ConfigError("omega-big", "must be positive");
  if (beta <= 0.0) throw ConfigError("beta", "must be positive");
  if (hbar < 0.0) throw ConfigError("hbar", "must be >= 0");
  if (cutoff <= 0.0) throw ConfigError("cutoff", "must be positive");
  if (t_max <= 0.0) throw ConfigError("t-max", "must be positive");
  if (t_steps < 2) throw ConfigError("t-steps", "must be >= 2");
  if (n_traj < 1000) throw ConfigError("n-traj", "must be >= 1000");
  if (density == DensityKind::tabulated && table_path.empty()) throw ConfigError("sd", "tabulated needs a path");
  try {
    quadrature.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("quadrature", e.what());
  }
  if (mode == Mode::sweep) {
    if (!param) throw ConfigError("param", "sweep mode needs a swept parameter");
    if (!range) throw ConfigError("range", "sweep mode needs a range");
    const bool peaked_only = *param == SweepParam::width || *param == SweepParam::peak;
    if (peaked_only && density != DensityKind::peaked) throw ConfigError("param", "only the peaked density has this parameter");
    if (*param == SweepParam::coupling && density == DensityKind::tabulated) {
      throw ConfigError("param", "a tabulated density has no coupling parameter");
    }
    for (double v : range->grid()) {
      const bool positive = *param != SweepParam::coupling && *param != SweepParam::hbar;
      if (positive ? v <= 0.0 : v < 0.0) throw ConfigError("range", std::string("values out of domain for ") + param_name(*param));
    }
  }
  if (mode == Mode::oracle_check && density == DensityKind::tabulated) {
    throw ConfigError("sd", "oracle checks exist for ohmic and peaked only");
  }
}

RunConfig parse(int argc, const char* const* argv) {
  RunConfig cfg;
  std::string mode = "quantify", sd = "ohmic", quantifier = "both", param, range;
  CLI::App app{"Response-function non-Markovianity quantifiers for a damped oscillator"};
  app.set_config("--config", "", "key = value file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--mode", mode, "quantify | sweep | means | oracle-check");
  app.add_option("--sd", sd, "ohmic | peaked | tabulated:<path>");
  app.add_option("--d", cfg.coupling, "coupling D");
  app.add_option("--gamma", cfg.width, "peak width");
  app.add_option("--omega-big", cfg.peak, "peak frequency");
  app.add_option("--beta", cfg.beta, "inverse temperature");
  app.add_option("--hbar", cfg.hbar, "0 selects the classical limit");
  app.add_option("--cutoff", cfg.cutoff, "UV cutoff of the quantum covariances");
  app.add_option("--param", param, "swept parameter: D | gamma | omega-big | beta | hbar");
  app.add_option("--range", range, "start:stop:steps[:log]");
  app.add_option("--quantifier", quantifier, "n1 | n2 | both");
  app.add_option("--aq", cfg.a_q, "kick strength coupling to q");
  app.add_option("--ap", cfg.a_p, "kick strength coupling to p");
  app.add_option("--seed", cfg.seed, "Monte Carlo seed");
  app.add_option("--t-max", cfg.t_max, "end of the time grid");
  app.add_option("--t-steps", cfg.t_steps, "points on the time grid");
  app.add_option("--n-traj", cfg.n_traj, "Langevin trajectories");
  app.add_option("--threads", cfg.threads, "worker threads, 0 = all cores");
  app.add_option("--half-width", cfg.quadrature.half_width, "frequency window of the line integrals");
  app.add_option("--rel-tol", cfg.quadrature.rel_tol, "relative quadrature tolerance");
  app.add_option("--tail-tol", cfg.quadrature.tail_tol, "accepted tail-model uncertainty");
  app.add_flag("--corrupt-kernel", cfg.corrupt_kernel, "test hook: flip the sign of Im gamma");
  app.add_option("--out", cfg.out, "CSV path; a .gp plot script is written next to it");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.get_name(), e.what());
  }

  cfg.mode = lookup<Mode>({{"quantify", Mode::quantify}, {"sweep", Mode::sweep}, {"means", Mode::means},
                           {"oracle-check", Mode::oracle_check}},
                          "mode", mode);
  if (sd.rfind("tabulated:", 0) == 0) {
    cfg.density = DensityKind::tabulated;
    cfg.table_path = sd.substr(10);
  } else {
    cfg.density = lookup<DensityKind>({{"ohmic", DensityKind::ohmic}, {"peaked", DensityKind::peaked}}, "sd", sd);
  }
  cfg.quantifier = lookup<Quantifier>({{"n1", Quantifier::n1}, {"n2", Quantifier::n2}, {"both", Quantifier::both}},
                                      "quantifier", quantifier);
  if (!param.empty()) {
    cfg.param = lookup<SweepParam>({{"D", SweepParam::coupling},
                                    {"d", SweepParam::coupling},
                                    {"gamma", SweepParam::width},
                                    {"omega-big", SweepParam::peak},
                                    {"omega_big", SweepParam::peak},
                                    {"beta", SweepParam::beta},
                                    {"hbar", SweepParam::hbar}},
                                   "param", param);
  }
  if (!range.empty()) cfg.range = Range::parse(range);
  cfg.validate();
  return cfg;
}

}  // namespace nonmark::cli
