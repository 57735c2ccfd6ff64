#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonmark/quadrature.hpp"
#include "nonmark/response.hpp"

namespace nonmark::cli {

enum class Mode { quantify, sweep, means, oracle_check };
enum class Quantifier { n1, n2, both };
enum class DensityKind { ohmic, peaked, tabulated };
enum class SweepParam { coupling, width, peak, beta, hbar };

/// start:stop:steps[:log]
struct Range {
  double start = 0.0;
  double stop = 0.0;
  int steps = 2;
  bool log = false;

  static Range parse(const std::string& text);
  std::vector<double> grid() const;
};

/// Everything one invocation needs. omega0 is the unit of frequency.
struct RunConfig {
  Mode mode = Mode::quantify;
  DensityKind density = DensityKind::ohmic;
  std::string table_path;
  double coupling = 0.2;
  double width = 0.05;
  double peak = 1.0;
  double beta = 1.0;
  double hbar = 1.0;
  double cutoff = 1000.0;
  std::optional<SweepParam> param;
  std::optional<Range> range;
  Quantifier quantifier = Quantifier::both;
  double a_q = 1.0;
  double a_p = 1.0;
  std::uint64_t seed = 1;
  double t_max = 20.0;
  int t_steps = 201;
  std::size_t n_traj = 100000;
  unsigned threads = 0;  // 0: hardware concurrency
  bool corrupt_kernel = false;
  quad::QuadratureConfig quadrature;
  std::string out;  // empty: CSV to stdout, no plot script

  /// Cross-field checks. Throws ConfigError.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct HelpRequested {
  std::string text;
};

/// Flags override keys of the `--config` file (`key = value`, '#' comments).
RunConfig parse(int argc, const char* const* argv);

const char* param_name(SweepParam p);
double param_value(const RunConfig& cfg, SweepParam p);
RunConfig with_param(RunConfig cfg, SweepParam p, double value);
Model make_model(const RunConfig& cfg);

enum ExitCode : int { ok = 0, config_error = 2, numerical_failure = 3, oracle_mismatch = 4 };

/// Runs one configured job; CSV goes to cfg.out (or `out`), messages to `log`.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// parse + run with exit-code mapping.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

}  // namespace nonmark::cli
