#pragma once

// Configuration loading (JSON with flat dotted keys, overridable per key),
// experiment dispatch, and artifact emission for the command-line front end.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tolreg/experiments.hpp"
#include "tolreg/io.hpp"

namespace tolreg {

// Invalid configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error("field '" + field + "': " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  // problem
  Index n = 600;
  double a = 0, b = 1;
  std::string operator_name = "integration";
  // penalty
  double q = 2;
  double eps = 0.3;
  std::string eps_file;  // nonempty: per-sample profile from a signal CSV
  std::string reference = "sin2pi";
  // noise and randomness
  double delta = 0.001;
  std::uint64_t seed = 1;
  // tube sampling
  double tube_eps = -1;  // negative: follow penalty.eps
  double tube_sigma = 0.08;
  // solver
  Index max_iters = 200000;
  double t0 = 0;  // 0: automatic
  double shrink = 0.5;
  Index patience = 50;
  Index window = 100;
  double tol = 1e-10;
  double certificate_tol = 1e-3;
  double p = 2;
  bool scaling = true;
  // solve
  double alpha = 0.001;
  // sweep-eps
  std::vector<double> sweep_eps = {0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
  Index sweep_runs = 50;
  double sweep_alpha = 0.001;
  // alpha grid (lcurve, morozov)
  double alpha_lo = 1e-12, alpha_hi = 1;
  Index alpha_count = 40;
  // morozov
  double tau = 2;
  double morozov_delta = 0;  // 0: use noise.delta
  std::string protocol = "transfer";
  // rates
  double rates_delta0 = 0.05;
  Index rates_levels = 7;
  double rates_c = 0.1;
  // fourier
  double fourier_eps = 0.75;
  Index fourier_terms = 20;
  Index fourier_samples = 262144;
  // run
  int workers = 1;
  std::string out_dir;  // empty: $TOLREG_OUT_DIR, else "out"
};

struct ConfigKey {
  std::string name;  // flat dotted key, e.g. "penalty.q"
  std::function<void(RunConfig&, const nlohmann::json&)> set;
  std::function<nlohmann::json(const RunConfig&)> get;
};

const std::vector<ConfigKey>& config_keys();

// Applies a flat JSON object onto the config; unknown keys are errors.
void load_config(RunConfig& config, const nlohmann::json& flat);

// One `key` set from a raw command-line value (JSON literal or bare string).
void apply_override(RunConfig& config, const std::string& key,
                    const std::string& raw_value);

// The full effective configuration as a flat JSON object.
nlohmann::json effective_config(const RunConfig& config);

void validate(const RunConfig& config);

// name is one of: sin2pi | zero | const:<c> | file:<path>
Signal<double> builtin_reference(const std::string& name, const Grid<double>& grid);

// Known command names, in dispatch order.
const std::vector<std::string>& command_names();

// Executes a command; writes CSV artifacts plus a JSON manifest into the
// output directory and prints a one-line summary.  Returns the process exit
// status (0 success, 3 when Morozov finds no feasible alpha).
int run_command(const std::string& command, const RunConfig& config);

}  // namespace tolreg
