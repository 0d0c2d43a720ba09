#include "tolreg/cli.hpp"

#include <cstdlib>
#include <iostream>

namespace tolreg {

namespace {

using nlohmann::json;

double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

Index as_count(const std::string& key, const json& v) {
  if (!v.is_number_integer() ||
      (v.is_number_integer() && v.get<std::int64_t>() < 0))
    throw ConfigError(key, "expected a nonnegative integer");
  return Index(v.get<std::int64_t>());
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) throw ConfigError(key, "expected a boolean");
  return v.get<bool>();
}

std::vector<double> as_number_array(const std::string& key, const json& v) {
  if (!v.is_array()) throw ConfigError(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(key, e));
  return out;
}

std::vector<ConfigKey> build_keys() {
  std::vector<ConfigKey> keys;
  const auto num = [&](const char* name, double RunConfig::* field) {
    keys.push_back({name,
                    [name, field](RunConfig& c, const json& v) {
                      c.*field = as_number(name, v);
                    },
                    [field](const RunConfig& c) { return json(c.*field); }});
  };
  const auto count = [&](const char* name, Index RunConfig::* field) {
    keys.push_back({name,
                    [name, field](RunConfig& c, const json& v) {
                      c.*field = as_count(name, v);
                    },
                    [field](const RunConfig& c) { return json(c.*field); }});
  };
  const auto str = [&](const char* name, std::string RunConfig::* field) {
    keys.push_back({name,
                    [name, field](RunConfig& c, const json& v) {
                      c.*field = as_string(name, v);
                    },
                    [field](const RunConfig& c) { return json(c.*field); }});
  };

  count("problem.n", &RunConfig::n);
  num("problem.a", &RunConfig::a);
  num("problem.b", &RunConfig::b);
  str("problem.operator", &RunConfig::operator_name);
  num("penalty.q", &RunConfig::q);
  num("penalty.eps", &RunConfig::eps);
  str("penalty.eps_file", &RunConfig::eps_file);
  str("penalty.reference", &RunConfig::reference);
  num("noise.delta", &RunConfig::delta);
  keys.push_back({"seed",
                  [](RunConfig& c, const json& v) {
                    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
                      throw ConfigError("seed", "expected a nonnegative integer");
                    c.seed = v.get<std::uint64_t>();
                  },
                  [](const RunConfig& c) { return json(c.seed); }});
  num("tube.eps", &RunConfig::tube_eps);
  num("tube.sigma", &RunConfig::tube_sigma);
  count("solver.max_iters", &RunConfig::max_iters);
  num("solver.t0", &RunConfig::t0);
  num("solver.shrink", &RunConfig::shrink);
  count("solver.patience", &RunConfig::patience);
  count("solver.window", &RunConfig::window);
  num("solver.tol", &RunConfig::tol);
  num("solver.certificate_tol", &RunConfig::certificate_tol);
  num("solver.p", &RunConfig::p);
  keys.push_back({"solver.scaling",
                  [](RunConfig& c, const json& v) {
                    c.scaling = as_bool("solver.scaling", v);
                  },
                  [](const RunConfig& c) { return json(c.scaling); }});
  num("solve.alpha", &RunConfig::alpha);
  keys.push_back({"sweep.eps_values",
                  [](RunConfig& c, const json& v) {
                    c.sweep_eps = as_number_array("sweep.eps_values", v);
                  },
                  [](const RunConfig& c) { return json(c.sweep_eps); }});
  count("sweep.runs", &RunConfig::sweep_runs);
  num("sweep.alpha", &RunConfig::sweep_alpha);
  num("alpha_grid.lo", &RunConfig::alpha_lo);
  num("alpha_grid.hi", &RunConfig::alpha_hi);
  count("alpha_grid.count", &RunConfig::alpha_count);
  num("morozov.tau", &RunConfig::tau);
  num("morozov.delta", &RunConfig::morozov_delta);
  str("morozov.protocol", &RunConfig::protocol);
  num("rates.delta0", &RunConfig::rates_delta0);
  count("rates.levels", &RunConfig::rates_levels);
  num("rates.c", &RunConfig::rates_c);
  num("fourier.eps", &RunConfig::fourier_eps);
  count("fourier.terms", &RunConfig::fourier_terms);
  count("fourier.samples", &RunConfig::fourier_samples);
  keys.push_back({"workers",
                  [](RunConfig& c, const json& v) {
                    const Index w = as_count("workers", v);
                    if (w < 1) throw ConfigError("workers", "must be at least 1");
                    c.workers = int(w);
                  },
                  [](const RunConfig& c) { return json(c.workers); }});
  str("output.dir", &RunConfig::out_dir);
  return keys;
}

const ConfigKey* find_key(const std::string& name) {
  for (const auto& k : config_keys())
    if (k.name == name) return &k;
  return nullptr;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

void load_config(RunConfig& config, const json& flat) {
  if (!flat.is_object())
    throw ConfigError("(root)", "config must be a JSON object of flat dotted keys");
  for (const auto& [name, value] : flat.items()) {
    const ConfigKey* key = find_key(name);
    if (!key) throw ConfigError(name, "unknown config key");
    key->set(config, value);
  }
}

void apply_override(RunConfig& config, const std::string& name,
                    const std::string& raw_value) {
  const ConfigKey* key = find_key(name);
  if (!key) throw ConfigError(name, "unknown config key");
  json value;
  try {
    value = json::parse(raw_value);
  } catch (const json::parse_error&) {
    value = raw_value;  // bare words are strings
  }
  key->set(config, value);
}

json effective_config(const RunConfig& config) {
  json flat = json::object();
  for (const auto& k : config_keys()) flat[k.name] = k.get(config);
  return flat;
}

void validate(const RunConfig& c) {
  if (c.n < 1) throw ConfigError("problem.n", "must be at least 1");
  if (!(c.a < c.b)) throw ConfigError("problem.a", "need problem.a < problem.b");
  if (c.operator_name != "integration")
    throw ConfigError("problem.operator", "unknown operator '" + c.operator_name + "'");
  if (!(c.q >= 1 && c.q <= 2)) throw ConfigError("penalty.q", "must lie in [1, 2]");
  if (!(c.eps >= 0)) throw ConfigError("penalty.eps", "must be >= 0");
  if (!c.eps_file.empty() && !std::filesystem::exists(c.eps_file))
    throw ConfigError("penalty.eps_file", "file does not exist: " + c.eps_file);
  if (c.reference.rfind("file:", 0) == 0 &&
      !std::filesystem::exists(c.reference.substr(5)))
    throw ConfigError("penalty.reference",
                      "file does not exist: " + c.reference.substr(5));
  if (c.reference != "sin2pi" && c.reference != "zero" &&
      c.reference.rfind("const:", 0) != 0 && c.reference.rfind("file:", 0) != 0)
    throw ConfigError("penalty.reference", "unknown reference '" + c.reference + "'");
  if (!(c.delta > 0)) throw ConfigError("noise.delta", "must be positive");
  if (!(c.tube_sigma > 0)) throw ConfigError("tube.sigma", "must be positive");
  if (c.max_iters < 1) throw ConfigError("solver.max_iters", "must be at least 1");
  if (!(c.t0 >= 0)) throw ConfigError("solver.t0", "must be >= 0 (0 = automatic)");
  if (!(c.shrink > 0 && c.shrink < 1))
    throw ConfigError("solver.shrink", "must lie in (0, 1)");
  if (c.patience < 1) throw ConfigError("solver.patience", "must be at least 1");
  if (c.window < 1) throw ConfigError("solver.window", "must be at least 1");
  if (!(c.tol >= 0)) throw ConfigError("solver.tol", "must be >= 0");
  if (!(c.p >= 1 && c.p <= 2)) throw ConfigError("solver.p", "must lie in [1, 2]");
  if (!(c.alpha > 0)) throw ConfigError("solve.alpha", "must be positive");
  if (c.sweep_eps.empty()) throw ConfigError("sweep.eps_values", "must be nonempty");
  for (const double e : c.sweep_eps)
    if (!(e >= 0)) throw ConfigError("sweep.eps_values", "entries must be >= 0");
  if (c.sweep_runs < 1) throw ConfigError("sweep.runs", "must be at least 1");
  if (!(c.sweep_alpha > 0)) throw ConfigError("sweep.alpha", "must be positive");
  if (!(c.alpha_lo > 0)) throw ConfigError("alpha_grid.lo", "must be positive");
  if (!(c.alpha_hi > c.alpha_lo))
    throw ConfigError("alpha_grid.hi", "must exceed alpha_grid.lo");
  if (c.alpha_count < 2) throw ConfigError("alpha_grid.count", "must be at least 2");
  if (!(c.tau >= 1)) throw ConfigError("morozov.tau", "must be >= 1");
  if (!(c.morozov_delta >= 0))
    throw ConfigError("morozov.delta", "must be >= 0 (0 = noise.delta)");
  if (c.protocol != "transfer" && c.protocol != "direct")
    throw ConfigError("morozov.protocol", "must be 'transfer' or 'direct'");
  if (!(c.rates_delta0 > 0)) throw ConfigError("rates.delta0", "must be positive");
  if (c.rates_levels < 2) throw ConfigError("rates.levels", "must be at least 2");
  if (!(c.rates_c > 0)) throw ConfigError("rates.c", "must be positive");
  if (!(c.fourier_eps >= 0)) throw ConfigError("fourier.eps", "must be >= 0");
  if (c.fourier_terms < 1) throw ConfigError("fourier.terms", "must be at least 1");
  if (c.fourier_samples < 16)
    throw ConfigError("fourier.samples", "must be at least 16");
  if (c.workers < 1) throw ConfigError("workers", "must be at least 1");
}

Signal<double> builtin_reference(const std::string& name, const Grid<double>& grid) {
  const double pi = std::acos(-1.0);
  if (name == "sin2pi") {
    Vector<double> values(grid.n);
    for (Index i = 0; i < grid.n; ++i)
      values[i] = std::sin(2.0 * pi * grid.nodes[i]);
    return Signal<double>{grid, std::move(values)};
  }
  if (name == "zero")
    return Signal<double>{grid, Vector<double>::Zero(grid.n)};
  if (name.rfind("const:", 0) == 0) {
    const std::string digits = name.substr(6);
    char* end = nullptr;
    const double c = std::strtod(digits.c_str(), &end);
    if (end == digits.c_str() || *end != '\0')
      throw std::invalid_argument("builtin_reference: bad constant '" + digits + "'");
    return Signal<double>{grid, Vector<double>::Constant(grid.n, c)};
  }
  if (name.rfind("file:", 0) == 0) {
    const Signal<double> s = read_signal_csv(name.substr(5));
    if (s.grid.n != grid.n)
      throw std::invalid_argument("builtin_reference: file grid has " +
                                  std::to_string(s.grid.n) + " nodes, expected " +
                                  std::to_string(grid.n));
    const double scale = std::abs(grid.b - grid.a);
    for (Index i = 0; i < grid.n; ++i)
      if (std::abs(s.grid.nodes[i] - grid.nodes[i]) > 1e-9 * scale)
        throw std::invalid_argument("builtin_reference: file nodes do not match the grid");
    return Signal<double>{grid, s.values};
  }
  throw std::invalid_argument("builtin_reference: unknown name '" + name + "'");
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"solve",   "sweep-eps", "lcurve",
                                                 "morozov", "rates",     "fourier"};
  return names;
}

namespace {

namespace fs = std::filesystem;

struct Assembled {
  Grid<double> grid;
  LinearOperator<double> op;
  Signal<double> ustar;
  ToleranceProfile<double> eps_profile;
  double tube_eps;
  SolverConfig<double> solver;
};

Assembled assemble(const RunConfig& c) {
  Grid<double> grid = make_grid<double>(c.n, c.a, c.b);
  LinearOperator<double> op = integration_operator(grid);
  Signal<double> ustar = [&] {
    try {
      return builtin_reference(c.reference, grid);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("penalty.reference", e.what());
    }
  }();
  ToleranceProfile<double> profile = [&] {
    if (c.eps_file.empty()) return ToleranceProfile<double>(c.eps);
    const Signal<double> s = read_signal_csv(c.eps_file);
    if (s.grid.n != grid.n)
      throw ConfigError("penalty.eps_file", "profile length does not match problem.n");
    return ToleranceProfile<double>(s.values);
  }();
  double tube_eps = c.tube_eps;
  if (tube_eps < 0) {
    if (!c.eps_file.empty())
      throw ConfigError("tube.eps",
                        "required when penalty.eps_file is set (no scalar eps to follow)");
    tube_eps = c.eps;
  }
  SolverConfig<double> solver;
  solver.max_iters = c.max_iters;
  solver.initial_step = c.t0;
  solver.shrink_factor = c.shrink;
  solver.patience = c.patience;
  solver.window = c.window;
  solver.objective_tol = c.tol;
  solver.certificate_tol = c.certificate_tol;
  return Assembled{std::move(grid), std::move(op), std::move(ustar),
                   std::move(profile), tube_eps, solver};
}

fs::path resolve_out_dir(const RunConfig& c) {
  std::string dir = c.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("TOLREG_OUT_DIR");
    dir = env && *env ? env : "out";
  }
  fs::create_directories(dir);
  return dir;
}

// Tube ground truth and noisy data for the single-realization commands.
struct Realization {
  Signal<double> truth;
  Signal<double> data;
};

Realization make_realization(const RunConfig& c, const Assembled& a) {
  Signal<double> truth = sample_tube(
      {a.ustar, a.tube_eps, c.tube_sigma, substream_seed(c.seed, "tube", 0)});
  Signal<double> data =
      add_noise(apply(a.op, truth), {c.delta, substream_seed(c.seed, "noise", 0)});
  return Realization{std::move(truth), std::move(data)};
}

json base_manifest(const std::string& command, const RunConfig& c) {
  json m;
  m["command"] = command;
  m["seed"] = c.seed;
  m["settings"] = effective_config(c);
  m["summary"] = json::object();
  return m;
}

int run_solve(const RunConfig& c, const Assembled& a, const fs::path& out) {
  const Realization real = make_realization(c, a);
  TikhonovProblem<double> problem{a.op, real.data, c.p, c.alpha,
                                  make_penalty_spec(c.q, a.ustar, a.eps_profile),
                                  c.scaling};
  const SolveResult<double> result = minimize(problem, a.solver);

  write_signal_csv(out / "solution.csv", result.solution);
  write_signal_csv(out / "truth.csv", real.truth);
  write_signal_csv(out / "data.csv", real.data);
  write_history_csv(out / "history.csv", result);

  const double err2 = weighted_norm(
      Vector<double>(result.solution.values - real.truth.values), a.grid.h, 2.0);
  const double err_eps =
      eps_measure(Vector<double>(result.solution.values - real.truth.values),
                  a.eps_profile.on(a.grid.n), a.grid.h, c.q);
  json m = base_manifest("solve", c);
  m["summary"]["error_weighted2"] = err2;
  m["summary"]["error_eps_measure"] = err_eps;
  m["summary"]["objective"] = result.objective_history.empty()
                                  ? 0.0
                                  : *std::min_element(result.objective_history.begin(),
                                                      result.objective_history.end());
  m["summary"]["iterations"] = result.iterations_used;
  m["summary"]["converged"] = result.converged;
  m["summary"]["subgradient_norm"] = result.subgradient_norm;
  write_json(out / "manifest.json", m);
  std::cout << "solve: n=" << c.n << " q=" << c.q << " alpha=" << c.alpha
            << " err2=" << err2 << " iters=" << result.iterations_used << " -> "
            << out.string() << "\n";
  return 0;
}

int run_sweep(const RunConfig& c, const Assembled& a, const fs::path& out) {
  SweepConfig sweep;
  sweep.q = c.q;
  sweep.eps_values = c.sweep_eps;
  sweep.runs = c.sweep_runs;
  sweep.delta = c.delta;
  sweep.alpha = c.sweep_alpha;
  sweep.tube_sigma = c.tube_sigma;
  sweep.solver = a.solver;
  sweep.seed = c.seed;
  sweep.workers = c.workers;
  const SweepReport report = error_sweep(a.ustar, sweep);

  std::string csv = "eps,mean_tol,mean_classical,stderr_tol,stderr_classical\n";
  for (std::size_t i = 0; i < report.eps_values.size(); ++i)
    csv += g17(report.eps_values[i]) + "," + g17(report.mean_error_tol[i]) + "," +
           g17(report.mean_error_classical[i]) + "," + g17(report.stderr_tol[i]) +
           "," + g17(report.stderr_classical[i]) + "\n";
  write_text(out / "sweep.csv", csv);

  bool dominated = true;
  for (std::size_t i = 0; i < report.eps_values.size(); ++i)
    dominated = dominated && report.mean_error_tol[i] <=
                                 report.mean_error_classical[i] +
                                     report.stderr_classical[i];
  json m = base_manifest("sweep-eps", c);
  m["summary"]["runs"] = report.runs;
  m["summary"]["tolerance_dominates"] = dominated;
  m["summary"]["mean_error_tol"] = report.mean_error_tol;
  m["summary"]["mean_error_classical"] = report.mean_error_classical;
  write_json(out / "manifest.json", m);
  std::cout << "sweep-eps: q=" << c.q << " runs=" << report.runs
            << " dominated=" << (dominated ? "yes" : "no") << " -> " << out.string()
            << "\n";
  return 0;
}

int run_lcurve(const RunConfig& c, const Assembled& a, const fs::path& out) {
  const Realization real = make_realization(c, a);
  TikhonovProblem<double> tmpl{a.op, real.data, c.p, c.alpha_lo,
                               make_penalty_spec(c.q, a.ustar, a.eps_profile),
                               c.scaling};
  const AlphaGrid<double> alphas =
      log_spaced_alphas(c.alpha_lo, c.alpha_hi, c.alpha_count);
  const LCurveResult<double> result =
      lcurve(tmpl, alphas, subgradient_solver(a.solver));

  write_lcurve_csv(out / "lcurve.csv", result);
  json m = base_manifest("lcurve", c);
  m["summary"]["corner_alpha"] =
      result.corner_alpha ? json(*result.corner_alpha) : json();
  m["summary"]["points"] = result.points.size();
  write_json(out / "manifest.json", m);
  std::cout << "lcurve: points=" << result.points.size() << " corner_alpha=";
  if (result.corner_alpha)
    std::cout << *result.corner_alpha;
  else
    std::cout << "none";
  std::cout << " -> " << out.string() << "\n";
  return 0;
}

int run_morozov(const RunConfig& c, const Assembled& a, const fs::path& out) {
  const Realization real = make_realization(c, a);
  TikhonovProblem<double> tmpl{a.op, real.data, c.p, c.alpha_lo,
                               make_penalty_spec(c.q, a.ustar, a.eps_profile),
                               c.scaling};
  const AlphaGrid<double> alphas =
      log_spaced_alphas(c.alpha_lo, c.alpha_hi, c.alpha_count);
  const double delta = c.morozov_delta > 0 ? c.morozov_delta : c.delta;
  const bool use_tolerance = c.protocol == "direct";
  const DiscrepancyReport<double> report = morozov_select(
      tmpl, alphas, c.tau, delta, use_tolerance, subgradient_solver(a.solver));

  write_morozov_csv(out / "morozov.csv", report);
  json m = base_manifest("morozov", c);
  m["summary"]["alpha_opt"] = report.alpha_opt ? json(*report.alpha_opt) : json();
  m["summary"]["monotone"] = report.monotone;
  m["summary"]["tau"] = c.tau;
  m["summary"]["delta"] = delta;
  m["summary"]["protocol"] = c.protocol;

  if (report.alpha_opt) {
    // Final reconstruction with the tolerance in place at the selected alpha.
    TikhonovProblem<double> chosen = tmpl;
    chosen.alpha = *report.alpha_opt;
    const SolveResult<double> result = minimize(chosen, a.solver);
    write_signal_csv(out / "reconstruction.csv", result.solution);
    const double err2 = weighted_norm(
        Vector<double>(result.solution.values - real.truth.values), a.grid.h, 2.0);
    m["summary"]["reconstruction_error"] = err2;
  }
  write_json(out / "manifest.json", m);

  std::cout << "morozov: protocol=" << c.protocol << " alpha_opt=";
  if (report.alpha_opt)
    std::cout << *report.alpha_opt;
  else
    std::cout << "none";
  std::cout << " monotone=" << (report.monotone ? "yes" : "no") << " -> "
            << out.string() << "\n";
  return report.alpha_opt ? 0 : 3;
}

int run_rates(const RunConfig& c, const Assembled& a, const fs::path& out) {
  if (!a.eps_profile.is_scalar())
    throw ConfigError("penalty.eps_file", "rates requires a scalar penalty.eps");
  RateConfig rates;
  rates.q = c.q;
  rates.eps = a.eps_profile.scalar_value();
  rates.delta0 = c.rates_delta0;
  rates.c = c.rates_c;
  rates.levels = c.rates_levels;
  rates.tube_sigma = c.tube_sigma;
  rates.solver = a.solver;
  rates.seed = c.seed;
  const RateReport report = rate_study(a.ustar, rates);

  std::string csv = "delta,bregman,residual\n";
  for (std::size_t i = 0; i < report.deltas.size(); ++i)
    csv += g17(report.deltas[i]) + "," + g17(report.bregman_values[i]) + "," +
           g17(report.residual_values[i]) + "\n";
  write_text(out / "rates.csv", csv);

  json m = base_manifest("rates", c);
  m["summary"]["bregman_slope"] = report.bregman_slope;
  m["summary"]["residual_slope"] = report.residual_slope;
  m["summary"]["bregman_fit_points"] = report.bregman_fit_points;
  m["summary"]["residual_fit_points"] = report.residual_fit_points;
  write_json(out / "manifest.json", m);
  std::cout << "rates: bregman_slope=" << report.bregman_slope
            << " residual_slope=" << report.residual_slope << " -> " << out.string()
            << "\n";
  return 0;
}

int run_fourier(const RunConfig& c, const fs::path& out) {
  const FourierTable table =
      fourier_demo(c.fourier_eps, c.fourier_terms, c.fourier_samples);

  std::string csv = "n,a_plain,b_plain,a_tol,b_tol\n";
  for (Index n = 0; n <= table.terms; ++n)
    csv += std::to_string(n) + "," + g17(table.a_plain[std::size_t(n)]) + "," +
           g17(table.b_plain[std::size_t(n)]) + "," +
           g17(table.a_tol[std::size_t(n)]) + "," +
           g17(table.b_tol[std::size_t(n)]) + "\n";
  write_text(out / "fourier.csv", csv);

  json m = base_manifest("fourier", c);
  m["summary"]["nonzero_plain"] = table.nonzero_plain;
  m["summary"]["nonzero_tol"] = table.nonzero_tol;
  write_json(out / "manifest.json", m);
  std::cout << "fourier: eps=" << table.eps << " nonzero_plain=" << table.nonzero_plain
            << " nonzero_tol=" << table.nonzero_tol << " -> " << out.string() << "\n";
  return 0;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& config) {
  validate(config);
  const fs::path out = resolve_out_dir(config);
  write_json(out / "config.json", effective_config(config));

  if (command == "fourier") return run_fourier(config, out);

  const Assembled assembled = assemble(config);
  if (command == "solve") return run_solve(config, assembled, out);
  if (command == "sweep-eps") return run_sweep(config, assembled, out);
  if (command == "lcurve") return run_lcurve(config, assembled, out);
  if (command == "morozov") return run_morozov(config, assembled, out);
  if (command == "rates") return run_rates(config, assembled, out);
  throw ConfigError("(command)", "unknown command '" + command + "'");
}

}  // namespace tolreg
