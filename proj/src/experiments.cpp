#include "tolreg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace tolreg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Vector<double> standard_normal(Index n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector<double> g(n);
  for (Index i = 0; i < n; ++i) g[i] = normal(engine);
  return g;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, const std::string& tag,
                             std::uint64_t index) {
  std::uint64_t x = seed;
  for (unsigned char c : tag) x = splitmix64(x ^ c);
  return splitmix64(x ^ splitmix64(index));
}

Signal<double> add_noise(const Signal<double>& v, const NoiseModel& model) {
  if (!(model.delta > 0))
    throw std::invalid_argument("add_noise: delta must be positive");
  if (model.mode != "fixed-norm-gaussian")
    throw std::invalid_argument("add_noise: unknown mode '" + model.mode + "'");
  std::uint64_t seed = model.seed;
  Vector<double> g = standard_normal(v.grid.n, seed);
  while (g.isZero()) g = standard_normal(v.grid.n, ++seed);  // probability-0 guard
  const double norm = weighted_norm(g, v.grid.h, 2.0);
  return Signal<double>{v.grid, v.values + g * (model.delta / norm)};
}

Signal<double> sample_tube(const TubeSampler& sampler) {
  if (!(sampler.eps >= 0))
    throw std::invalid_argument("sample_tube: eps must be >= 0");
  if (!(sampler.sigma > 0))
    throw std::invalid_argument("sample_tube: sigma must be positive");
  const Grid<double>& grid = sampler.reference.grid;
  const Index n = grid.n;
  const Vector<double> white = standard_normal(n, sampler.seed);

  // Truncated Gaussian kernel (+-4 sigma), normalized to unit sum.
  Index m = Index(std::ceil(4.0 * sampler.sigma / grid.h));
  m = std::min(m, n - 1);  // reflection padding cannot exceed the signal
  Vector<double> kernel(2 * m + 1);
  for (Index j = -m; j <= m; ++j) {
    const double t = double(j) * grid.h / sampler.sigma;
    kernel[j + m] = std::exp(-0.5 * t * t);
  }
  kernel /= kernel.sum();

  // Discrete convolution with reflecting boundary.
  Vector<double> eta = Vector<double>::Zero(n);
  for (Index i = 0; i < n; ++i) {
    double acc = 0;
    for (Index j = -m; j <= m; ++j) {
      Index k = i + j;
      if (k < 0) k = -k - 1;
      if (k >= n) k = 2 * n - 1 - k;
      acc += kernel[j + m] * white[k];
    }
    eta[i] = acc;
  }

  const double sup = eta.cwiseAbs().maxCoeff();
  if (sup > 0) eta /= sup;
  return Signal<double>{grid, sampler.reference.values + sampler.eps * eta};
}

namespace {

struct RunErrors {
  double tol = 0;
  double classical = 0;
};

void summarize(const std::vector<RunErrors>& errors, double& mean_tol,
               double& mean_cl, double& se_tol, double& se_cl) {
  const double n = double(errors.size());
  mean_tol = 0;
  mean_cl = 0;
  for (const auto& e : errors) {
    mean_tol += e.tol;
    mean_cl += e.classical;
  }
  mean_tol /= n;
  mean_cl /= n;
  double var_tol = 0, var_cl = 0;
  for (const auto& e : errors) {
    var_tol += (e.tol - mean_tol) * (e.tol - mean_tol);
    var_cl += (e.classical - mean_cl) * (e.classical - mean_cl);
  }
  if (errors.size() > 1) {
    var_tol /= (n - 1);
    var_cl /= (n - 1);
  }
  se_tol = std::sqrt(var_tol / n);
  se_cl = std::sqrt(var_cl / n);
}

}  // namespace

SweepReport error_sweep(const Signal<double>& reference, const SweepConfig& config) {
  if (config.runs < 1)
    throw std::invalid_argument("error_sweep: runs must be at least 1");
  if (config.eps_values.empty())
    throw std::invalid_argument("error_sweep: empty eps grid");
  check_exponent(config.q);
  const LinearOperator<double> op = integration_operator(reference.grid);
  const Index n_eps = Index(config.eps_values.size());

  SweepReport report;
  report.eps_values = config.eps_values;
  report.runs = config.runs;
  report.q = config.q;
  report.delta = config.delta;
  report.alpha = config.alpha;

  std::vector<RunErrors> errors(std::size_t(n_eps) * std::size_t(config.runs));

  auto one_run = [&](Index eps_index, Index run) {
    const double eps = config.eps_values[std::size_t(eps_index)];
    const std::uint64_t run_id =
        std::uint64_t(eps_index) * std::uint64_t(config.runs) + std::uint64_t(run);
    const Signal<double> truth = sample_tube(
        {reference, eps, config.tube_sigma, substream_seed(config.seed, "tube", run_id)});
    const Signal<double> data = add_noise(
        apply(op, truth),
        {config.delta, substream_seed(config.seed, "noise", run_id)});

    const Vector<double> eps_vec = Vector<double>::Constant(reference.grid.n, eps);
    RunErrors e;
    for (const bool use_tolerance : {true, false}) {
      TikhonovProblem<double> problem{
          op, data, 2.0, config.alpha,
          make_penalty_spec(config.q, reference,
                            ToleranceProfile<double>(use_tolerance ? eps : 0.0)),
          true};
      const SolveResult<double> solved = minimize(problem, config.solver);
      const double err =
          eps_measure(Vector<double>(solved.solution.values - truth.values),
                      eps_vec, reference.grid.h, config.q);
      (use_tolerance ? e.tol : e.classical) = err;
    }
    errors[std::size_t(run_id)] = e;
  };

  const Index total = n_eps * config.runs;
  const int workers = std::max(1, config.workers);
  if (workers == 1) {
    for (Index id = 0; id < total; ++id) one_run(id / config.runs, id % config.runs);
  } else {
    std::vector<std::thread> pool;
    std::atomic<Index> next{0};
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (Index id = next.fetch_add(1); id < total; id = next.fetch_add(1))
          one_run(id / config.runs, id % config.runs);
      });
    for (auto& t : pool) t.join();
  }

  for (Index i = 0; i < n_eps; ++i) {
    const std::vector<RunErrors> slice(
        errors.begin() + i * config.runs, errors.begin() + (i + 1) * config.runs);
    double mt, mc, st, sc;
    summarize(slice, mt, mc, st, sc);
    report.mean_error_tol.push_back(mt);
    report.mean_error_classical.push_back(mc);
    report.stderr_tol.push_back(st);
    report.stderr_classical.push_back(sc);
  }
  return report;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                        Index& fit_points) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    if (y[i] > 0 && x[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  fit_points = Index(lx.size());
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(lx.size());
  my /= double(lx.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

RateReport rate_study(const Signal<double>& reference, const RateConfig& config) {
  if (config.levels < 2)
    throw std::invalid_argument("rate_study: need at least 2 noise levels");
  if (!(config.delta0 > 0) || !(config.c > 0))
    throw std::invalid_argument("rate_study: delta0 and c must be positive");
  const LinearOperator<double> op = integration_operator(reference.grid);
  const Grid<double>& grid = reference.grid;

  const Signal<double> truth = sample_tube(
      {reference, config.eps, config.tube_sigma, substream_seed(config.seed, "tube", 0)});
  const Signal<double> clean = apply(op, truth);
  Vector<double> direction = standard_normal(grid.n, substream_seed(config.seed, "noise", 0));
  direction /= weighted_norm(direction, grid.h, 2.0);

  const PenaltySpec<double> spec =
      make_penalty_spec(config.q, reference, ToleranceProfile<double>(config.eps));
  const Subgradient<double> xi = penalty_subgradient(truth, spec);

  RateReport report;
  for (Index k = 0; k < config.levels; ++k) {
    const double delta_k = config.delta0 * std::pow(2.0, -double(k));
    const Signal<double> data{grid, clean.values + delta_k * direction};
    TikhonovProblem<double> problem{op, data, 2.0, config.c * delta_k, spec, true};
    const SolveResult<double> solved = minimize(problem, config.solver);
    const double breg = bregman_distance(solved.solution, truth, spec, xi);
    Vector<double> r(grid.n);
    apply_into(op, solved.solution.values, r);
    r -= data.values;
    report.deltas.push_back(delta_k);
    report.bregman_values.push_back(breg);
    report.residual_values.push_back(weighted_norm(r, grid.h, 2.0));
  }
  report.bregman_slope =
      fit_loglog_slope(report.deltas, report.bregman_values, report.bregman_fit_points);
  report.residual_slope = fit_loglog_slope(report.deltas, report.residual_values,
                                           report.residual_fit_points);
  return report;
}

FourierTable fourier_demo(double eps, Index n_terms, Index samples) {
  if (!(eps >= 0))
    throw std::invalid_argument("fourier_demo: eps must be >= 0");
  if (n_terms < 1)
    throw std::invalid_argument("fourier_demo: need at least 1 term");
  if (samples < 16)
    throw std::invalid_argument("fourier_demo: need at least 16 samples");

  const double pi = std::acos(-1.0);
  const double width = 4.0 * pi;  // [-2pi, 2pi]
  const double w = width / double(samples);

  Vector<double> t(samples), plain(samples), tol(samples);
  for (Index i = 0; i < samples; ++i) {
    t[i] = -2.0 * pi + (double(i) + 0.5) * w;
    plain[i] = std::sin(t[i]);
    tol[i] = std::max(std::abs(plain[i]) - eps, 0.0);
  }

  FourierTable table;
  table.eps = eps;
  table.terms = n_terms;
  table.samples = samples;
  table.a_plain.resize(std::size_t(n_terms) + 1);
  table.b_plain.assign(std::size_t(n_terms) + 1, 0.0);
  table.a_tol.resize(std::size_t(n_terms) + 1);
  table.b_tol.assign(std::size_t(n_terms) + 1, 0.0);

  const double scale = w / (2.0 * pi);
  Vector<double> cs(samples), sn(samples);
  for (Index n = 0; n <= n_terms; ++n) {
    for (Index i = 0; i < samples; ++i) {
      cs[i] = std::cos(double(n) * t[i]);
      sn[i] = std::sin(double(n) * t[i]);
    }
    table.a_plain[std::size_t(n)] = scale * plain.dot(cs);
    table.a_tol[std::size_t(n)] = scale * tol.dot(cs);
    if (n >= 1) {
      table.b_plain[std::size_t(n)] = scale * plain.dot(sn);
      table.b_tol[std::size_t(n)] = scale * tol.dot(sn);
    }
  }

  const auto count_nonzero = [n_terms](const std::vector<double>& a,
                                       const std::vector<double>& b) {
    Index count = 0;
    for (Index n = 0; n <= n_terms; ++n)
      if (std::abs(a[std::size_t(n)]) > 1e-8) ++count;
    for (Index n = 1; n <= n_terms; ++n)
      if (std::abs(b[std::size_t(n)]) > 1e-8) ++count;
    return count;
  };
  table.nonzero_plain = count_nonzero(table.a_plain, table.b_plain);
  table.nonzero_tol = count_nonzero(table.a_tol, table.b_tol);
  return table;
}

}  // namespace tolreg
