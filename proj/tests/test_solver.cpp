#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "tolreg/experiments.hpp"
#include "tolreg/solver.hpp"

using namespace tolreg;

namespace {

// Low-frequency truth whose integral data the subgradient iteration can
// recover quickly without regularization.
Signal<double> smooth_truth(const Grid<double>& g) {
  const double pi = std::acos(-1.0);
  Vector<double> v(g.n);
  for (Index i = 0; i < g.n; ++i) {
    const double x = g.nodes[i];
    v[i] = std::cos(pi * x / 2) + 0.3 * std::cos(3 * pi * x / 2) +
           0.1 * std::cos(5 * pi * x / 2);
  }
  return make_signal(g, v);
}

Signal<double> sin_reference(const Grid<double>& g) {
  const double pi = std::acos(-1.0);
  Vector<double> v(g.n);
  for (Index i = 0; i < g.n; ++i) v[i] = std::sin(2 * pi * g.nodes[i]);
  return make_signal(g, v);
}

TikhonovProblem<double> base_problem(const Grid<double>& g, double q, double eps,
                                     double alpha, const Signal<double>& data,
                                     const Signal<double>& ustar) {
  return TikhonovProblem<double>{integration_operator(g), data, 2.0, alpha,
                                 make_penalty_spec(q, ustar,
                                                   ToleranceProfile<double>(eps)),
                                 true};
}

}  // namespace

TEST_CASE("objective vanishes on consistent data inside the tube") {
  const auto g = make_grid<double>(50, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto data = apply(op, ustar);
  const auto problem = base_problem(g, 2.0, 0.3, 0.5, data, ustar);
  CHECK(objective(problem, ustar) == 0.0);
}

TEST_CASE("objective at the reference is the pure discrepancy") {
  const auto g = make_grid<double>(60, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto truth = smooth_truth(g);
  const auto data = apply(op, truth);
  const auto problem = base_problem(g, 1.0, 0.3, 7.5, data, ustar);
  const double residual = weighted_norm(
      Vector<double>(apply(op, ustar).values - data.values), g.h, 2.0);
  CHECK(objective(problem, ustar) ==
        doctest::Approx(0.5 * residual * residual).epsilon(1e-12));
}

TEST_CASE("objective matches recomposition from the parts") {
  const auto g = make_grid<double>(45, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto data = make_signal(g, oracle::random_vector(g.n, 50));
  for (const double q : {1.0, 1.5, 2.0}) {
    const auto spec =
        make_penalty_spec(q, ustar, ToleranceProfile<double>(0.25));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto u = make_signal(g, oracle::random_vector(g.n, 60 + seed, -2, 2));
      const double res =
          weighted_norm(Vector<double>(apply(op, u).values - data.values), g.h, 2.0);
      const double pen = penalty_value(u, spec);

      TikhonovProblem<double> scaled{op, data, 2.0, 0.01, spec, true};
      CHECK(objective(scaled, u) ==
            doctest::Approx(0.5 * res * res + (0.01 / q) * pen).epsilon(1e-12));

      TikhonovProblem<double> general{op, data, 1.5, 0.01, spec, false};
      CHECK(objective(general, u) ==
            doctest::Approx(std::pow(res, 1.5) + 0.01 * pen).epsilon(1e-12));
    }
  }
}

TEST_CASE("objective_subgradient is zero at a global minimizer") {
  const auto g = make_grid<double>(40, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto data = apply(op, ustar);
  const auto problem = base_problem(g, 2.0, 0.3, 1.0, data, ustar);
  const auto grad = objective_subgradient(problem, ustar);
  CHECK(grad.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("objective_subgradient matches finite differences") {
  const auto g = make_grid<double>(20, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto data = make_signal(g, oracle::random_vector(g.n, 70));
  const auto ustar = make_signal(g, Vector<double>::Zero(g.n));

  // Pure least squares (alpha = 0).
  const auto ls = base_problem(g, 2.0, 0.3, 0.0, data, ustar);
  const auto u = make_signal(g, oracle::random_vector(g.n, 71, -1, 1));
  const auto fd_ls = oracle::fd_gradient(
      [&](const Vector<double>& x) { return objective(ls, make_signal(g, x)); },
      u.values);
  const auto grad_ls = objective_subgradient(ls, u);
  for (Index i = 0; i < g.n; ++i)
    CHECK(grad_ls.values[i] == doctest::Approx(fd_ls[i]).epsilon(1e-5));

  // Full objective with every component clear of the tube boundary.
  const auto full = base_problem(g, 2.0, 0.3, 0.4, data, ustar);
  Vector<double> away = oracle::random_vector(g.n, 72, 0.5, 1.5);
  for (Index i = 0; i < g.n; ++i)
    if (i % 3 == 0) away[i] = -away[i];
  const auto fd_full = oracle::fd_gradient(
      [&](const Vector<double>& x) { return objective(full, make_signal(g, x)); },
      away);
  const auto grad_full = objective_subgradient(full, make_signal(g, away));
  for (Index i = 0; i < g.n; ++i)
    CHECK(grad_full.values[i] == doctest::Approx(fd_full[i]).epsilon(1e-5));
}

TEST_CASE("unsupported residual exponent is rejected") {
  const auto g = make_grid<double>(10, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = make_signal(g, Vector<double>::Zero(g.n));
  const auto data = apply(op, ustar);
  TikhonovProblem<double> problem{op, data, 1.5, 0.1,
                                  make_penalty_spec(2.0, ustar,
                                                    ToleranceProfile<double>(0.1)),
                                  true};
  CHECK_THROWS_AS(objective_subgradient(problem, ustar), std::invalid_argument);
  SolverConfig<double> config;
  CHECK_THROWS_AS(minimize(problem, config), std::invalid_argument);
}

TEST_CASE("unregularized solve recovers the triangular solution") {
  const auto g = make_grid<double>(100, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto truth = smooth_truth(g);
  const auto data = apply(op, truth);
  const auto ustar = make_signal(g, Vector<double>::Zero(g.n));
  const auto problem = base_problem(g, 2.0, 0.3, 0.0, data, ustar);

  SolverConfig<double> config;
  config.max_iters = 50000;
  const auto result = minimize(problem, config);

  const Vector<double> direct = oracle::triangular_solve(op.matrix, data.values);
  CHECK(weighted_norm(Vector<double>(result.solution.values - direct), g.h, 2.0) <=
        1e-3);
}

TEST_CASE("huge alpha forces the solution into the tube") {
  const auto g = make_grid<double>(80, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto truth = smooth_truth(g);
  const auto data = apply(op, truth);
  const auto ustar = sin_reference(g);
  const auto problem = base_problem(g, 2.0, 0.3, 1e6, data, ustar);

  SolverConfig<double> config;
  config.max_iters = 5000;
  const auto result = minimize(problem, config);
  CHECK(penalty_value(result.solution, problem.penalty) <= 1e-6);
}

TEST_CASE("tolerance beats the classical penalty on the reference setup") {
  const auto g = make_grid<double>(600, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto truth = sample_tube({ustar, 0.3, 0.08, substream_seed(1, "tube", 0)});
  const auto data =
      add_noise(apply(op, truth), {0.001, substream_seed(1, "noise", 0)});

  SolverConfig<double> config;
  config.max_iters = 10000;

  TikhonovProblem<double> tol{op, data, 2.0, 0.001,
                              make_penalty_spec(1.0, ustar,
                                                ToleranceProfile<double>(0.3)),
                              true};
  TikhonovProblem<double> classical = tol;
  classical.penalty.tolerance = ToleranceProfile<double>(0.0);

  const auto u_tol = minimize(tol, config);
  const auto u_classical = minimize(classical, config);
  const double err_tol = weighted_norm(
      Vector<double>(u_tol.solution.values - truth.values), g.h, 2.0);
  const double err_classical = weighted_norm(
      Vector<double>(u_classical.solution.values - truth.values), g.h, 2.0);
  CHECK(err_tol <= err_classical);
}

TEST_CASE("solution objective equals the history minimum") {
  const auto g = make_grid<double>(70, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto data = add_noise(apply(op, smooth_truth(g)), {0.01, 5});
  const auto problem = base_problem(g, 1.0, 0.2, 0.01, data, ustar);

  SolverConfig<double> config;
  config.max_iters = 3000;
  const auto result = minimize(problem, config);

  REQUIRE(!result.objective_history.empty());
  CHECK(result.objective_history.size() ==
        std::size_t(result.iterations_used) + 1);
  CHECK(result.residual_history.size() == result.objective_history.size());
  CHECK(result.penalty_history.size() == result.objective_history.size());

  const double best = *std::min_element(result.objective_history.begin(),
                                        result.objective_history.end());
  CHECK(objective(problem, result.solution) == best);

  // The running minimum never increases.
  double running = result.objective_history.front();
  for (const double f : result.objective_history) {
    running = std::min(running, f);
    CHECK(running <= result.objective_history.front());
  }
  CHECK(best == running);
}

TEST_CASE("identical inputs give bit-identical results") {
  const auto g = make_grid<double>(90, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto data = add_noise(apply(op, smooth_truth(g)), {0.005, 9});
  const auto problem = base_problem(g, 2.0, 0.3, 0.005, data, ustar);

  SolverConfig<double> config;
  config.max_iters = 2000;
  const auto first = minimize(problem, config);
  const auto second = minimize(problem, config);
  CHECK(first.iterations_used == second.iterations_used);
  CHECK((first.solution.values - second.solution.values).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(first.objective_history == second.objective_history);
  CHECK(first.subgradient_norm == second.subgradient_norm);
}

TEST_CASE("classical limit matches the normal equations") {
  const auto g = make_grid<double>(120, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto data = add_noise(apply(op, smooth_truth(g)), {0.001, 3});
  const auto problem = base_problem(g, 2.0, 0.0, 0.01, data, ustar);

  SolverConfig<double> config;
  config.max_iters = 20000;
  const auto result = minimize(problem, config);

  const Vector<double> direct =
      oracle::normal_equations(op.matrix, data.values, 0.01, ustar.values);
  CHECK(weighted_norm(Vector<double>(result.solution.values - direct), g.h, 2.0) <=
        1e-3);
  if (result.converged) CHECK(result.subgradient_norm <= config.certificate_tol);
}

TEST_CASE("iteration budget exhaustion reports no convergence") {
  const auto g = make_grid<double>(40, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto data = add_noise(apply(op, smooth_truth(g)), {0.01, 4});
  const auto problem = base_problem(g, 2.0, 0.3, 0.01, data, ustar);

  SolverConfig<double> config;
  config.max_iters = 5;
  const auto result = minimize(problem, config);
  CHECK_FALSE(result.converged);
  CHECK(result.iterations_used == 5);
}

TEST_CASE("a diverging step size aborts with a diagnostic") {
  const auto g = make_grid<double>(30, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto data = add_noise(apply(op, smooth_truth(g)), {0.01, 6});
  const auto problem = base_problem(g, 2.0, 0.3, 0.01, data, ustar);

  SolverConfig<double> config;
  config.initial_step = 1e300;
  config.max_iters = 50;
  CHECK_THROWS_AS(minimize(problem, config), std::runtime_error);
}

TEST_CASE("problem validation") {
  const auto g = make_grid<double>(12, 0.0, 1.0);
  const auto op = integration_operator(g);
  const auto ustar = sin_reference(g);
  const auto data = apply(op, ustar);

  TikhonovProblem<double> bad_alpha{op, data, 2.0, -1.0,
                                    make_penalty_spec(2.0, ustar,
                                                      ToleranceProfile<double>(0.1)),
                                    true};
  CHECK_THROWS_AS(check_problem(bad_alpha), std::invalid_argument);

  const auto other = make_grid<double>(13, 0.0, 1.0);
  TikhonovProblem<double> bad_grid{
      op, make_signal(other, Vector<double>::Zero(13)), 2.0, 0.1,
      make_penalty_spec(2.0, ustar, ToleranceProfile<double>(0.1)), true};
  CHECK_THROWS_AS(check_problem(bad_grid), std::invalid_argument);
}
