#pragma once

// The tolerance-regularized Tikhonov objective and its minimization by a
// subgradient method with diminishing, adaptively shrunk step sizes.

#include <cstdint>
#include <vector>

#include "tolreg/core.hpp"
#include "tolreg/penalty.hpp"

namespace tolreg {

// J(u).  With scaled_objective (the form the experiments use):
//   J(u) = 1/2 ||K u - v||^2 + (alpha/q) R_{q,eps}(u),
// otherwise the general form ||K u - v||^p + alpha R_{q,eps}(u).
// Norms are h-weighted throughout.
template <class Scalar>
struct TikhonovProblem {
  LinearOperator<Scalar> op;
  Signal<Scalar> data;
  Scalar p = Scalar(2);
  Scalar alpha = Scalar(0);
  PenaltySpec<Scalar> penalty;
  bool scaled_objective = true;
};

template <class Scalar>
void check_problem(const TikhonovProblem<Scalar>& problem) {
  if (!(problem.alpha >= Scalar(0)) || !std::isfinite(problem.alpha))
    throw std::invalid_argument("TikhonovProblem: alpha must be finite and >= 0");
  if (!(problem.p >= Scalar(1) && problem.p <= Scalar(2)))
    throw std::invalid_argument("TikhonovProblem: p must lie in [1, 2]");
  if (!same_grid(problem.data.grid, problem.op.range_grid))
    throw std::invalid_argument("TikhonovProblem: data does not live on the range grid");
  if (!same_grid(problem.penalty.reference.grid, problem.op.domain_grid))
    throw std::invalid_argument("TikhonovProblem: reference does not live on the domain grid");
}

template <class Scalar>
Scalar objective(const TikhonovProblem<Scalar>& problem, const Signal<Scalar>& u) {
  check_problem(problem);
  if (!same_grid(u.grid, problem.op.domain_grid))
    throw std::invalid_argument("objective: signal does not live on the domain grid");
  const Scalar h = problem.op.range_grid.h;
  Vector<Scalar> r(problem.op.range_grid.n);
  apply_into(problem.op, u.values, r);
  r -= problem.data.values;
  const Scalar rsq = r.squaredNorm();
  const Vector<Scalar> e = problem.penalty.tolerance.on(u.grid.n);
  const Scalar pen = penalty_value_raw(
      Vector<Scalar>(u.values - problem.penalty.reference.values), e, u.grid.h,
      problem.penalty.q);
  if (problem.scaled_objective)
    return Scalar(0.5) * h * rsq + (problem.alpha / problem.penalty.q) * pen;
  if (problem.p == Scalar(2)) return h * rsq + problem.alpha * pen;
  return std::pow(std::sqrt(h * rsq), problem.p) + problem.alpha * pen;
}

// A member of the subdifferential of J at u.  Shipped for p = 2 only.
template <class Scalar>
Signal<Scalar> objective_subgradient(const TikhonovProblem<Scalar>& problem,
                                     const Signal<Scalar>& u) {
  check_problem(problem);
  if (problem.p != Scalar(2))
    throw std::invalid_argument("objective_subgradient: only p = 2 is supported");
  if (!same_grid(u.grid, problem.op.domain_grid))
    throw std::invalid_argument("objective_subgradient: signal does not live on the domain grid");
  const Scalar h = problem.op.range_grid.h;
  Vector<Scalar> r(problem.op.range_grid.n);
  apply_into(problem.op, u.values, r);
  r -= problem.data.values;
  Signal<Scalar> g{u.grid, Vector<Scalar>(u.grid.n)};
  apply_adjoint_into(problem.op, r, g.values);
  const Scalar data_factor = problem.scaled_objective ? h : Scalar(2) * h;
  const Scalar pen_factor = problem.scaled_objective
                                ? problem.alpha / problem.penalty.q
                                : problem.alpha;
  Vector<Scalar> gp(u.grid.n);
  penalty_subgradient_into(
      Vector<Scalar>(u.values - problem.penalty.reference.values),
      Vector<Scalar>(problem.penalty.tolerance.on(u.grid.n)), u.grid.h,
      problem.penalty.q, gp);
  g.values = data_factor * g.values + pen_factor * gp;
  return g;
}

// Step schedule t_k = t0 / sqrt(k+1); when the running best stalls for
// `patience` iterations, t0 is multiplied by shrink_factor.  initial_step = 0
// selects t0 = 2 / (h (sigma_max^2 + alpha)) from a power-iteration estimate.
template <class Scalar>
struct SolverConfig {
  Index max_iters = 200000;
  Scalar initial_step = Scalar(0);
  Scalar shrink_factor = Scalar(0.5);
  Index patience = 50;
  Index window = 100;
  Scalar objective_tol = Scalar(1e-10);
  Scalar certificate_tol = Scalar(1e-3);
};

template <class Scalar>
struct SolveResult {
  Signal<Scalar> solution;  // best iterate by objective
  std::vector<Scalar> objective_history;
  std::vector<Scalar> residual_history;
  std::vector<Scalar> penalty_history;
  Index iterations_used = 0;
  bool converged = false;
  Scalar subgradient_norm = Scalar(0);  // Euclidean, at the returned iterate
};

template <class Scalar>
SolveResult<Scalar> minimize(const TikhonovProblem<Scalar>& problem,
                             const SolverConfig<Scalar>& config,
                             const Signal<Scalar>& u0) {
  check_problem(problem);
  if (problem.p != Scalar(2))
    throw std::invalid_argument("minimize: only p = 2 is supported");
  if (!same_grid(u0.grid, problem.op.domain_grid))
    throw std::invalid_argument("minimize: u0 does not live on the domain grid");
  if (config.max_iters < 1)
    throw std::invalid_argument("minimize: max_iters must be at least 1");
  if (!(config.shrink_factor > Scalar(0) && config.shrink_factor < Scalar(1)))
    throw std::invalid_argument("minimize: shrink_factor must lie in (0, 1)");

  const Scalar h = problem.op.domain_grid.h;
  const Scalar q = problem.penalty.q;
  const Scalar data_factor = problem.scaled_objective ? h : Scalar(2) * h;
  const Scalar pen_factor =
      problem.scaled_objective ? problem.alpha / q : problem.alpha;
  const Vector<Scalar> eps = problem.penalty.tolerance.on(u0.grid.n);
  const Vector<Scalar>& ustar = problem.penalty.reference.values;
  const Vector<Scalar>& v = problem.data.values;

  Scalar t0 = config.initial_step;
  if (!(t0 > Scalar(0))) {
    const Scalar smax2 = largest_singular_value_sq(problem.op);
    t0 = Scalar(2) / (h * (smax2 + problem.alpha));
  }

  const Index n = u0.grid.n;
  Vector<Scalar> u = u0.values;
  Vector<Scalar> r(problem.op.range_grid.n), g(n), gp(n), w(n);

  auto evaluate = [&](const Vector<Scalar>& x, Scalar& rho, Scalar& pen) {
    apply_into(problem.op, x, r);
    r -= v;
    const Scalar rsq = r.squaredNorm();
    rho = std::sqrt(h * rsq);
    w = x - ustar;
    pen = penalty_value_raw(w, eps, h, q);
    if (problem.scaled_objective)
      return Scalar(0.5) * h * rsq + (problem.alpha / q) * pen;
    return h * rsq + problem.alpha * pen;
  };

  SolveResult<Scalar> result;
  result.objective_history.reserve(std::size_t(config.max_iters) + 1);
  result.residual_history.reserve(std::size_t(config.max_iters) + 1);
  result.penalty_history.reserve(std::size_t(config.max_iters) + 1);

  Scalar rho, pen;
  Scalar f = evaluate(u, rho, pen);
  if (!std::isfinite(f))
    throw std::runtime_error("minimize: non-finite objective at the initial point");
  result.objective_history.push_back(f);
  result.residual_history.push_back(rho);
  result.penalty_history.push_back(pen);

  Vector<Scalar> best_u = u;
  Scalar best_f = f;
  Scalar window_best = best_f;
  Index stall = 0;
  bool stalled_stop = false;

  for (Index k = 0; k < config.max_iters; ++k) {
    // r and w hold the residual and u - u* of the current iterate
    apply_adjoint_into(problem.op, r, g);
    penalty_subgradient_into(w, eps, h, q, gp);
    g = data_factor * g + pen_factor * gp;

    const Scalar t = t0 / std::sqrt(Scalar(k + 1));
    u -= t * g;

    f = evaluate(u, rho, pen);
    result.objective_history.push_back(f);
    result.residual_history.push_back(rho);
    result.penalty_history.push_back(pen);
    if (!std::isfinite(f))
      throw std::runtime_error("minimize: objective became non-finite at iteration " +
                               std::to_string(k + 1));

    if (f < best_f) {
      best_f = f;
      best_u = u;
      stall = 0;
    } else if (++stall >= config.patience) {
      t0 *= config.shrink_factor;
      stall = 0;
    }

    result.iterations_used = k + 1;
    if ((k + 1) % config.window == 0) {
      const Scalar floor = std::max(std::abs(window_best), Scalar(1e-300));
      if (window_best - best_f <= config.objective_tol * floor) {
        stalled_stop = true;
        break;
      }
      window_best = best_f;
    }
  }

  result.solution = Signal<Scalar>{u0.grid, std::move(best_u)};
  result.subgradient_norm =
      objective_subgradient(problem, result.solution).values.norm();
  // A small subgradient certifies the q = 2 stop; for q = 1 the selection need
  // not vanish at the minimizer, so the stall criterion stands on its own.
  result.converged =
      stalled_stop &&
      (q != Scalar(2) || result.subgradient_norm <= config.certificate_tol);
  return result;
}

template <class Scalar>
SolveResult<Scalar> minimize(const TikhonovProblem<Scalar>& problem,
                             const SolverConfig<Scalar>& config) {
  return minimize(problem, config, problem.penalty.reference);
}

}  // namespace tolreg
