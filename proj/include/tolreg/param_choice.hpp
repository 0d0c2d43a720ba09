#pragma once

// Regularization-parameter selection: the L-curve corner by maximum discrete
// curvature and Morozov's discrepancy principle (classical-transfer and
// direct variants).

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "tolreg/solver.hpp"

namespace tolreg {

template <class Scalar>
struct AlphaGrid {
  Vector<Scalar> values;  // strictly increasing, all positive
};

template <class Scalar>
AlphaGrid<Scalar> make_alpha_grid(Vector<Scalar> values) {
  if (values.size() == 0)
    throw std::invalid_argument("AlphaGrid: empty grid");
  for (Index i = 0; i < values.size(); ++i) {
    if (!(values[i] > Scalar(0)) || !std::isfinite(values[i]))
      throw std::invalid_argument("AlphaGrid: entries must be positive and finite");
    if (i > 0 && !(values[i] > values[i - 1]))
      throw std::invalid_argument("AlphaGrid: entries must be strictly increasing");
  }
  return AlphaGrid<Scalar>{std::move(values)};
}

template <class Scalar>
AlphaGrid<Scalar> log_spaced_alphas(Scalar lo, Scalar hi, Index count) {
  if (!(lo > Scalar(0)) || !(hi > lo))
    throw std::invalid_argument("log_spaced_alphas: need 0 < lo < hi");
  if (count < 2)
    throw std::invalid_argument("log_spaced_alphas: need at least 2 points");
  Vector<Scalar> values(count);
  const Scalar llo = std::log(lo), lhi = std::log(hi);
  for (Index i = 0; i < count; ++i)
    values[i] = std::exp(llo + (lhi - llo) * Scalar(i) / Scalar(count - 1));
  values[0] = lo;  // avoid exp/log drift at the endpoints
  values[count - 1] = hi;
  return make_alpha_grid(std::move(values));
}

// Solves the problem handed to it (alpha and tolerance already set) and
// returns the reconstruction.  Lets tests substitute direct solvers.
template <class Scalar>
using SolveCallback =
    std::function<Vector<Scalar>(const TikhonovProblem<Scalar>&)>;

template <class Scalar>
SolveCallback<Scalar> subgradient_solver(const SolverConfig<Scalar>& config) {
  return [config](const TikhonovProblem<Scalar>& problem) {
    return minimize(problem, config).solution.values;
  };
}

template <class Scalar>
struct LCurvePoint {
  Scalar alpha;
  Scalar residual_norm;  // ||K u_a - v||, weighted 2-norm
  Scalar penalty_norm;   // ||u_a - u*||_{q,eps}
};

template <class Scalar>
struct LCurveResult {
  std::vector<LCurvePoint<Scalar>> points;
  std::optional<Scalar> corner_alpha;
  std::optional<std::size_t> corner_index;  // into points
};

// Signed Menger curvature of the circle through three points: 2 cross / product
// of side lengths.  Traversing an L-curve with increasing alpha, the corner
// carries positive sign.
template <class Scalar>
Scalar menger_curvature(Scalar x1, Scalar y1, Scalar x2, Scalar y2, Scalar x3,
                        Scalar y3) {
  const Scalar cross = (x2 - x1) * (y3 - y2) - (y2 - y1) * (x3 - x2);
  const Scalar d12 = std::hypot(x2 - x1, y2 - y1);
  const Scalar d23 = std::hypot(x3 - x2, y3 - y2);
  const Scalar d13 = std::hypot(x3 - x1, y3 - y1);
  const Scalar denom = d12 * d23 * d13;
  if (denom == Scalar(0)) return Scalar(0);
  return Scalar(2) * cross / denom;
}

// One solve per grid alpha; the corner is the interior point of maximum
// discrete curvature on the (log residual, log penalty) polyline.  Points with
// penalty_norm = 0 (or residual_norm = 0) have no logarithm and are excluded
// from corner detection but still reported.
template <class Scalar>
LCurveResult<Scalar> lcurve(const TikhonovProblem<Scalar>& problem_template,
                            const AlphaGrid<Scalar>& alphas,
                            const SolveCallback<Scalar>& solve) {
  check_problem(problem_template);
  LCurveResult<Scalar> result;
  const Scalar h = problem_template.op.range_grid.h;
  const Vector<Scalar> eps =
      problem_template.penalty.tolerance.on(problem_template.op.domain_grid.n);
  Vector<Scalar> r(problem_template.op.range_grid.n);
  for (Index i = 0; i < alphas.values.size(); ++i) {
    TikhonovProblem<Scalar> problem = problem_template;
    problem.alpha = alphas.values[i];
    const Vector<Scalar> u = solve(problem);
    apply_into(problem.op, u, r);
    r -= problem.data.values;
    const Scalar rho = std::sqrt(h * r.squaredNorm());
    const Scalar pn = eps_measure(
        Vector<Scalar>(u - problem.penalty.reference.values), eps,
        problem.op.domain_grid.h, problem.penalty.q);
    result.points.push_back(LCurvePoint<Scalar>{problem.alpha, rho, pn});
  }

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < result.points.size(); ++i)
    if (result.points[i].penalty_norm > Scalar(0) &&
        result.points[i].residual_norm > Scalar(0))
      usable.push_back(i);
  if (usable.size() < 3) return result;

  Scalar best_kappa = -std::numeric_limits<Scalar>::infinity();
  std::size_t best = usable[1];
  for (std::size_t j = 1; j + 1 < usable.size(); ++j) {
    const auto& p1 = result.points[usable[j - 1]];
    const auto& p2 = result.points[usable[j]];
    const auto& p3 = result.points[usable[j + 1]];
    const Scalar kappa = menger_curvature(
        std::log(p1.residual_norm), std::log(p1.penalty_norm),
        std::log(p2.residual_norm), std::log(p2.penalty_norm),
        std::log(p3.residual_norm), std::log(p3.penalty_norm));
    if (kappa > best_kappa) {
      best_kappa = kappa;
      best = usable[j];
    }
  }
  result.corner_index = best;
  result.corner_alpha = result.points[best].alpha;
  return result;
}

template <class Scalar>
struct DiscrepancyReport {
  AlphaGrid<Scalar> alpha_grid;
  Vector<Scalar> g_values;  // G(u_a) = ||K u_a - v|| per alpha
  Scalar threshold;         // tau * delta
  std::optional<Scalar> alpha_opt;
  std::optional<Index> opt_index;
  bool monotone = false;  // whether g_values is non-decreasing in alpha
};

// Largest grid alpha with G(u_a) <= tau delta.  With use_tolerance off the
// per-alpha solves use eps = 0 (the transfer protocol); on, the given
// tolerance (direct protocol).  G is observed non-monotone with tolerances,
// hence the grid search rather than bisection.
template <class Scalar>
DiscrepancyReport<Scalar> morozov_select(
    const TikhonovProblem<Scalar>& problem_template,
    const AlphaGrid<Scalar>& alphas, Scalar tau, Scalar delta,
    bool use_tolerance, const SolveCallback<Scalar>& solve) {
  check_problem(problem_template);
  if (!(tau >= Scalar(1)))
    throw std::invalid_argument("morozov_select: tau must be >= 1");
  if (!(delta > Scalar(0)))
    throw std::invalid_argument("morozov_select: delta must be positive");

  TikhonovProblem<Scalar> base = problem_template;
  if (!use_tolerance)
    base.penalty.tolerance = ToleranceProfile<Scalar>(Scalar(0));

  const Scalar h = base.op.range_grid.h;
  const Index m = alphas.values.size();
  DiscrepancyReport<Scalar> report{alphas, Vector<Scalar>(m), tau * delta,
                                   std::nullopt, std::nullopt, true};
  Vector<Scalar> r(base.op.range_grid.n);
  for (Index i = 0; i < m; ++i) {
    TikhonovProblem<Scalar> problem = base;
    problem.alpha = alphas.values[i];
    const Vector<Scalar> u = solve(problem);
    apply_into(problem.op, u, r);
    r -= problem.data.values;
    report.g_values[i] = std::sqrt(h * r.squaredNorm());
    if (report.g_values[i] <= report.threshold) {
      report.alpha_opt = alphas.values[i];
      report.opt_index = i;
    }
    if (i > 0 && report.g_values[i] < report.g_values[i - 1])
      report.monotone = false;
  }
  return report;
}

}  // namespace tolreg
