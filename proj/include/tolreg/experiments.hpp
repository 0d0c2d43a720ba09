#pragma once

// The desk-scale studies: fixed-norm noise, smooth tube samples, the
// mean-error-vs-eps sweep, the empirical convergence-rate ladder, and the
// Fourier coefficient demonstration.

#include <cstdint>
#include <string>
#include <vector>

#include "tolreg/solver.hpp"

namespace tolreg {

// Deterministic named substream derived from one master seed; "noise", "tube"
// and the run index each get an independent stream.
std::uint64_t substream_seed(std::uint64_t seed, const std::string& tag,
                             std::uint64_t index);

struct NoiseModel {
  double delta;
  std::uint64_t seed;
  std::string mode = "fixed-norm-gaussian";
};

// v + g (delta / ||g||) for seeded standard Gaussian g, so the weighted
// 2-norm of the perturbation is exactly delta.
Signal<double> add_noise(const Signal<double>& v, const NoiseModel& model);

struct TubeSampler {
  Signal<double> reference;  // u*
  double eps;
  double sigma = 0.08;  // Gaussian kernel width of the smoothing convolution
  std::uint64_t seed = 0;
};

// u* + eps eta with eta Gaussian-smoothed white noise rescaled to sup-norm 1,
// so |u - u*| <= eps holds pointwise up to rounding.
Signal<double> sample_tube(const TubeSampler& sampler);

struct SweepConfig {
  double q = 1;
  std::vector<double> eps_values = {0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
  Index runs = 50;
  double delta = 0.005;
  double alpha = 0.001;
  double tube_sigma = 0.08;
  SolverConfig<double> solver;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct SweepReport {
  std::vector<double> eps_values;
  std::vector<double> mean_error_tol, mean_error_classical;
  std::vector<double> stderr_tol, stderr_classical;
  Index runs = 0;
  double q = 0, delta = 0, alpha = 0;
};

// For each eps: `runs` independent (tube sample, noisy data) draws, solved
// with the tolerance penalty and with the classical penalty (eps = 0, same
// data); errors are ||u - u_true||_{q,eps} in the sweep's eps.
SweepReport error_sweep(const Signal<double>& reference, const SweepConfig& config);

struct RateConfig {
  double q = 2;
  double eps = 0.3;
  double delta0 = 0.05;
  double c = 0.1;  // alpha_k = c * delta_k
  Index levels = 7;
  double tube_sigma = 0.08;
  SolverConfig<double> solver;
  std::uint64_t seed = 1;
};

struct RateReport {
  std::vector<double> deltas;
  std::vector<double> bregman_values, residual_values;
  double bregman_slope = 0, residual_slope = 0;
  Index bregman_fit_points = 0, residual_fit_points = 0;
};

// delta_k = delta0 2^-k ladder with one noise direction rescaled per rung;
// per rung the tolerance problem is solved at alpha = c delta_k and the
// Bregman distance to the tube sample (subgradient taken there) and the data
// residual are recorded.  Slopes are least-squares fits on the log-log points;
// non-positive values cannot enter the fit and are skipped.
RateReport rate_study(const Signal<double>& reference, const RateConfig& config);

// Least-squares slope of log(y) against log(x) over pairs with y > 0; the
// number of pairs used is reported through fit_points.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                        Index& fit_points);

struct FourierTable {
  double eps = 0;
  Index terms = 0;
  Index samples = 0;
  // Coefficients of sin(t) and of d_eps(sin(t)) on [-2pi, 2pi]:
  // a[n] for n = 0..terms, b[n] for n = 1..terms (b[0] is kept zero).
  std::vector<double> a_plain, b_plain, a_tol, b_tol;
  Index nonzero_plain = 0, nonzero_tol = 0;  // entries with |c| > 1e-8
};

// a_n = (1/2pi) integral f cos(nt) dt and b_n likewise with sin, over
// [-2pi, 2pi], by the composite midpoint rule with `samples` points.
FourierTable fourier_demo(double eps, Index n_terms, Index samples = 262144);

}  // namespace tolreg
