#pragma once

// Grids, signals, h-weighted discrete norms, and dense linear operators,
// including the cumulative-integration operator used by the experiments.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <type_traits>
#include <utility>

namespace tolreg {

using Index = Eigen::Index;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Midpoint discretization of [a, b]: x_i = a + (i - 1/2) h with h = (b - a)/n.
template <class Scalar>
struct Grid {
  Index n = 0;
  Scalar a = Scalar(0);
  Scalar b = Scalar(1);
  Scalar h = Scalar(0);
  Vector<Scalar> nodes;
};

template <class Scalar>
Grid<Scalar> make_grid(Index n, Scalar a, Scalar b) {
  if (n < 1) throw std::invalid_argument("make_grid: n must be at least 1");
  if (!(a < b)) throw std::invalid_argument("make_grid: need a < b");
  Grid<Scalar> g;
  g.n = n;
  g.a = a;
  g.b = b;
  g.h = (b - a) / Scalar(n);
  g.nodes.resize(n);
  for (Index i = 0; i < n; ++i)
    g.nodes[i] = a + (Scalar(i) + Scalar(0.5)) * g.h;
  return g;
}

template <class Scalar>
bool same_grid(const Grid<Scalar>& g1, const Grid<Scalar>& g2) {
  return g1.n == g2.n && g1.a == g2.a && g1.b == g2.b;
}

// A real-valued function sampled on a grid.
template <class Scalar>
struct Signal {
  Grid<Scalar> grid;
  Vector<Scalar> values;
};

template <class Scalar>
Signal<Scalar> make_signal(Grid<Scalar> grid, Vector<Scalar> values) {
  if (values.size() != grid.n)
    throw std::invalid_argument("make_signal: value count does not match grid");
  if (!values.allFinite())
    throw std::invalid_argument("make_signal: non-finite values");
  return Signal<Scalar>{std::move(grid), std::move(values)};
}

template <class Scalar, class Derived>
  requires(!std::is_same_v<Derived, Vector<Scalar>>)
Signal<Scalar> make_signal(Grid<Scalar> grid,
                           const Eigen::MatrixBase<Derived>& values) {
  return make_signal(std::move(grid), Vector<Scalar>(values));
}

template <class Scalar>
void check_exponent(Scalar q) {
  if (!(q >= Scalar(1) && q <= Scalar(2)))
    throw std::invalid_argument("exponent q must lie in [1, 2]");
}

// (h sum_i |u_i|^q)^(1/q); the h weight makes the value a quadrature
// approximation of the continuum L_q norm on [a, b].
template <class Scalar, class Derived>
Scalar weighted_norm(const Eigen::MatrixBase<Derived>& u, Scalar h, Scalar q) {
  check_exponent(q);
  if (q == Scalar(2)) return std::sqrt(h * u.squaredNorm());
  if (q == Scalar(1)) return h * u.cwiseAbs().sum();
  return std::pow(h * u.array().abs().pow(q).sum(), Scalar(1) / q);
}

template <class Scalar>
Scalar weighted_norm(const Signal<Scalar>& u, Scalar q) {
  return weighted_norm(u.values, u.grid.h, q);
}

// h-weighted inner product, consistent with weighted_norm at q = 2.
template <class Scalar, class D1, class D2>
Scalar weighted_inner(const Eigen::MatrixBase<D1>& u,
                      const Eigen::MatrixBase<D2>& v, Scalar h) {
  return h * u.dot(v);
}

template <class Scalar>
Scalar weighted_inner(const Signal<Scalar>& u, const Signal<Scalar>& v) {
  if (!same_grid(u.grid, v.grid))
    throw std::invalid_argument("weighted_inner: grid mismatch");
  return weighted_inner(u.values, v.values, u.grid.h);
}

// Structure tag: the cumulative-integration operator admits an O(n)
// evaluation path in place of the dense matrix product.
enum class OperatorKind { dense, lower_integration };

template <class Scalar>
struct LinearOperator {
  Matrix<Scalar> matrix;
  Grid<Scalar> domain_grid;
  Grid<Scalar> range_grid;
  OperatorKind kind = OperatorKind::dense;
};

template <class Scalar>
LinearOperator<Scalar> make_operator(Matrix<Scalar> matrix, Grid<Scalar> domain,
                                     Grid<Scalar> range) {
  if (matrix.rows() != range.n || matrix.cols() != domain.n)
    throw std::invalid_argument("make_operator: matrix dimensions do not match grids");
  if (!matrix.allFinite())
    throw std::invalid_argument("make_operator: non-finite entries");
  return LinearOperator<Scalar>{std::move(matrix), std::move(domain),
                                std::move(range), OperatorKind::dense};
}

template <class Scalar, class Derived>
  requires(!std::is_same_v<Derived, Matrix<Scalar>>)
LinearOperator<Scalar> make_operator(const Eigen::MatrixBase<Derived>& matrix,
                                     Grid<Scalar> domain, Grid<Scalar> range) {
  return make_operator(Matrix<Scalar>(matrix), std::move(domain),
                       std::move(range));
}

// Midpoint discretization of u -> int_a^x u(s) ds:
// K[i][j] = h for j < i, h/2 for j = i, 0 above the diagonal.
template <class Scalar>
LinearOperator<Scalar> integration_operator(const Grid<Scalar>& grid) {
  const Index n = grid.n;
  Matrix<Scalar> k = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) k(i, j) = grid.h;
    k(i, i) = grid.h / Scalar(2);
  }
  LinearOperator<Scalar> op{std::move(k), grid, grid, OperatorKind::lower_integration};
  return op;
}

// (K u)_i = h (S_i - u_i / 2) with the running prefix sum S_i = sum_{j<=i} u_j.
template <class Scalar>
void apply_integration(const Vector<Scalar>& u, Scalar h, Vector<Scalar>& out) {
  const Index n = u.size();
  Scalar run = Scalar(0);
  for (Index i = 0; i < n; ++i) {
    run += u[i];
    out[i] = h * (run - u[i] / Scalar(2));
  }
}

// (K^T v)_i = h (T_i - v_i / 2) with the suffix sum T_i = sum_{j>=i} v_j.
template <class Scalar>
void apply_integration_adjoint(const Vector<Scalar>& v, Scalar h,
                               Vector<Scalar>& out) {
  const Index n = v.size();
  Scalar run = Scalar(0);
  for (Index i = n - 1; i >= 0; --i) {
    run += v[i];
    out[i] = h * (run - v[i] / Scalar(2));
  }
}

template <class Scalar>
void apply_into(const LinearOperator<Scalar>& op, const Vector<Scalar>& u,
                Vector<Scalar>& out) {
  if (u.size() != op.domain_grid.n)
    throw std::invalid_argument("apply: signal does not live on the domain grid");
  out.resize(op.range_grid.n);
  if (op.kind == OperatorKind::lower_integration)
    apply_integration(u, op.domain_grid.h, out);
  else
    out.noalias() = op.matrix * u;
}

template <class Scalar>
void apply_adjoint_into(const LinearOperator<Scalar>& op, const Vector<Scalar>& v,
                        Vector<Scalar>& out) {
  if (v.size() != op.range_grid.n)
    throw std::invalid_argument("apply_adjoint: signal does not live on the range grid");
  out.resize(op.domain_grid.n);
  if (op.kind == OperatorKind::lower_integration)
    apply_integration_adjoint(v, op.range_grid.h, out);
  else
    out.noalias() = op.matrix.transpose() * v;
}

template <class Scalar>
Signal<Scalar> apply(const LinearOperator<Scalar>& op, const Signal<Scalar>& u) {
  if (!same_grid(u.grid, op.domain_grid))
    throw std::invalid_argument("apply: signal does not live on the domain grid");
  Signal<Scalar> out{op.range_grid, Vector<Scalar>(op.range_grid.n)};
  apply_into(op, u.values, out.values);
  return out;
}

template <class Scalar>
Signal<Scalar> apply_adjoint(const LinearOperator<Scalar>& op,
                             const Signal<Scalar>& v) {
  if (!same_grid(v.grid, op.range_grid))
    throw std::invalid_argument("apply_adjoint: signal does not live on the range grid");
  Signal<Scalar> out{op.domain_grid, Vector<Scalar>(op.domain_grid.n)};
  apply_adjoint_into(op, v.values, out.values);
  return out;
}

// Largest eigenvalue of K^T K by deterministic power iteration; used to scale
// solver step sizes.
template <class Scalar>
Scalar largest_singular_value_sq(const LinearOperator<Scalar>& op,
                                 Index max_iters = 300, Scalar tol = Scalar(1e-13)) {
  const Index n = op.domain_grid.n;
  Vector<Scalar> x = Vector<Scalar>::Constant(n, Scalar(1) / std::sqrt(Scalar(n)));
  Vector<Scalar> y(op.range_grid.n), z(n);
  Scalar lambda = Scalar(0);
  for (Index it = 0; it < max_iters; ++it) {
    apply_into(op, x, y);
    apply_adjoint_into(op, y, z);
    const Scalar next = x.dot(z);
    const Scalar nz = z.norm();
    if (nz == Scalar(0)) return Scalar(0);
    x = z / nz;
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace tolreg
