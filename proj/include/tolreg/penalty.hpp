#pragma once

// The eps-insensitive modulus d_eps(x) = max(|x| - eps, 0), the L_{q,eps}
// measure, the tolerance penalty R_{q,eps}(u) = ||u - u*||^q_{q,eps}, one
// measurable selection from its subdifferential, and Bregman distances.

#include <string>

#include "tolreg/core.hpp"

namespace tolreg {

// Scalar eps broadcasts to any grid; a vector profile is tied to its length.
template <class Scalar>
class ToleranceProfile {
 public:
  explicit ToleranceProfile(Scalar eps) : scalar_(eps), is_scalar_(true) {
    if (!(eps >= Scalar(0)) || !std::isfinite(eps))
      throw std::invalid_argument("ToleranceProfile: eps must be finite and >= 0");
  }
  explicit ToleranceProfile(Vector<Scalar> eps)
      : vector_(std::move(eps)), is_scalar_(false) {
    if (vector_.size() == 0)
      throw std::invalid_argument("ToleranceProfile: empty profile");
    if (!vector_.allFinite() || (vector_.array() < Scalar(0)).any())
      throw std::invalid_argument("ToleranceProfile: entries must be finite and >= 0");
  }

  bool is_scalar() const { return is_scalar_; }
  Scalar scalar_value() const {
    if (!is_scalar_)
      throw std::logic_error("ToleranceProfile: not a scalar profile");
    return scalar_;
  }

  // Materialize per-sample values for a signal of length n.
  Vector<Scalar> on(Index n) const {
    if (is_scalar_) return Vector<Scalar>::Constant(n, scalar_);
    if (vector_.size() != n)
      throw std::invalid_argument("ToleranceProfile: profile length does not match signal");
    return vector_;
  }

 private:
  Scalar scalar_ = Scalar(0);
  Vector<Scalar> vector_;
  bool is_scalar_ = true;
};

// Houses R_{q,eps}: exponent q in [1,2], reference u*, tolerance profile.
template <class Scalar>
struct PenaltySpec {
  Scalar q;
  Signal<Scalar> reference;
  ToleranceProfile<Scalar> tolerance;
};

template <class Scalar>
PenaltySpec<Scalar> make_penalty_spec(Scalar q, Signal<Scalar> reference,
                                      ToleranceProfile<Scalar> tolerance) {
  check_exponent(q);
  tolerance.on(reference.grid.n);  // validates vector-profile length
  return PenaltySpec<Scalar>{q, std::move(reference), std::move(tolerance)};
}

// d_eps componentwise on raw vectors.
template <class Scalar>
void eps_modulus_into(const Vector<Scalar>& x, const Vector<Scalar>& eps,
                      Vector<Scalar>& out) {
  out = (x.array().abs() - eps.array()).max(Scalar(0)).matrix();
}

template <class Scalar>
Signal<Scalar> eps_modulus(const Signal<Scalar>& x,
                           const ToleranceProfile<Scalar>& eps) {
  Signal<Scalar> out{x.grid, Vector<Scalar>(x.grid.n)};
  const Vector<Scalar> e = eps.on(x.grid.n);
  eps_modulus_into(x.values, e, out.values);
  return out;
}

// (h sum_i d_{eps_i}(u_i)^q)^(1/q).
template <class Scalar>
Scalar eps_measure(const Vector<Scalar>& u, const Vector<Scalar>& eps, Scalar h,
                   Scalar q) {
  check_exponent(q);
  Vector<Scalar> d(u.size());
  eps_modulus_into(u, eps, d);
  return weighted_norm(d, h, q);
}

template <class Scalar>
Scalar eps_measure(const Signal<Scalar>& u, Scalar q,
                   const ToleranceProfile<Scalar>& eps) {
  return eps_measure(u.values, eps.on(u.grid.n), u.grid.h, q);
}

// R_{q,eps} on the raw difference w = u - u*: h sum_i d_{eps_i}(w_i)^q.
template <class Scalar>
Scalar penalty_value_raw(const Vector<Scalar>& w, const Vector<Scalar>& eps,
                         Scalar h, Scalar q) {
  const auto d = (w.array().abs() - eps.array()).max(Scalar(0));
  if (q == Scalar(1)) return h * d.sum();
  if (q == Scalar(2)) return h * d.square().sum();
  return h * d.pow(q).sum();
}

template <class Scalar>
Scalar penalty_value(const Signal<Scalar>& u, const PenaltySpec<Scalar>& spec) {
  if (!same_grid(u.grid, spec.reference.grid))
    throw std::invalid_argument("penalty_value: signal grid does not match reference");
  check_exponent(spec.q);
  const Vector<Scalar> e = spec.tolerance.on(u.grid.n);
  return penalty_value_raw(Vector<Scalar>(u.values - spec.reference.values), e,
                           u.grid.h, spec.q);
}

// One measurable selection from the subdifferential of R_{q,eps}, on the raw
// difference w = u - u*.  Componentwise with d_i = max(|w_i| - eps_i, 0):
//   q = 1:        sign(w_i) where d_i > 0,             else 0
//   general q:    q d_i^(q-1) sign(w_i) where d_i > 0, else 0
// At kinks |w_i| = eps_i the interval of admissible values contains 0 and we
// select it.  Each component carries the h weight so the result is the exact
// (sub)gradient of the h-weighted discrete penalty.
template <class Scalar>
void penalty_subgradient_into(const Vector<Scalar>& w, const Vector<Scalar>& eps,
                              Scalar h, Scalar q, Vector<Scalar>& out) {
  const Index n = w.size();
  out.resize(n);
  if (q == Scalar(1)) {
    for (Index i = 0; i < n; ++i) {
      const Scalar d = std::abs(w[i]) - eps[i];
      out[i] = d > Scalar(0) ? (w[i] > Scalar(0) ? h : -h) : Scalar(0);
    }
  } else if (q == Scalar(2)) {
    for (Index i = 0; i < n; ++i) {
      const Scalar d = std::abs(w[i]) - eps[i];
      out[i] = d > Scalar(0)
                   ? Scalar(2) * h * d * (w[i] > Scalar(0) ? Scalar(1) : Scalar(-1))
                   : Scalar(0);
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      const Scalar d = std::abs(w[i]) - eps[i];
      out[i] = d > Scalar(0)
                   ? q * h * std::pow(d, q - Scalar(1)) *
                         (w[i] > Scalar(0) ? Scalar(1) : Scalar(-1))
                   : Scalar(0);
    }
  }
}

// A chosen member xi of the subdifferential, with the rule used at kinks.
template <class Scalar>
struct Subgradient {
  Signal<Scalar> element;
  std::string selection_rule;
};

template <class Scalar>
Subgradient<Scalar> penalty_subgradient(const Signal<Scalar>& u,
                                        const PenaltySpec<Scalar>& spec) {
  if (!same_grid(u.grid, spec.reference.grid))
    throw std::invalid_argument("penalty_subgradient: signal grid does not match reference");
  check_exponent(spec.q);
  const Vector<Scalar> e = spec.tolerance.on(u.grid.n);
  Signal<Scalar> xi{u.grid, Vector<Scalar>(u.grid.n)};
  penalty_subgradient_into(Vector<Scalar>(u.values - spec.reference.values), e,
                           u.grid.h, spec.q, xi.values);
  return Subgradient<Scalar>{std::move(xi), "zero-at-kink"};
}

// D_xi(u_test, u_base) = R(u_test) - R(u_base) - <xi, u_test - u_base>, for a
// subgradient xi of R at u_base.  xi already carries the h weight, so the
// pairing is the plain Euclidean dot product.
template <class Scalar>
Scalar bregman_distance(const Signal<Scalar>& u_test, const Signal<Scalar>& u_base,
                        const PenaltySpec<Scalar>& spec,
                        const Subgradient<Scalar>& xi) {
  if (!same_grid(u_test.grid, u_base.grid) ||
      !same_grid(u_test.grid, spec.reference.grid) ||
      !same_grid(u_test.grid, xi.element.grid))
    throw std::invalid_argument("bregman_distance: grid mismatch");
  const Scalar r_test = penalty_value(u_test, spec);
  const Scalar r_base = penalty_value(u_base, spec);
  const Scalar pairing = xi.element.values.dot(u_test.values - u_base.values);
  return r_test - r_base - pairing;
}

}  // namespace tolreg
