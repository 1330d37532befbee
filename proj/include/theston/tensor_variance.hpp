#pragma once

// The rank-one operator variance process V(t) = Y(t) (x) Y(t): construction
// from its factor, the explicit square root, Cholesky-type factors
// Gamma_Z = Z (x) Y, the drift of V in its two equivalent forms, one Euler
// step of the coupled (Y, V) system, and the Frechet-derivative residuals of
// v(y) = y (x) y.

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "theston/errors.hpp"
#include "theston/hilbert.hpp"
#include "theston/ou.hpp"

namespace theston {

// Rank-one variance state, stored by its factor; the dense matrix is
// materialized on demand.
struct TensorVariance {
  HVector factor;

  OperatorMatrix matrix() const { return factor * factor.transpose(); }
  double norm() const { return factor.squaredNorm(); }  // ||V|| = |Y|^2
};

inline TensorVariance variance_of(HVector y) { return {std::move(y)}; }

// V^{1/2} = |Y|^{-1} V for Y != 0, zero otherwise.
inline OperatorMatrix sqrt_V(const TensorVariance& v) {
  double len = v.factor.norm();
  int n = static_cast<int>(v.factor.size());
  if (len == 0.0) return OperatorMatrix::Zero(n, n);
  return (v.factor / len) * v.factor.transpose();
}

// f |-> |f|^{-1} f (x) f, continuously extended by 0 at the origin.
inline OperatorMatrix f_map(const HVector& f) {
  double len = f.norm();
  int n = static_cast<int>(f.size());
  if (len == 0.0) return OperatorMatrix::Zero(n, n);
  return (f / len) * f.transpose();
}

inline constexpr double kUnitTol = 1e-12;

// Gamma_Z = Z (x) Y with |Z| = 1; satisfies Gamma_Z Gamma_Z^* = Y (x) Y.
inline OperatorMatrix gamma_factor(const HVector& z, const HVector& y) {
  require_same_dim(z, y);
  if (std::abs(z.norm() - 1.0) > kUnitTol)
    throw DomainError("gamma_factor: Z must lie on the unit sphere");
  return y * z.transpose();
}

// Direction process for the Cholesky factor: a fixed unit vector, or the
// normalized driver with the 0/0 convention resolved to the first basis
// vector (an event of probability zero).
struct UnitProcessSpec {
  enum class Kind { kConstantGamma, kNormalizedY };

  Kind kind = Kind::kNormalizedY;
  HVector gamma;  // used only for kConstantGamma

  static UnitProcessSpec constant(HVector g) {
    if (std::abs(g.norm() - 1.0) > kUnitTol)
      throw DomainError("UnitProcessSpec: gamma must have unit norm");
    return {Kind::kConstantGamma, std::move(g)};
  }
  static UnitProcessSpec normalized_y() { return {Kind::kNormalizedY, {}}; }

  HVector direction(const HVector& y) const {
    if (kind == Kind::kConstantGamma) return gamma;
    double len = y.norm();
    if (len == 0.0) {
      HVector e1 = HVector::Zero(y.size());
      e1[0] = 1.0;
      return e1;
    }
    return y / len;
  }

  // |Q_B^{1/2} Z|^2 for the direction attached to the state y.
  double qb_norm2(const OperatorMatrix& q_b, const HVector& y) const {
    HVector z = direction(y);
    return z.dot(q_b * z);
  }
};

// Drift of V at a rank-one state: A y (x) y + y (x) A y + eta Q_W eta^T.
inline OperatorMatrix phi_drift(const OUSpec& spec, const HVector& y) {
  HVector ay = spec.A * y;
  return tensor(ay, y) + tensor(y, ay) + spec.noise_cov();
}

// The same drift written through operator compositions:
// A V A^T + V - (A - I) V (A^T - I) + eta Q_W eta^T. Agrees with phi_drift
// exactly on rank-one V.
inline OperatorMatrix phi_drift_operator_form(const OUSpec& spec, const OperatorMatrix& v) {
  int n = spec.dim();
  OperatorMatrix a_shift = spec.A - OperatorMatrix::Identity(n, n);
  return spec.A * v * spec.A.transpose() + v - a_shift * v * a_shift.transpose() +
         spec.noise_cov();
}

struct TensorStep {
  HVector y_next;
  OperatorMatrix v_next;
};

// One Euler step of the coupled system on a shared noise increment
// dW = eta Q_W^{1/2} xi sqrt(dt):
//   Y' = Y + A Y dt + dW
//   V' = V + Phi(Y) dt + dW (x) Y + Y (x) dW
inline TensorStep tensor_sde_step(const OUSpec& spec, const HVector& y,
                                  const OperatorMatrix& v, const HVector& dw, double dt) {
  TensorStep out;
  out.y_next = detail::euler_step_Y(spec.A, y, dw, dt);
  out.v_next = v + dt * phi_drift(spec, y) + tensor(dw, y) + tensor(y, dw);
  return out;
}

struct FrechetCheck {
  double err1;  // ||v(y+h) - v(y) - (h (x) y + y (x) h)||, equals |h|^2
  double err2;  // sup over probe directions of the second-order residual, equals 0
};

// Residuals of the first and second derivative candidates of v(y) = y (x) y.
// The second-order residual is probed over the basis directions plus one
// mixed direction.
inline FrechetCheck frechet_check(const HVector& y, const HVector& h) {
  require_same_dim(y, h);
  int n = static_cast<int>(y.size());
  HVector yh = y + h;
  OperatorMatrix first = tensor(yh, yh) - tensor(y, y) - tensor(h, y) - tensor(y, h);
  FrechetCheck out{first.norm(), 0.0};
  auto second_residual = [&](const HVector& xi) {
    OperatorMatrix r = tensor(xi, yh) + tensor(yh, xi) - tensor(xi, y) - tensor(y, xi) -
                       tensor(h, xi) - tensor(xi, h);
    return r.norm();
  };
  for (int i = 0; i < n; ++i) {
    HVector e = HVector::Zero(n);
    e[i] = 1.0;
    out.err2 = std::max(out.err2, second_residual(e));
  }
  out.err2 = std::max(out.err2, second_residual(HVector::Constant(n, 1.0 / std::sqrt(n))));
  return out;
}

}  // namespace theston
