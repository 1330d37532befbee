#pragma once

// Projection of the operator variance process to the real line along a fixed
// direction f: the functional L_f(T) = <T f, f>, the projected square-root
// dynamics, and the constant-coefficient square-root diffusion obtained when
// f is an eigenvector of A^T.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "theston/errors.hpp"
#include "theston/hilbert.hpp"
#include "theston/ou.hpp"
#include "theston/parallel.hpp"
#include "theston/rng.hpp"
#include "theston/tensor_variance.hpp"

namespace theston {

// L_f(T) = <T f, f>.
inline double project(const OperatorMatrix& t, const HVector& f) {
  if (t.cols() != f.size()) throw DimensionError("project: dimension mismatch");
  return f.dot(t * f);
}

// Rank-one overload: L_f(Y (x) Y) = <Y,f>^2, computed through the factor so
// nonnegativity is exact.
inline double project(const TensorVariance& v, const HVector& f) {
  double p = inner(v.factor, f);
  return p * p;
}

struct CIRParams {
  double b;      // constant drift, |Q_W^{1/2} eta^T f|^2
  double kappa;  // linear drift coefficient, 2*lambda
  double xi;     // diffusion coefficient, 2*sqrt(b)
  double V0;     // <Y0, f>^2
};

// Coefficients of the projected dynamics when A^T f = lambda f. The constant
// drift is the squared norm |Q_W^{1/2} eta^T f|^2: the square is forced by
// L_f(eta Q_W eta^T) = |Q_W^{1/2} eta^T f|^2.
inline CIRParams cir_params(const OUSpec& spec, const HVector& f, double lambda) {
  spec.validate();
  require_same_dim(spec.Y0, f);
  double fnorm = f.norm();
  if ((spec.A.transpose() * f - lambda * f).norm() > 1e-8 * fnorm)
    throw DomainError("cir_params: f is not an eigenvector of A^T for this lambda");
  double b = (psd_sqrt(spec.Q_W) * (spec.eta.transpose() * f)).squaredNorm();
  double v0 = inner(spec.Y0, f);
  return {b, 2.0 * lambda, 2.0 * std::sqrt(b), v0 * v0};
}

// First moment of dv = (b + kappa v) dt + xi sqrt(v) dw:
// m(t) = e^{kappa t} V0 + b (e^{kappa t} - 1)/kappa, with the kappa -> 0 limit
// b t + V0 taken for |kappa| < 1e-12.
inline double cir_mean(const CIRParams& p, double t) {
  if (std::abs(p.kappa) < 1e-12) return p.V0 + p.b * t;
  double e = std::exp(p.kappa * t);
  return e * p.V0 + p.b * (e - 1.0) / p.kappa;
}

// Scalar paths of the projected variance, co-simulated with (Y, V).
struct ProjEnsemble {
  TimeGrid grid;
  std::uint64_t seed = 0;
  int path_count = 0;
  std::vector<Eigen::VectorXd> v;           // Euler paths of the projected dynamics
  std::vector<Eigen::VectorXd> v_identity;  // <Y_k, f>^2 along the same noise
};

// Euler scheme for the projected dynamics
//   dv = (v + |Q_W^{1/2}eta^T f|^2 + L_{A^T f}(V) - L_{(A^T-I)f}(V)) dt
//        + 2 |Q_W^{1/2}eta^T f| sqrt(v^+) dw
// driven by the full (Y, V) system on shared noise. The scalar Wiener
// increment dw is the normalized projection of the vector noise along
// gamma(t;f) = 2<Y,f> eta^T f, so the diffusion term reduces to
// 2 sqrt(v^+) sign(<Y,f>) <dW, f> and the identity path <Y,f>^2 is coupled
// pathwise. Negative excursions enter the square root truncated at zero.
inline ProjEnsemble simulate_V_proj(const OUSpec& spec, const HVector& f,
                                    const TimeGrid& grid, int count, std::uint64_t seed,
                                    int threads = 1) {
  spec.validate();
  grid.validate();
  require_same_dim(spec.Y0, f);
  int n = spec.dim();
  int steps = grid.steps;
  double dt = grid.dt();
  double sdt = std::sqrt(dt);
  OperatorMatrix load = spec.eta * psd_sqrt(spec.Q_W);
  double b = (psd_sqrt(spec.Q_W) * (spec.eta.transpose() * f)).squaredNorm();
  HVector g1 = spec.A.transpose() * f;        // A^T f
  HVector g2 = g1 - f;                        // (A^T - I) f

  ProjEnsemble ens;
  ens.grid = grid;
  ens.seed = seed;
  ens.path_count = count;
  ens.v.assign(static_cast<std::size_t>(count), Eigen::VectorXd(steps + 1));
  ens.v_identity.assign(static_cast<std::size_t>(count), Eigen::VectorXd(steps + 1));

  parallel_chunks(count, threads, [&](std::int64_t lo, std::int64_t hi) {
    HVector xi(n), dw(n), y(n);
    OperatorMatrix v_op(n, n);
    for (std::int64_t p = lo; p < hi; ++p) {
      NormalStream noise(seed, NoiseStream::kW, static_cast<std::uint64_t>(p));
      Eigen::VectorXd& v_path = ens.v[static_cast<std::size_t>(p)];
      Eigen::VectorXd& id_path = ens.v_identity[static_cast<std::size_t>(p)];
      y = spec.Y0;
      v_op = y * y.transpose();
      double u0 = inner(y, f);
      double v = u0 * u0;
      v_path[0] = v;
      id_path[0] = v;
      for (int k = 0; k < steps; ++k) {
        noise.fill(static_cast<std::uint64_t>(k) * n, xi);
        dw.noalias() = load * xi;
        dw *= sdt;
        double u = inner(y, f);
        double drift = v + b + project(v_op, g1) - project(v_op, g2);
        double dxi = inner(dw, f);  // increment of <Y,f>, st.dev. |Q_W^{1/2}eta^T f| sqrt(dt)
        double sign = u < 0.0 ? -1.0 : 1.0;
        v = v + drift * dt + 2.0 * std::sqrt(std::max(v, 0.0)) * sign * dxi;
        TensorStep step = tensor_sde_step(spec, y, v_op, dw, dt);
        y = step.y_next;
        v_op = step.v_next;
        double u_next = inner(y, f);
        v_path[k + 1] = v;
        id_path[k + 1] = u_next * u_next;
      }
    }
  });
  return ens;
}

}  // namespace theston
