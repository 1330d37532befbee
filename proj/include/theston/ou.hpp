#pragma once

// The Gaussian mean-reverting driver Y: dY = A Y dt + eta dW with W a Wiener
// process of covariance Q_W. Provides the semigroup exp(tA), the marginal
// covariance Q_{Y(t)} by quadrature, the stationary covariance by a Lyapunov
// solve, exact Gaussian marginal sampling and Euler-Maruyama path ensembles.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "theston/errors.hpp"
#include "theston/hilbert.hpp"
#include "theston/parallel.hpp"
#include "theston/rng.hpp"

namespace theston {

struct TimeGrid {
  double t_end = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double t, int n) : t_end(t), steps(n) { validate(); }

  void validate() const {
    if (!(t_end > 0.0)) throw DomainError("TimeGrid: t_end must be positive");
    if (steps < 1) throw DomainError("TimeGrid: steps must be positive");
  }
  double dt() const { return t_end / steps; }
  double time(int k) const { return t_end * k / steps; }
};

struct OUSpec {
  OperatorMatrix A;    // generator of the driver
  OperatorMatrix eta;  // noise loading
  OperatorMatrix Q_W;  // Wiener covariance, symmetric PSD
  HVector Y0;

  int dim() const { return static_cast<int>(A.rows()); }

  void validate() const {
    int n = dim();
    if (A.cols() != n || eta.rows() != n || eta.cols() != n || Q_W.rows() != n ||
        Q_W.cols() != n || Y0.size() != n)
      throw DimensionError("OUSpec: all blocks must share one dimension");
    require_covariance(Q_W);
  }

  // eta Q_W eta^T, the instantaneous covariance of the noise term.
  OperatorMatrix noise_cov() const {
    OperatorMatrix g = eta * Q_W * eta.transpose();
    return 0.5 * (g + g.transpose());
  }
};

// Per-path states on a common grid. Regenerating with the same inputs gives
// bit-identical content for any thread count.
struct PathEnsemble {
  TimeGrid grid;
  std::uint64_t seed = 0;
  int path_count = 0;
  // y[p] is (steps+1) x N; x and v_proj are filled only by the simulators
  // that produce them.
  std::vector<Eigen::MatrixXd> y;
  std::vector<Eigen::MatrixXd> x;
  std::vector<Eigen::VectorXd> v_proj;
};

// exp(tA) by scaling-and-squaring (Pade).
inline OperatorMatrix semigroup(const OperatorMatrix& A, double t) {
  if (A.rows() != A.cols()) throw DimensionError("semigroup: square matrix required");
  if (t < 0.0) throw DomainError("semigroup: t must be nonnegative");
  if (t == 0.0) return OperatorMatrix::Identity(A.rows(), A.cols());
  return (t * A).exp();
}

namespace detail {

// Composite Simpson weights on [0, t] with an even number of panels.
inline Eigen::VectorXd simpson_weights(double t, int panels) {
  Eigen::VectorXd w(panels + 1);
  double h = t / panels;
  w[0] = w[panels] = h / 3.0;
  for (int i = 1; i < panels; ++i) w[i] = (i % 2 ? 4.0 : 2.0) * h / 3.0;
  return w;
}

inline int even_panels(int requested) {
  int p = std::max(2, requested);
  return p + (p % 2);
}

inline int default_panels(double t) {
  return even_panels(static_cast<int>(std::ceil(200.0 * std::max(t, 1.0))));
}

// Solves A X + X A^T + C = 0 for stable A (Bartels-Stewart via complex Schur).
inline OperatorMatrix lyapunov_solve(const OperatorMatrix& A, const OperatorMatrix& C) {
  using CMat = Eigen::MatrixXcd;
  Eigen::Index n = A.rows();
  Eigen::ComplexSchur<OperatorMatrix> schur(A);
  const CMat& T = schur.matrixT();
  const CMat& U = schur.matrixU();
  CMat D = U.adjoint() * C.cast<std::complex<double>>() * U;
  CMat X = CMat::Zero(n, n);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    Eigen::VectorXcd rhs = -D.col(k);
    for (Eigen::Index j = k + 1; j < n; ++j) rhs -= std::conj(T(k, j)) * X.col(j);
    CMat M = T + std::conj(T(k, k)) * CMat::Identity(n, n);
    X.col(k) = M.triangularView<Eigen::Upper>().solve(rhs);
  }
  OperatorMatrix Q = (U * X * U.adjoint()).real();
  return 0.5 * (Q + Q.transpose());
}

}  // namespace detail

// Q_{Y(t)} = int_0^t exp(sA) eta Q_W eta^T exp(sA)^T ds by composite Simpson.
// quad_steps < 0 picks the default of 200 panels per unit time.
inline OperatorMatrix cov_Y(const OUSpec& spec, double t, int quad_steps = -1) {
  if (t < 0.0) throw DomainError("cov_Y: t must be nonnegative");
  int n = spec.dim();
  if (t == 0.0) return OperatorMatrix::Zero(n, n);
  int panels = quad_steps < 0 ? detail::default_panels(t) : detail::even_panels(quad_steps);
  Eigen::VectorXd w = detail::simpson_weights(t, panels);
  OperatorMatrix g = spec.noise_cov();
  OperatorMatrix step = semigroup(spec.A, t / panels);
  OperatorMatrix u = OperatorMatrix::Identity(n, n);
  OperatorMatrix acc = OperatorMatrix::Zero(n, n);
  for (int k = 0; k <= panels; ++k) {
    acc.noalias() += w[k] * (u * g * u.transpose());
    if (k < panels) u = step * u;
  }
  OperatorMatrix q = 0.5 * (acc + acc.transpose());
  try {
    require_covariance(q);
  } catch (const NotPsdError& e) {
    throw NumericalError(std::string("cov_Y: quadrature produced a non-PSD result (") +
                         e.what() + ")");
  }
  return q;
}

// Stationary covariance: solves A Q + Q A^T + eta Q_W eta^T = 0, which equals
// the infinite-horizon integral when the spectrum of A lies in the open left
// half-plane. Spectrum is checked numerically.
inline OperatorMatrix stationary_cov_Y(const OUSpec& spec) {
  Eigen::EigenSolver<OperatorMatrix> es(spec.A, /*computeEigenvectors=*/false);
  double max_re = es.eigenvalues().real().maxCoeff();
  if (!(max_re < 0.0))
    throw StabilityError("stationary_cov_Y: generator spectrum not strictly stable (max Re = " +
                         std::to_string(max_re) + ")");
  OperatorMatrix q = detail::lyapunov_solve(spec.A, spec.noise_cov());
  require_covariance(q, 1e-8);
  return q;
}

// Exact draws from the Gaussian marginal law of Y(t); one sample per row.
// Sample s is a pure function of (spec, t, seed, s).
inline Eigen::MatrixXd sample_Y_exact(const OUSpec& spec, double t, int count,
                                      std::uint64_t seed, int quad_steps = -1,
                                      int threads = 1) {
  if (t < 0.0) throw DomainError("sample_Y_exact: t must be nonnegative");
  int n = spec.dim();
  HVector mean = semigroup(spec.A, t) * spec.Y0;
  OperatorMatrix root =
      t == 0.0 ? OperatorMatrix::Zero(n, n) : psd_sqrt(cov_Y(spec, t, quad_steps));
  Eigen::MatrixXd out(count, n);
  parallel_chunks(count, threads, [&](std::int64_t lo, std::int64_t hi) {
    HVector xi(n);
    for (std::int64_t s = lo; s < hi; ++s) {
      NormalStream stream(seed, NoiseStream::kExact, static_cast<std::uint64_t>(s));
      stream.fill(0, xi);
      out.row(s) = (mean + root * xi).transpose();
    }
  });
  return out;
}

namespace detail {

// One Euler-Maruyama update of the driver given the assembled noise increment
// dW = eta sqrt(Q_W) xi sqrt(dt).
inline HVector euler_step_Y(const OperatorMatrix& A, const HVector& y, const HVector& dw,
                            double dt) {
  return y + dt * (A * y) + dw;
}

}  // namespace detail

// Euler-Maruyama ensemble of the driver. Noise for path p at step k uses
// variate indices k*N..k*N+N-1 of stream (seed, kW, p).
inline PathEnsemble simulate_Y_paths(const OUSpec& spec, const TimeGrid& grid, int count,
                                     std::uint64_t seed, int threads = 1) {
  grid.validate();
  spec.validate();
  int n = spec.dim();
  int steps = grid.steps;
  double dt = grid.dt();
  double sdt = std::sqrt(dt);
  OperatorMatrix load = spec.eta * psd_sqrt(spec.Q_W);  // eta Q_W^{1/2}

  PathEnsemble ens;
  ens.grid = grid;
  ens.seed = seed;
  ens.path_count = count;
  ens.y.assign(static_cast<std::size_t>(count), Eigen::MatrixXd(steps + 1, n));

  parallel_chunks(count, threads, [&](std::int64_t lo, std::int64_t hi) {
    HVector xi(n), y(n), dw(n);
    for (std::int64_t p = lo; p < hi; ++p) {
      NormalStream noise(seed, NoiseStream::kW, static_cast<std::uint64_t>(p));
      Eigen::MatrixXd& path = ens.y[static_cast<std::size_t>(p)];
      y = spec.Y0;
      path.row(0) = y.transpose();
      for (int k = 0; k < steps; ++k) {
        noise.fill(static_cast<std::uint64_t>(k) * n, xi);
        dw.noalias() = load * xi;
        dw *= sdt;
        y = detail::euler_step_Y(spec.A, y, dw, dt);
        path.row(k + 1) = y.transpose();
      }
    }
  });
  return ens;
}

}  // namespace theston
