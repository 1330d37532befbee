#pragma once

// Linear algebra on the truncated state space: coefficient vectors in a fixed
// orthonormal basis, dense operator matrices, tensor products and
// Hilbert-Schmidt structure. Adjoints are plain transposes in this basis.

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "theston/errors.hpp"

namespace theston {

// Element of the truncated space: coordinates w.r.t. an orthonormal basis.
using HVector = Eigen::VectorXd;

// Dense matrix of a bounded operator in the same basis.
using OperatorMatrix = Eigen::MatrixXd;

// Default PSD tolerance, relative to the largest eigenvalue.
inline constexpr double kPsdTol = 1e-10;

inline void require_same_dim(const HVector& f, const HVector& g) {
  if (f.size() != g.size())
    throw DimensionError("vector dimension mismatch: " + std::to_string(f.size()) +
                         " vs " + std::to_string(g.size()));
}

inline void require_same_shape(const OperatorMatrix& s, const OperatorMatrix& t) {
  if (s.rows() != t.rows() || s.cols() != t.cols())
    throw DimensionError("operator shape mismatch");
}

inline double inner(const HVector& f, const HVector& g) {
  require_same_dim(f, g);
  return f.dot(g);
}

// (f (x) g) h = <f,h> g, so the matrix is g f^T.
inline OperatorMatrix tensor(const HVector& f, const HVector& g) {
  require_same_dim(f, g);
  return g * f.transpose();
}

inline OperatorMatrix adjoint(const OperatorMatrix& t) { return t.transpose(); }

// <<S,T>> = sum_n <S e_n, T e_n> = trace(S^T T).
inline double hs_inner(const OperatorMatrix& s, const OperatorMatrix& t) {
  require_same_shape(s, t);
  return s.cwiseProduct(t).sum();
}

inline double hs_norm(const OperatorMatrix& t) { return t.norm(); }

inline bool is_symmetric(const OperatorMatrix& q, double tol = kPsdTol) {
  double scale = std::max(1.0, q.norm());
  return (q - q.transpose()).norm() <= tol * scale;
}

// Checks the covariance role: symmetric and PSD up to `tol` relative to the
// largest eigenvalue. Throws NotPsdError with diagnostics otherwise.
inline void require_covariance(const OperatorMatrix& q, double tol = kPsdTol) {
  if (q.rows() != q.cols()) throw DimensionError("covariance matrix must be square");
  if (!is_symmetric(q, tol))
    throw NotPsdError("matrix is not symmetric (asymmetry above tolerance)");
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(0.5 * (q + q.transpose()),
                                                   Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  double lam_max = ev.maxCoeff();
  double cutoff = tol * std::max(lam_max, 0.0);
  if (ev.minCoeff() < -cutoff)
    throw NotPsdError("matrix is not PSD: min eigenvalue " + std::to_string(ev.minCoeff()) +
                      ", max eigenvalue " + std::to_string(lam_max));
}

// Symmetric PSD square root by eigendecomposition. Eigenvalues in
// [-tol*lam_max, 0) are clamped to zero; anything below is an error.
inline OperatorMatrix psd_sqrt(const OperatorMatrix& q, double tol = kPsdTol) {
  if (q.rows() != q.cols()) throw DimensionError("psd_sqrt needs a square matrix");
  if (!is_symmetric(q, tol))
    throw NotPsdError("psd_sqrt: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(0.5 * (q + q.transpose()));
  Eigen::VectorXd ev = es.eigenvalues();
  double lam_max = ev.maxCoeff();
  double cutoff = tol * std::max(lam_max, 0.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -cutoff)
      throw NotPsdError("psd_sqrt: negative eigenvalue " + std::to_string(ev[i]));
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  OperatorMatrix r = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

}  // namespace theston
