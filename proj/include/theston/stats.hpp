#pragma once

// Small Monte Carlo statistics helpers: means with standard errors, sample
// covariance of row-wise samples, empirical characteristic functions and
// moment-based normality diagnostics.

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "theston/errors.hpp"

namespace theston {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
  long n = 0;
};

inline MeanSe mean_se(const Eigen::VectorXd& x) {
  long n = static_cast<long>(x.size());
  if (n == 0) return {};
  double m = x.mean();
  if (n == 1) return {m, 0.0, 1};
  double var = (x.array() - m).square().sum() / static_cast<double>(n - 1);
  return {m, std::sqrt(var / static_cast<double>(n)), n};
}

// Empirical E[exp(i u)] with per-component standard errors.
struct CharEstimate {
  std::complex<double> value;
  double se_re = 0.0;
  double se_im = 0.0;
  long n = 0;
};

inline CharEstimate empirical_char(const Eigen::VectorXd& u) {
  Eigen::VectorXd c = u.array().cos();
  Eigen::VectorXd s = u.array().sin();
  MeanSe mc = mean_se(c);
  MeanSe ms = mean_se(s);
  return {{mc.mean, ms.mean}, mc.se, ms.se, mc.n};
}

// Unbiased sample covariance; samples are the rows of `x`.
inline Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
  long n = static_cast<long>(x.rows());
  if (n < 2) throw DomainError("sample_covariance needs at least two samples");
  Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(n - 1);
}

struct MomentDiagnostics {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

inline MomentDiagnostics moment_diagnostics(const Eigen::VectorXd& x) {
  double m = x.mean();
  Eigen::ArrayXd d = x.array() - m;
  double n = static_cast<double>(x.size());
  double m2 = d.square().sum() / n;
  if (m2 <= 0.0) return {};
  double m3 = d.cube().sum() / n;
  double m4 = d.square().square().sum() / n;
  return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

}  // namespace theston
