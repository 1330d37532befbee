#pragma once

// Closed-form characteristic functionals of the driver Y and of the rank-one
// variance process V = Y (x) Y, plus the Gaussian exponential-moment bound
// for ||V(t)||.

#include <cmath>
#include <complex>

#include "theston/hilbert.hpp"
#include "theston/ou.hpp"

namespace theston {

using CharValue = std::complex<double>;

// E[exp(i<Y(t),f>)] = exp(i<exp(tA)Y0,f> - <Q_{Y(t)}f,f>/2).
inline CharValue char_Y(const OUSpec& spec, double t, const HVector& f,
                        int quad_steps = -1) {
  require_same_dim(spec.Y0, f);
  double mean = inner(semigroup(spec.A, t) * spec.Y0, f);
  double var = t == 0.0 ? 0.0 : inner(cov_Y(spec, t, quad_steps) * f, f);
  return std::exp(-0.5 * var) * CharValue(std::cos(mean), std::sin(mean));
}

struct VcIntegrals {
  double v_f;   // Var <Y(t),f>
  double v_g;   // Var <Y(t),g>
  double c_fg;  // Cov(<Y(t),f>, <Y(t),g>)
};

inline VcIntegrals vc_integrals(const OUSpec& spec, double t, const HVector& f,
                                const HVector& g, int quad_steps = -1) {
  require_same_dim(f, g);
  require_same_dim(spec.Y0, f);
  if (t == 0.0) return {0.0, 0.0, 0.0};
  OperatorMatrix q = cov_Y(spec, t, quad_steps);
  return {inner(q * f, f), inner(q * g, g), inner(q * f, g)};
}

// E[exp(i<<V(t), f (x) g>>)] for a centered driver (Y0 = 0):
// (1 + v(f)v(g) - c(f,g)^2 - 2ic(f,g))^{-1/2}, principal branch. The real
// part of the radicand is >= 1 by Cauchy-Schwarz, so the branch cut is never
// approached.
inline CharValue char_V(const OUSpec& spec, double t, const HVector& f,
                        const HVector& g, int quad_steps = -1) {
  if (!spec.Y0.isZero(0.0))
    throw UnsupportedError("char_V: only the centered case Y0 = 0 is supported");
  VcIntegrals vc = vc_integrals(spec, t, f, g, quad_steps);
  CharValue radicand(1.0 + vc.v_f * vc.v_g - vc.c_fg * vc.c_fg, -2.0 * vc.c_fg);
  return 1.0 / std::sqrt(radicand);
}

struct ExpMomentBound {
  double value;  // the bound on E[exp(theta ||V(t)||)]
  double k;      // E|Y(t) - exp(tA)Y0|^2 = trace(Q_{Y(t)})
};

// Bound E[exp(theta ||V(t)||)] <= exp(2 theta |exp(tA)Y0|^2) / sqrt(1-4 theta k)
// valid for 0 <= theta <= 1/(4k).
inline ExpMomentBound exp_moment_bound(const OUSpec& spec, double t, double theta,
                                       int quad_steps = -1) {
  double k = t == 0.0 ? 0.0 : cov_Y(spec, t, quad_steps).trace();
  if (theta < 0.0 || (k > 0.0 && theta > 1.0 / (4.0 * k)))
    throw DomainError("exp_moment_bound: theta outside [0, 1/(4k)]");
  double mean_sq = (semigroup(spec.A, t) * spec.Y0).squaredNorm();
  return {std::exp(2.0 * theta * mean_sq) / std::sqrt(1.0 - 4.0 * theta * k), k};
}

}  // namespace theston
