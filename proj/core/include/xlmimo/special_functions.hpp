#pragma once

#include "xlmimo/common.hpp"

namespace xlmimo {

struct ErfEvaluation {
  cplx value;
  // Set when exp(-z^2) overflows; value is then a signed infinity carrying the
  // phase of the asymptotic expansion.
  bool saturated = false;
};

// Faddeeva function w(z) = exp(-z^2) erfc(-i z).
//
// Method (upper half plane, Im z >= 0):
//   * |z| >= 8, or Im z >= 1.5: Laplace continued fraction
//       w(z) = (i/sqrt(pi)) / (z - (1/2) / (z - 1 / (z - (3/2) / (z - ...))))
//     evaluated with the modified Lentz algorithm.
//   * otherwise: Maclaurin series of erf(-i z), w = exp(-z^2) (1 - erf(-i z)).
//     In this region the series loses at most a factor exp(2 (Im z)^2) < e^4.5
//     to cancellation.
// Lower half plane via w(z) = 2 exp(-z^2) - w(-z).
cplx faddeeva_w(cplx z);

// Error function of a complex argument.
//   * |z| < 2: Maclaurin series (cancellation bounded by e^4).
//   * otherwise: erf(z) = 1 - exp(-z^2) w(i z) for Re z >= 0, odd symmetry
//     for Re z < 0.
// Relative accuracy better than 1e-12 on the rays arg z = +-pi/4 (the family
// produced by the quadratic-phase correlation integral) and on the real axis.
ErfEvaluation complex_erf_checked(cplx z);

inline cplx complex_erf(cplx z) { return complex_erf_checked(z).value; }

// Bessel function of the first kind, order zero. Even in x.
double bessel_j0(double x);

}  // namespace xlmimo
