#include "xlmimo/special_functions.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/bessel.hpp>

namespace xlmimo {
namespace {

constexpr double kSqrtPi = 1.77245385090551602729;
constexpr double kTwoOverSqrtPi = 1.12837916709551257390;
// exp(709.7) is the largest finite double.
constexpr double kMaxExponent = 709.0;

cplx erf_maclaurin(cplx z) {
  const cplx z2 = z * z;
  cplx term = z;
  cplx sum = z;
  for (int n = 1; n < 600; ++n) {
    term *= -z2 / static_cast<double>(n);
    const cplx add = term / static_cast<double>(2 * n + 1);
    sum += add;
    if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
  }
  return kTwoOverSqrtPi * sum;
}

cplx faddeeva_continued_fraction(cplx z) {
  constexpr double tiny = 1e-300;
  cplx f = tiny;
  cplx c = f;
  cplx d = 0.0;
  for (int j = 1; j < 5000; ++j) {
    const double a = (j == 1) ? 1.0 : -0.5 * (j - 1);
    d = z + a * d;
    if (d == 0.0) d = tiny;
    c = z + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const cplx delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return kJ / kSqrtPi * f;
}

cplx faddeeva_upper(cplx z) {
  if (std::abs(z) >= 8.0 || z.imag() >= 1.5) return faddeeva_continued_fraction(z);
  return std::exp(-z * z) * (1.0 - erf_maclaurin(-kJ * z));
}

}  // namespace

cplx faddeeva_w(cplx z) {
  if (z.imag() >= 0.0) return faddeeva_upper(z);
  return 2.0 * std::exp(-z * z) - faddeeva_upper(-z);
}

ErfEvaluation complex_erf_checked(cplx z) {
  if (std::abs(z) < 2.0) return {erf_maclaurin(z), false};
  const bool negate = z.real() < 0.0;
  const cplx u = negate ? -z : z;
  const cplx minus_u2 = -u * u;
  if (minus_u2.real() > kMaxExponent) {
    // erf(u) ~ -exp(-u^2) / (sqrt(pi) u)
    const cplx dir = -std::exp(kJ * minus_u2.imag()) / u;
    const double inf = std::numeric_limits<double>::infinity();
    cplx v{dir.real() == 0.0 ? 0.0 : std::copysign(inf, dir.real()),
           dir.imag() == 0.0 ? 0.0 : std::copysign(inf, dir.imag())};
    return {negate ? -v : v, true};
  }
  const cplx value = 1.0 - std::exp(minus_u2) * faddeeva_upper(kJ * u);
  return {negate ? -value : value, false};
}

double bessel_j0(double x) { return boost::math::cyl_bessel_j(0, std::abs(x)); }

}  // namespace xlmimo
