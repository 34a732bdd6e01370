#include "xlmimo/correlation.hpp"

#include <cmath>
#include <fstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "xlmimo/linalg.hpp"
#include "xlmimo/special_functions.hpp"

namespace xlmimo {
namespace {

constexpr double kSqrtPi = 1.77245385090551602729;
const cplx kEighthTurn = std::polar(1.0, kPi / 4.0);

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

void validate_radius(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw DomainError(fmt::format("correlation: radius must be positive and finite, got {}", radius));
}

}  // namespace

void validate_half_width(double half_width) {
  if (!(half_width > 0.0) || half_width > kMaxHalfWidth * (1.0 + 1e-12))
    throw DomainError(
        fmt::format("correlation: half-width {} rad outside (0, {}]", half_width, kMaxHalfWidth));
}

QuadraticPhase quadratic_phase(int m, int n, const ArrayGeometry& geom, double nominal_angle, double radius) {
  const double k = geom.wavenumber();
  const double d = geom.spacing;
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  const double lin = (dm - dn) * d;
  const double quad = (dn * dn - dm * dm) * d * d / (2.0 * radius);
  const double s = std::sin(nominal_angle);
  const double c = std::cos(nominal_angle);
  return {k * (lin * s + quad * c * c), k * c * (lin - 2.0 * quad * s), k * quad * s * s};
}

cplx quadratic_phase_average(double b, double c, double half_width) {
  if (std::abs(c) < kDegenerateQuadratic) {
    if (std::abs(b) < kDegenerateLinear) return 1.0;
    return sinc(b * half_width);
  }
  if (c < 0.0) return std::conj(quadratic_phase_average(-b, -c, half_width));

  // With x = sqrt(c) t + b / (2 sqrt(c)) and z = exp(-j pi/4) x,
  //   exp(-j b^2/4c) erf(z) = sgn(x) [exp(-j b^2/4c) - exp(j (c t^2 + b t)) w(exp(j pi/4) |x|)],
  // so the potentially huge phase b^2/4c only survives when the endpoints
  // straddle the stationary point, where it is bounded by c * half_width^2.
  const double root = std::sqrt(c);
  const double shift = b / (2.0 * root);
  const double x_hi = root * half_width + shift;
  const double x_lo = -root * half_width + shift;
  const double sg_hi = x_hi >= 0.0 ? 1.0 : -1.0;
  const double sg_lo = x_lo >= 0.0 ? 1.0 : -1.0;

  auto tail = [&](double x, double t) {
    return std::exp(kJ * (c * t * t + b * t)) * faddeeva_w(kEighthTurn * std::abs(x));
  };
  cplx diff = -sg_hi * tail(x_hi, half_width) + sg_lo * tail(x_lo, -half_width);
  if (sg_hi != sg_lo) diff += (sg_hi - sg_lo) * std::exp(-kJ * (shift * shift));

  const cplx integral = diff * (0.5 * kSqrtPi) * kEighthTurn / root;
  return integral / (2.0 * half_width);
}

cplx correlation_entry_closed_form(int m, int n, const ArrayGeometry& geom, const LocalScattering& ls) {
  validate_half_width(ls.half_width);
  validate_radius(ls.radius);
  if (m == n) return ls.gain;
  const QuadraticPhase p = quadratic_phase(m, n, geom, ls.nominal_angle, ls.radius);
  return ls.gain * std::exp(kJ * p.a) * quadratic_phase_average(p.b, p.c, ls.half_width);
}

cplx correlation_entry_quadrature(int m, int n, const ArrayGeometry& geom, const LocalScattering& ls,
                                  const QuadratureOptions& options) {
  validate_half_width(ls.half_width);
  validate_radius(ls.radius);
  if (m == n) return ls.gain;

  const double k = geom.wavenumber();
  const double d = geom.spacing;
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  const double lin = (dm - dn) * d;
  const double quad = (dn * dn - dm * dm) * d * d / (2.0 * ls.radius);
  const QuadraticPhase p = quadratic_phase(m, n, geom, ls.nominal_angle, ls.radius);

  auto integrand = [&](double delta) -> cplx {
    double phase = 0.0;
    if (options.model == PhaseModel::kFresnel) {
      const double theta = ls.nominal_angle + delta;
      const double ct = std::cos(theta);
      phase = k * (lin * std::sin(theta) + quad * ct * ct);
    } else {
      phase = p.a + delta * (p.b + p.c * delta);
    }
    return std::exp(kJ * phase);
  };

  double error = 0.0;
  const cplx integral = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, -ls.half_width, ls.half_width, options.max_depth, 1e-12, &error);
  const double normalized_error = error / (2.0 * ls.half_width);
  if (!(normalized_error <= options.absolute_tolerance))
    throw NumericalError(fmt::format(
        "correlation quadrature did not converge: error estimate {:.3e} > {:.1e} "
        "(m={}, n={}, nominal={}, half_width={}, r={})",
        normalized_error, options.absolute_tolerance, m, n, ls.nominal_angle, ls.half_width, ls.radius));
  return ls.gain * integral / (2.0 * ls.half_width);
}

cplx correlation_entry_farfield(int m, int n, const ArrayGeometry& geom, const LocalScattering& ls) {
  validate_half_width(ls.half_width);
  if (m == n) return ls.gain;
  const double lin = geom.wavenumber() * static_cast<double>(m - n) * geom.spacing;
  return ls.gain * std::exp(kJ * (lin * std::sin(ls.nominal_angle))) *
         sinc(lin * std::cos(ls.nominal_angle) * ls.half_width);
}

CorrelationMatrix::CorrelationMatrix(CMatrix matrix, CMatrix factor, LocalScattering params)
    : matrix_(std::move(matrix)), factor_(std::move(factor)), params_(params) {}

CorrelationMatrix CorrelationMatrix::zero(int num_antennas) {
  LocalScattering params;
  params.gain = 0.0;
  return {CMatrix::Zero(num_antennas, num_antennas), CMatrix::Zero(num_antennas, 0), params};
}

CorrelationMatrix build_correlation_matrix(const ArrayGeometry& geom, const LocalScattering& ls) {
  geom.validate();
  validate_half_width(ls.half_width);
  validate_radius(ls.radius);
  if (ls.gain < 0.0) throw DomainError("correlation: gain must be nonnegative");
  const int size = geom.num_antennas;
  if (ls.gain == 0.0) {
    CorrelationMatrix z = CorrelationMatrix::zero(size);
    return {z.matrix(), z.factor(), ls};
  }

  CMatrix r(size, size);
  for (int i = 0; i < size; ++i) {
    r(i, i) = ls.gain;
    for (int j = i + 1; j < size; ++j) {
      const cplx v = correlation_entry_closed_form(geom.element_index(i), geom.element_index(j), geom, ls);
      r(i, j) = v;
      r(j, i) = std::conj(v);
    }
  }
  PsdRepair repaired = repair_psd(r, 1e-8);
  return {std::move(repaired.matrix), std::move(repaired.factor), ls};
}

void write_correlation_csv(const CorrelationMatrix& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  const auto& p = r.params();
  out << "M,beta,nominal_angle,half_width,radius\n";
  out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.size(), p.gain, p.nominal_angle, p.half_width,
                     p.radius);
  for (Eigen::Index i = 0; i < r.size(); ++i)
    for (Eigen::Index j = 0; j < r.size(); ++j)
      out << fmt::format("{},{},{:.17g},{:.17g}\n", i, j, r.matrix()(i, j).real(), r.matrix()(i, j).imag());
  if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace xlmimo
