#pragma once

#include <filesystem>

#include "xlmimo/common.hpp"
#include "xlmimo/geometry.hpp"

namespace xlmimo {

// Local scattering cluster around a nominal direction: theta = nominal + delta,
// delta uniform on [-half_width, half_width].
struct LocalScattering {
  double nominal_angle = 0.0;  // radians
  double half_width = 0.0;     // radians
  double radius = 0.0;         // meters
  double gain = 1.0;           // average gain per antenna (beta)
};

// Largest admissible uniform half-width: sqrt(3) * pi / 12, i.e. the half-width
// of a uniform density whose standard deviation is pi / 12.
inline constexpr double kMaxHalfWidth = 0.45344984105855033;

// Coefficients of the second-order phase a + b delta + c delta^2 whose
// uniform average is the closed-form correlation entry.
struct QuadraticPhase {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

QuadraticPhase quadratic_phase(int m, int n, const ArrayGeometry& geom, double nominal_angle, double radius);

// Below these magnitudes the linear / quadratic coefficient is treated as zero.
inline constexpr double kDegenerateLinear = 1e-12;
inline constexpr double kDegenerateQuadratic = 1e-12;

// Uniform average (1 / 2 phi) * integral_{-phi}^{phi} exp(j (b t + c t^2)) dt.
// Uses the complex error function with the large phase b^2 / 4c cancelled
// analytically, so the result is stable for small nonzero c.
cplx quadratic_phase_average(double b, double c, double half_width);

// Closed-form correlation entry [R]_{m,n} (m, n are centred element indices).
cplx correlation_entry_closed_form(int m, int n, const ArrayGeometry& geom, const LocalScattering& ls);

enum class PhaseModel {
  kFresnel,    // full Fresnel phase with exact sin/cos(nominal + delta)
  kQuadratic,  // second-order phase a + b delta + c delta^2
};

struct QuadratureOptions {
  PhaseModel model = PhaseModel::kFresnel;
  double absolute_tolerance = 1e-9;
  unsigned max_depth = 20;
};

// Adaptive Gauss-Kronrod evaluation of the uniform angular average of the
// element-pair phase. Throws NumericalError when the error estimate exceeds
// the requested tolerance.
cplx correlation_entry_quadrature(int m, int n, const ArrayGeometry& geom, const LocalScattering& ls,
                                  const QuadratureOptions& options = {});

// d/r -> 0 limit: beta exp(j k (m-n) d sin(nominal)) sinc(k (m-n) d cos(nominal) half_width).
cplx correlation_entry_farfield(int m, int n, const ArrayGeometry& geom, const LocalScattering& ls);

class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;
  CorrelationMatrix(CMatrix matrix, CMatrix factor, LocalScattering params);

  // All-zero matrix (no diffuse power).
  static CorrelationMatrix zero(int num_antennas);

  const CMatrix& matrix() const noexcept { return matrix_; }
  // Sampling factor L with matrix() == L L^H.
  const CMatrix& factor() const noexcept { return factor_; }
  const LocalScattering& params() const noexcept { return params_; }
  double gain() const noexcept { return params_.gain; }
  Eigen::Index size() const noexcept { return matrix_.rows(); }
  bool is_zero() const noexcept { return params_.gain == 0.0; }

 private:
  CMatrix matrix_;
  CMatrix factor_;
  LocalScattering params_;
};

// Assembles every entry with the closed form, symmetrizes, clips round-off
// negativity of the spectrum (relative 1e-8) and factors for sampling.
CorrelationMatrix build_correlation_matrix(const ArrayGeometry& geom, const LocalScattering& ls);

// Debug dump: two header lines (names, values of M, beta, nominal_angle,
// half_width, radius), then one "row,col,re,im" line per entry, row-major.
void write_correlation_csv(const CorrelationMatrix& r, const std::filesystem::path& path);

void validate_half_width(double half_width);

}  // namespace xlmimo
