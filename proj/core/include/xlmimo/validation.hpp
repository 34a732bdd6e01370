#pragma once

#include <cstdint>
#include <vector>

#include "xlmimo/common.hpp"
#include "xlmimo/correlation.hpp"
#include "xlmimo/geometry.hpp"

namespace xlmimo {

class Scenario;

struct CorrelationGridOptions {
  std::vector<double> radii{40.0, 230.0};
  std::vector<double> angles{-kPi / 4.0, 0.0, kPi / 4.0};
  int pair_stride = 1;  // compare pairs m <= n with both indices on this stride
  QuadratureOptions quadrature;
  cplx fault{0.0, 0.0};  // added to every closed-form entry (negative control)
};

struct EntryDiscrepancy {
  int m = 0;
  int n = 0;
  double radius = 0.0;
  double angle = 0.0;
  cplx closed_form;
  cplx reference;
  double error = 0.0;  // |closed_form - reference| / beta
};

struct GridReport {
  double max_error = 0.0;
  EntryDiscrepancy worst;
  std::size_t entries = 0;
  double seconds = 0.0;
};

// Closed form against adaptive quadrature over the (radius, angle) grid.
GridReport compare_closed_form_to_quadrature(const ArrayGeometry& geom, double half_width, double gain,
                                             const CorrelationGridOptions& options);

// Closed form at `radius` against the far-field formula over options.angles;
// options.radii and options.quadrature are ignored.
GridReport compare_closed_form_to_farfield(const ArrayGeometry& geom, double half_width, double gain, double radius,
                                           const CorrelationGridOptions& options);

struct GainCheck {
  UserId user = 0;
  double sample_mean = 0.0;     // mean of ||h||^2 over the draws
  double standard_error = 0.0;  // of that mean
  double exact = 0.0;           // sum_s ||hbar_s||^2 + tr(R_k)
  double equivalent = 0.0;      // M (1 + 1/kappa) sum_s rho_s^2
  double identity_error = 0.0;  // |equivalent - exact| / exact

  double z_score() const;
  bool within(double sigmas) const;
};

struct GainReport {
  std::vector<GainCheck> users;
  double seconds = 0.0;

  bool passed(double sigmas = 3.0, double identity_tolerance = 1e-10) const;
};

// Monte Carlo mean of ||h_k||^2 over `draws` channel draws per user, each user
// on its own stream derive_seed(seed, kValidation, k).
GainReport validate_gains(const Scenario& scenario, int draws, std::uint64_t seed);

// Copy of `scenario` with every diffuse covariance scaled by `scale`, so
// tr(R_k) no longer matches the power ratio (negative control).
Scenario miscalibrate_diffuse(const Scenario& scenario, double scale);

}  // namespace xlmimo
