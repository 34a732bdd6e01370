#pragma once

#include <optional>
#include <vector>

#include "xlmimo/common.hpp"
#include "xlmimo/geometry.hpp"
#include "xlmimo/rng.hpp"

namespace xlmimo {

class Scenario;
struct SpecularPath;

// Distance from element m to a source at (r, theta) under a spherical
// wavefront: r sqrt(1 - 2 m (d/r) sin(theta) + (d/r)^2 m^2).
double element_radius(double radius, double angle, int m, double spacing);

// rho * exp(-j 2 pi r_m / lambda) for every element.
CVector specular_response(const SpecularPath& path, const ArrayGeometry& geom);

// Test hook: pins the random parts of a channel draw.
struct ChannelDrawOverrides {
  std::optional<std::vector<double>> phases;  // one per specular path
  std::optional<CVector> diffuse;             // replaces L u
};

// h = sum_s exp(j phi_s) hbar_s + L u with phi_s ~ U[0, 2 pi), u ~ CN(0, I).
CVector draw_channel(const Scenario& scenario, UserId k, Rng& rng, const ChannelDrawOverrides* overrides = nullptr);

// sum_s ||hbar_s||^2 + tr(R_k)
double expected_gain_exact(const Scenario& scenario, UserId k);

// M (1 + 1/kappa) sum_s rho_s^2
double equivalent_gain(const Scenario& scenario, UserId k);
double equivalent_gain(int num_antennas, double power_ratio, double specular_power_sum);

}  // namespace xlmimo
