#include "xlmimo/nearfield.hpp"

#include <cmath>

#include <fmt/format.h>

#include "xlmimo/scenario.hpp"

namespace xlmimo {

double element_radius(double radius, double angle, int m, double spacing) {
  if (!(radius > 0.0)) throw DomainError(fmt::format("element_radius: radius must be positive, got {}", radius));
  const double dr = spacing / radius;
  const double dm = static_cast<double>(m);
  return radius * std::sqrt(1.0 - 2.0 * dm * dr * std::sin(angle) + dr * dr * dm * dm);
}

CVector specular_response(const SpecularPath& path, const ArrayGeometry& geom) {
  CVector h(geom.num_antennas);
  const double k = geom.wavenumber();
  for (int i = 0; i < geom.num_antennas; ++i) {
    const double r = element_radius(path.radius, path.angle, geom.element_index(i), geom.spacing);
    h(i) = path.amplitude * std::exp(-kJ * (k * r));
  }
  return h;
}

CVector draw_channel(const Scenario& scenario, UserId k, Rng& rng, const ChannelDrawOverrides* overrides) {
  const UserChannelModel& u = scenario.user(k);
  const auto num_paths = u.responses.size();
  if (overrides != nullptr && overrides->phases && overrides->phases->size() != num_paths)
    throw DomainError("draw_channel: phase override has the wrong length");

  CVector h = CVector::Zero(scenario.num_antennas());
  for (std::size_t s = 0; s < num_paths; ++s) {
    const double phi = (overrides != nullptr && overrides->phases) ? (*overrides->phases)[s] : rng.phase();
    h += std::exp(kJ * phi) * u.responses[s];
  }
  if (overrides != nullptr && overrides->diffuse) {
    h += *overrides->diffuse;
  } else if (!u.correlation.is_zero()) {
    const CMatrix& factor = u.correlation.factor();
    if (factor.rows() != h.size())
      throw std::logic_error(fmt::format("draw_channel: user {} has no sampling factor", k));
    h += factor * rng.complex_normal(factor.cols());
  }
  return h;
}

double expected_gain_exact(const Scenario& scenario, UserId k) {
  const UserChannelModel& u = scenario.user(k);
  double gain = 0.0;
  for (const auto& h : u.responses) gain += h.squaredNorm();
  if (!u.correlation.is_zero()) gain += u.correlation.matrix().trace().real();
  return gain;
}

double equivalent_gain(int num_antennas, double power_ratio, double specular_power_sum) {
  if (!(power_ratio > 0.0)) throw DomainError("equivalent_gain: power ratio must be positive");
  const double diffuse = std::isfinite(power_ratio) ? 1.0 / power_ratio : 0.0;
  return num_antennas * (1.0 + diffuse) * specular_power_sum;
}

double equivalent_gain(const Scenario& scenario, UserId k) {
  return equivalent_gain(scenario.num_antennas(), scenario.config().power_ratio,
                         scenario.user(k).specular_power_sum());
}

}  // namespace xlmimo
