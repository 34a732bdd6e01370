#include "xlmimo/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "xlmimo/nearfield.hpp"

namespace xlmimo {
namespace {

double distance_amplitude(double radius, double reference) { return std::min(1.0, reference / radius); }

}  // namespace

double UserChannelModel::specular_power_sum() const {
  double sum = 0.0;
  for (const auto& p : paths) sum += p.amplitude * p.amplitude;
  return sum;
}

Scenario::Scenario(ScenarioConfig config, std::uint64_t seed, std::vector<UserChannelModel> users)
    : config_(std::move(config)), seed_(seed), users_(std::move(users)) {}

std::vector<SpecularPath> sample_specular_paths(Rng& rng, const UserGeometry& user, int num_paths,
                                                const ScenarioConfig& config) {
  if (num_paths < 1) throw ConfigError("sample_specular_paths: at least one path is required");
  const bool constant = config.amplitude_model == AmplitudeModel::kConstant;
  const double reference = config.distance_min;

  std::vector<SpecularPath> paths;
  paths.reserve(static_cast<std::size_t>(num_paths));
  paths.push_back({user.radius, user.angle,
                   constant ? config.constant_amplitude : distance_amplitude(user.radius, reference), true});
  for (int s = 1; s < num_paths; ++s) {
    SpecularPath p;
    p.radius = rng.uniform(config.distance_min, config.distance_max);
    p.angle = rng.uniform(config.angle_min, config.angle_max);
    const double loss = rng.uniform(config.reflection_loss_min, config.reflection_loss_max);
    p.amplitude = constant ? config.constant_amplitude : distance_amplitude(p.radius, reference) * loss;
    paths.push_back(p);
  }
  return paths;
}

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  const int M = config.array.num_antennas;
  std::vector<UserChannelModel> users;
  users.reserve(static_cast<std::size_t>(config.num_users));
  for (int k = 0; k < config.num_users; ++k) {
    Rng rng(derive_seed(seed, Stream::kScenario, static_cast<std::uint64_t>(k)));
    UserChannelModel u;
    u.geometry.radius = rng.uniform(config.distance_min, config.distance_max);
    u.geometry.angle = rng.uniform(config.angle_min, config.angle_max);
    u.paths = sample_specular_paths(rng, u.geometry, config.paths_per_user, config);
    for (const auto& p : u.paths) u.responses.push_back(specular_response(p, config.array));

    if (config.has_diffuse()) {
      LocalScattering ls;
      ls.nominal_angle = u.geometry.angle;
      ls.half_width = config.half_width();
      ls.radius = u.geometry.radius;
      ls.gain = u.specular_power_sum() / config.power_ratio;
      u.correlation = build_correlation_matrix(config.array, ls);
    } else {
      u.correlation = CorrelationMatrix::zero(M);
    }
    users.push_back(std::move(u));
  }
  return Scenario(config, seed, std::move(users));
}

}  // namespace xlmimo
