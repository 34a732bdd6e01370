#pragma once

#include <cstdint>
#include <vector>

#include "xlmimo/config.hpp"
#include "xlmimo/correlation.hpp"
#include "xlmimo/geometry.hpp"
#include "xlmimo/rng.hpp"

namespace xlmimo {

// Dominant propagation path. For the line-of-sight path (r, theta) is the
// user position; for the others it is the last reflection point.
struct SpecularPath {
  double radius = 0.0;
  double angle = 0.0;
  double amplitude = 1.0;  // rho in (0, 1]
  bool is_los = false;
};

struct UserChannelModel {
  UserGeometry geometry;
  std::vector<SpecularPath> paths;
  std::vector<CVector> responses;  // one spherical-wavefront response per path
  CorrelationMatrix correlation;   // diffuse covariance R_k

  double specular_power_sum() const;  // sum_s rho_s^2
};

// Immutable world for one realization: geometry, paths and correlation
// matrices of every user.
class Scenario {
 public:
  Scenario(ScenarioConfig config, std::uint64_t seed, std::vector<UserChannelModel> users);

  const ScenarioConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const ArrayGeometry& array() const noexcept { return config_.array; }
  int num_users() const noexcept { return static_cast<int>(users_.size()); }
  int num_antennas() const noexcept { return config_.array.num_antennas; }
  const UserChannelModel& user(UserId k) const { return users_.at(k); }
  const std::vector<UserChannelModel>& users() const noexcept { return users_; }

 private:
  ScenarioConfig config_;
  std::uint64_t seed_;
  std::vector<UserChannelModel> users_;
};

// Path 1 is line-of-sight at the user position with amplitude
// min(1, r_ref / r_k), r_ref = distance_min. Paths 2..S draw the last
// reflection point uniformly from the configured ranges and get amplitude
// min(1, r_ref / r_s) * gamma, gamma ~ U(reflection_loss_min, reflection_loss_max).
// With AmplitudeModel::kConstant every path gets constant_amplitude.
std::vector<SpecularPath> sample_specular_paths(Rng& rng, const UserGeometry& user, int num_paths,
                                                const ScenarioConfig& config);

// Draws every user from its own substream derive_seed(seed, kScenario, k), so
// a user's geometry does not depend on K or on evaluation order. The diffuse
// covariance of user k has trace M * sum_s rho_s^2 / kappa.
Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed);

}  // namespace xlmimo
