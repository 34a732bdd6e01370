#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "xlmimo/common.hpp"
#include "xlmimo/geometry.hpp"

namespace xlmimo {

enum class AmplitudeModel { kDistance, kConstant };
enum class SpreadMapping { kStdDev, kHalfWidth };
enum class ChannelEvolution { kAr1, kIndependent };

// Channel aging parameters. Doppler f_d = v / lambda, alpha = J0(2 pi f_d tau_s / f_s).
struct AgingConfig {
  double user_speed = 30.0 / 3.6;     // m/s
  double wavelength = 0.15;           // m
  double sampling_frequency = 1e6;    // Hz
  double csi_delay = 1e4;             // samples

  void validate() const;
};

struct ScenarioConfig {
  int num_users = 50;
  int paths_per_user = 4;
  double power_ratio = 2.0;  // kappa; +inf disables the diffuse component
  double angle_min = -kPi / 4.0;
  double angle_max = kPi / 4.0;
  double distance_min = 40.0;
  double distance_max = 230.0;
  double angular_std_dev = 10.0 * kPi / 180.0;
  SpreadMapping spread_mapping = SpreadMapping::kStdDev;
  ArrayGeometry array{64, 0.15, 0.075};
  AmplitudeModel amplitude_model = AmplitudeModel::kDistance;
  double constant_amplitude = 1.0;
  double reflection_loss_min = 0.3;
  double reflection_loss_max = 0.9;
  double transmit_power = 1.0;  // W
  double snr_db = 20.0;         // P_TX / sigma_n^2
  double sampling_frequency = 1e6;
  double csi_delay = 1e4;
  double user_speed = 30.0 / 3.6;
  ChannelEvolution evolution = ChannelEvolution::kAr1;
  std::uint64_t seed = 1;

  double noise_power() const;
  // Uniform half-width of the local-scattering density.
  double half_width() const;
  AgingConfig aging() const;
  bool has_diffuse() const;
  void validate() const;
};

enum class SchedulerMode { kIsp, kIspP, kSusK, kSusS, kPerfect };

enum class CandidatePolicy { kFixedSize, kThreshold };

struct TrainingConfig {
  double block_length = 1e4;      // tau_c, samples
  double per_user = 30.0;         // tau-dot, samples per trained user
  bool overhead_aware = false;    // apply the training pre-log to reported SE
};

struct SchedulerConfig {
  SchedulerMode mode = SchedulerMode::kIsp;
  CandidatePolicy candidate_policy = CandidatePolicy::kFixedSize;
  int candidate_count = 15;
  double candidate_threshold = 0.0;
  double sus_epsilon = 0.3;
  TrainingConfig training;

  void validate() const;
};

struct Variant {
  std::string name;
  std::vector<std::pair<std::string, std::string>> overrides;
};

struct SweepPlan {
  std::vector<SchedulerMode> modes{SchedulerMode::kIsp};
  std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  int realizations = 100;
  int threads = 1;
  bool record_runtime = false;
  std::vector<Variant> variants;

  void validate() const;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  SchedulerConfig scheduler;
  SweepPlan sweep;
  bool has_sweep_section = false;
};

std::string to_string(SchedulerMode mode);
SchedulerMode parse_scheduler_mode(const std::string& text);

// Parses "section.key = value" entries. Units: a trailing "deg" converts
// degrees to radians, "kmh" converts km/h to m/s; "inf" is accepted for
// power_ratio. Throws ConfigError with "<source>:<line>: ..." context.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>",
                              const std::vector<std::string>& overrides = {});

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// Applies one "section.key=value" override. Throws ConfigError naming the key
// when it is unknown or its value does not type-check.
void apply_override(ExperimentConfig& config, const std::string& assignment);

// Returns a copy of `base` with the variant's overrides applied.
ExperimentConfig apply_variant(const ExperimentConfig& base, const Variant& variant);

// Every accepted "section.key", in schema order.
std::vector<std::string> config_keys();

}  // namespace xlmimo
