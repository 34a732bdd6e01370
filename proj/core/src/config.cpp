#include "xlmimo/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace xlmimo {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double parse_plain_double(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  if (t.empty()) throw ConfigError("expected a number, got an empty value");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || std::isnan(v)) throw ConfigError(fmt::format("'{}' is not a number", text));
  return v;
}

double parse_double(const std::string& text) {
  std::string t = lower(trim(text));
  if (ends_with(t, "deg")) return parse_plain_double(t.substr(0, t.size() - 3)) * kPi / 180.0;
  if (ends_with(t, "km/h")) return parse_plain_double(t.substr(0, t.size() - 4)) / 3.6;
  if (ends_with(t, "kmh")) return parse_plain_double(t.substr(0, t.size() - 3)) / 3.6;
  if (ends_with(t, "rad")) return parse_plain_double(t.substr(0, t.size() - 3));
  return parse_plain_double(t);
}

long long parse_integer(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("expected an integer, got an empty value");
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno != 0) throw ConfigError(fmt::format("'{}' is not an integer", text));
  return v;
}

int parse_int(const std::string& text) {
  const long long v = parse_integer(text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(fmt::format("'{}' is out of range", text));
  return static_cast<int>(v);
}

std::uint64_t parse_seed(const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno != 0)
    throw ConfigError(fmt::format("'{}' is not a nonnegative integer", text));
  return v;
}

bool parse_bool(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ConfigError(fmt::format("'{}' is not a boolean", text));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

struct SchemaEntry {
  const char* key;
  Setter set;
};

const std::vector<SchemaEntry>& schema() {
  static const std::vector<SchemaEntry> entries = {
      {"scenario.num_users", [](ExperimentConfig& c, const std::string& v) { c.scenario.num_users = parse_int(v); }},
      {"scenario.paths_per_user",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.paths_per_user = parse_int(v); }},
      {"scenario.power_ratio",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.power_ratio = parse_double(v); }},
      {"scenario.angle_min", [](ExperimentConfig& c, const std::string& v) { c.scenario.angle_min = parse_double(v); }},
      {"scenario.angle_max", [](ExperimentConfig& c, const std::string& v) { c.scenario.angle_max = parse_double(v); }},
      {"scenario.distance_min",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.distance_min = parse_double(v); }},
      {"scenario.distance_max",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.distance_max = parse_double(v); }},
      {"scenario.angular_std_dev",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.angular_std_dev = parse_double(v); }},
      {"scenario.spread_mapping",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower(trim(v));
         if (t == "std-dev" || t == "stddev") c.scenario.spread_mapping = SpreadMapping::kStdDev;
         else if (t == "half-width" || t == "halfwidth") c.scenario.spread_mapping = SpreadMapping::kHalfWidth;
         else throw ConfigError(fmt::format("'{}' is not one of std-dev, half-width", v));
       }},
      {"scenario.amplitude_model",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower(trim(v));
         if (t == "distance") c.scenario.amplitude_model = AmplitudeModel::kDistance;
         else if (t == "constant") c.scenario.amplitude_model = AmplitudeModel::kConstant;
         else throw ConfigError(fmt::format("'{}' is not one of distance, constant", v));
       }},
      {"scenario.constant_amplitude",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.constant_amplitude = parse_double(v); }},
      {"scenario.reflection_loss_min",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.reflection_loss_min = parse_double(v); }},
      {"scenario.reflection_loss_max",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.reflection_loss_max = parse_double(v); }},
      {"scenario.transmit_power",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.transmit_power = parse_double(v); }},
      {"scenario.snr_db", [](ExperimentConfig& c, const std::string& v) { c.scenario.snr_db = parse_double(v); }},
      {"scenario.evolution",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower(trim(v));
         if (t == "ar1") c.scenario.evolution = ChannelEvolution::kAr1;
         else if (t == "independent") c.scenario.evolution = ChannelEvolution::kIndependent;
         else throw ConfigError(fmt::format("'{}' is not one of ar1, independent", v));
       }},
      {"scenario.seed", [](ExperimentConfig& c, const std::string& v) { c.scenario.seed = parse_seed(v); }},
      {"array.num_antennas",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.array.num_antennas = parse_int(v); }},
      {"array.wavelength", [](ExperimentConfig& c, const std::string& v) { c.scenario.array.wavelength = parse_double(v); }},
      {"array.spacing", [](ExperimentConfig& c, const std::string& v) { c.scenario.array.spacing = parse_double(v); }},
      {"aging.sampling_frequency",
       [](ExperimentConfig& c, const std::string& v) { c.scenario.sampling_frequency = parse_double(v); }},
      {"aging.csi_delay", [](ExperimentConfig& c, const std::string& v) { c.scenario.csi_delay = parse_double(v); }},
      {"aging.user_speed", [](ExperimentConfig& c, const std::string& v) { c.scenario.user_speed = parse_double(v); }},
      {"training.block_length",
       [](ExperimentConfig& c, const std::string& v) { c.scheduler.training.block_length = parse_double(v); }},
      {"training.per_user",
       [](ExperimentConfig& c, const std::string& v) { c.scheduler.training.per_user = parse_double(v); }},
      {"training.overhead_aware",
       [](ExperimentConfig& c, const std::string& v) { c.scheduler.training.overhead_aware = parse_bool(v); }},
      {"scheduler.mode", [](ExperimentConfig& c, const std::string& v) { c.scheduler.mode = parse_scheduler_mode(v); }},
      {"scheduler.candidate_policy",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower(trim(v));
         if (t == "fixed") c.scheduler.candidate_policy = CandidatePolicy::kFixedSize;
         else if (t == "threshold") c.scheduler.candidate_policy = CandidatePolicy::kThreshold;
         else throw ConfigError(fmt::format("'{}' is not one of fixed, threshold", v));
       }},
      {"scheduler.candidate_count",
       [](ExperimentConfig& c, const std::string& v) { c.scheduler.candidate_count = parse_int(v); }},
      {"scheduler.candidate_threshold",
       [](ExperimentConfig& c, const std::string& v) { c.scheduler.candidate_threshold = parse_double(v); }},
      {"scheduler.sus_epsilon",
       [](ExperimentConfig& c, const std::string& v) { c.scheduler.sus_epsilon = parse_double(v); }},
      {"sweep.modes",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep.modes.clear();
         for (const auto& item : split_list(v)) c.sweep.modes.push_back(parse_scheduler_mode(item));
         c.has_sweep_section = true;
       }},
      {"sweep.snr_db",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep.snr_db.clear();
         for (const auto& item : split_list(v)) c.sweep.snr_db.push_back(parse_double(item));
         c.has_sweep_section = true;
       }},
      {"sweep.realizations",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep.realizations = parse_int(v);
         c.has_sweep_section = true;
       }},
      {"sweep.threads", [](ExperimentConfig& c, const std::string& v) { c.sweep.threads = parse_int(v); }},
      {"sweep.record_runtime",
       [](ExperimentConfig& c, const std::string& v) { c.sweep.record_runtime = parse_bool(v); }},
  };
  return entries;
}

const SchemaEntry* find_entry(const std::string& key) {
  for (const auto& e : schema())
    if (key == e.key) return &e;
  return nullptr;
}

struct PendingEntry {
  std::string key;
  std::string value;
  std::string where;
};

void apply_entry(ExperimentConfig& config, const PendingEntry& entry, bool& spacing_explicit) {
  const SchemaEntry* schema_entry = find_entry(entry.key);
  if (schema_entry == nullptr) throw ConfigError(fmt::format("{}: unknown key '{}'", entry.where, entry.key));
  try {
    schema_entry->set(config, entry.value);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: key '{}': {}", entry.where, entry.key, e.what()));
  }
  if (entry.key == "array.spacing") spacing_explicit = true;
}

std::pair<std::string, std::string> split_assignment(const std::string& assignment, const std::string& where) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(fmt::format("{}: expected key=value, got '{}'", where, assignment));
  std::string key = trim(std::string_view(assignment).substr(0, eq));
  std::string value = trim(std::string_view(assignment).substr(eq + 1));
  if (key.empty()) throw ConfigError(fmt::format("{}: empty key in '{}'", where, assignment));
  return {key, value};
}

void finalize(ExperimentConfig& config, bool spacing_explicit) {
  if (!spacing_explicit) config.scenario.array.spacing = config.scenario.array.wavelength / 2.0;
}

}  // namespace

void ArrayGeometry::validate() const {
  if (num_antennas < 1) throw ConfigError(fmt::format("array: num_antennas must be >= 1, got {}", num_antennas));
  if (!(wavelength > 0.0)) throw ConfigError("array: wavelength must be positive");
  if (!(spacing > 0.0)) throw ConfigError("array: spacing must be positive");
}

void AgingConfig::validate() const {
  if (!(user_speed >= 0.0)) throw ConfigError("aging: user_speed must be nonnegative");
  if (!(wavelength > 0.0)) throw ConfigError("aging: wavelength must be positive");
  if (!(sampling_frequency > 0.0)) throw ConfigError("aging: sampling_frequency must be positive");
  if (!(csi_delay >= 0.0)) throw ConfigError("aging: csi_delay must be nonnegative");
}

double ScenarioConfig::noise_power() const { return transmit_power / std::pow(10.0, snr_db / 10.0); }

double ScenarioConfig::half_width() const {
  return spread_mapping == SpreadMapping::kStdDev ? std::sqrt(3.0) * angular_std_dev : angular_std_dev;
}

AgingConfig ScenarioConfig::aging() const { return {user_speed, array.wavelength, sampling_frequency, csi_delay}; }

bool ScenarioConfig::has_diffuse() const { return std::isfinite(power_ratio); }

void ScenarioConfig::validate() const {
  if (num_users < 1) throw ConfigError(fmt::format("scenario: num_users must be >= 1, got {}", num_users));
  if (paths_per_user < 1)
    throw ConfigError(fmt::format("scenario: paths_per_user must be >= 1, got {}", paths_per_user));
  if (!(power_ratio > 0.0)) throw ConfigError("scenario: power_ratio must be positive");
  if (!(angle_min < angle_max)) throw ConfigError("scenario: angle range is empty or inverted");
  if (angle_min < -kPi / 2.0 || angle_max > kPi / 2.0)
    throw ConfigError("scenario: angle range must lie within [-pi/2, pi/2]");
  if (!(distance_min > 0.0)) throw ConfigError("scenario: distance_min must be positive");
  if (!(distance_min < distance_max)) throw ConfigError("scenario: distance range is empty or inverted");
  if (!(angular_std_dev > 0.0)) throw ConfigError("scenario: angular_std_dev must be positive");
  if (spread_mapping == SpreadMapping::kStdDev && !(angular_std_dev < kPi / 12.0))
    throw ConfigError("scenario: angular_std_dev must be below pi/12");
  if (spread_mapping == SpreadMapping::kHalfWidth && !(angular_std_dev <= kPi / 12.0))
    throw ConfigError("scenario: angular half-width must not exceed pi/12");
  array.validate();
  if (amplitude_model == AmplitudeModel::kConstant && !(constant_amplitude > 0.0 && constant_amplitude <= 1.0))
    throw ConfigError("scenario: constant_amplitude must lie in (0, 1]");
  if (!(reflection_loss_min > 0.0 && reflection_loss_min <= reflection_loss_max && reflection_loss_max <= 1.0))
    throw ConfigError("scenario: reflection loss range must satisfy 0 < min <= max <= 1");
  if (!(transmit_power > 0.0)) throw ConfigError("scenario: transmit_power must be positive");
  if (!std::isfinite(snr_db)) throw ConfigError("scenario: snr_db must be finite");
  aging().validate();
}

void SchedulerConfig::validate() const {
  if (candidate_count < 0) throw ConfigError("scheduler: candidate_count must be nonnegative");
  if (!(sus_epsilon > 0.0 && sus_epsilon < 1.0)) throw ConfigError("scheduler: sus_epsilon must lie in (0, 1)");
  if (!(training.block_length > 0.0)) throw ConfigError("training: block_length must be positive");
  if (!(training.per_user > 0.0)) throw ConfigError("training: per_user must be positive");
}

void SweepPlan::validate() const {
  if (modes.empty()) throw ConfigError("sweep: mode list is empty");
  if (snr_db.empty()) throw ConfigError("sweep: snr grid is empty");
  if (realizations < 1) throw ConfigError("sweep: realizations must be >= 1");
  if (threads < 1) throw ConfigError("sweep: threads must be >= 1");
}

std::string to_string(SchedulerMode mode) {
  switch (mode) {
    case SchedulerMode::kIsp: return "ISP";
    case SchedulerMode::kIspP: return "ISP-P";
    case SchedulerMode::kSusK: return "SUS-K";
    case SchedulerMode::kSusS: return "SUS-S";
    case SchedulerMode::kPerfect: return "PERFECT";
  }
  return "?";
}

SchedulerMode parse_scheduler_mode(const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  if (t == "ISP") return SchedulerMode::kIsp;
  if (t == "ISP-P") return SchedulerMode::kIspP;
  if (t == "SUS-K") return SchedulerMode::kSusK;
  if (t == "SUS-S" || t == "SUS-|S|") return SchedulerMode::kSusS;
  if (t == "PERFECT") return SchedulerMode::kPerfect;
  throw ConfigError(fmt::format("'{}' is not one of ISP, ISP-P, SUS-K, SUS-S, PERFECT", text));
}

ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::vector<std::string>& overrides) {
  ExperimentConfig config;
  std::vector<PendingEntry> pending;
  std::istringstream in(text);
  std::string line;
  std::string section;
  Variant* variant = nullptr;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = fmt::format("{}:{}", source, line_no);
    std::string content = line;
    const auto hash = content.find_first_of("#;");
    if (hash != std::string::npos) content.erase(hash);
    content = trim(content);
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') throw ConfigError(fmt::format("{}: malformed section header '{}'", where, content));
      section = trim(std::string_view(content).substr(1, content.size() - 2));
      variant = nullptr;
      if (section.rfind("variant.", 0) == 0) {
        const std::string name = section.substr(8);
        if (name.empty()) throw ConfigError(fmt::format("{}: variant needs a name", where));
        for (const auto& v : config.sweep.variants)
          if (v.name == name) throw ConfigError(fmt::format("{}: duplicate variant '{}'", where, name));
        config.sweep.variants.push_back({name, {}});
        variant = &config.sweep.variants.back();
        config.has_sweep_section = true;
      } else if (section == "sweep") {
        config.has_sweep_section = true;
      } else if (section != "scenario" && section != "array" && section != "aging" && section != "training" &&
                 section != "scheduler") {
        throw ConfigError(fmt::format("{}: unknown section '{}'", where, section));
      }
      continue;
    }
    auto [key, value] = split_assignment(content, where);
    if (variant != nullptr) {
      if (find_entry(key) == nullptr) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
      variant->overrides.emplace_back(key, value);
      continue;
    }
    if (section.empty()) throw ConfigError(fmt::format("{}: key '{}' outside of any section", where, key));
    pending.push_back({section + "." + key, value, where});
  }
  for (const auto& o : overrides) {
    auto [key, value] = split_assignment(o, "override");
    pending.push_back({key, value, "override"});
  }

  bool spacing_explicit = false;
  for (const auto& entry : pending) apply_entry(config, entry, spacing_explicit);
  finalize(config, spacing_explicit);
  // Variants inherit the finalized base, so a variant changing the wavelength
  // keeps the base spacing unless it sets array.spacing itself.
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), overrides);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  auto [key, value] = split_assignment(assignment, "override");
  bool spacing_explicit = true;
  apply_entry(config, {key, value, "override"}, spacing_explicit);
}

ExperimentConfig apply_variant(const ExperimentConfig& base, const Variant& variant) {
  ExperimentConfig out = base;
  out.sweep.variants.clear();
  bool spacing_explicit = true;
  for (const auto& [key, value] : variant.overrides)
    apply_entry(out, {key, value, fmt::format("variant '{}'", variant.name)}, spacing_explicit);
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : schema()) keys.emplace_back(e.key);
  return keys;
}

}  // namespace xlmimo
