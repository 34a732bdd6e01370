#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "xlmimo/config.hpp"
#include "xlmimo/correlation.hpp"
#include "xlmimo/experiment.hpp"
#include "xlmimo/nearfield.hpp"
#include "xlmimo/pipeline.hpp"
#include "xlmimo/scenario.hpp"
#include "xlmimo/validation.hpp"

namespace fs = std::filesystem;
using namespace xlmimo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

constexpr double kQuadratureTolerance = 1e-6;
constexpr double kFarFieldTolerance = 1e-4;
constexpr double kFarFieldRadius = 1e6;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

ExperimentConfig load(const CommonOptions& o) {
  ExperimentConfig config = o.config_path.empty() ? parse_config("", "<defaults>", o.overrides)
                                                  : load_config(o.config_path, o.overrides);
  if (o.seed) config.scenario.seed = *o.seed;
  if (o.threads) config.sweep.threads = *o.threads;
  config.scenario.validate();
  config.scheduler.validate();
  return config;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "Configuration file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", o.overrides, "Override a key: section.key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "Master seed (overrides scenario.seed)");
}

int cmd_run(const CommonOptions& o) {
  const ExperimentConfig config = load(o);
  const std::uint64_t seed = realization_seed(config.scenario.seed, 0);
  const Scenario scenario = build_scenario(config.scenario, seed);
  const auto link = LinkBudget::from_snr_db(config.scenario.transmit_power, config.scenario.snr_db);
  const PipelineOutcome out = run_block_pipeline(scenario, config.scheduler, link, seed);

  fmt::print("mode {}  snr {} dB  seed {}  users {}  antennas {}\n", to_string(out.mode), config.scenario.snr_db,
             config.scenario.seed, scenario.num_users(), scenario.num_antennas());
  fmt::print("{:>6} {:>12} {:>12} {:>12}\n", "user", "g_k", "power", "se");
  for (std::size_t i = 0; i < out.precoders.size(); ++i) {
    const UserId k = out.precoders.users[i];
    fmt::print("{:>6} {:>12.4f} {:>12.6f} {:>12.6f}\n", k, equivalent_gain(scenario, k), out.precoders.powers[i],
               out.rates.per_user[i]);
  }
  fmt::print("scheduled {}  candidates {}  prelog {:.6f}\n", out.num_scheduled(), out.num_candidates(), out.prelog);
  fmt::print("sum_se {:.6f}\n", out.sum_se());
  return kExitOk;
}

int cmd_sweep(const CommonOptions& o, const std::string& out_dir) {
  const ExperimentConfig base = load(o);
  if (!base.has_sweep_section) throw ConfigError("sweep: configuration has no [sweep] section");
  base.sweep.validate();
  fs::create_directories(out_dir);

  std::vector<std::pair<std::string, ExperimentConfig>> runs;
  if (base.sweep.variants.empty()) {
    runs.emplace_back("sweep", base);
  } else {
    for (const auto& v : base.sweep.variants) {
      ExperimentConfig c = apply_variant(base, v);
      c.scenario.validate();
      c.scheduler.validate();
      c.sweep.validate();
      runs.emplace_back(v.name, std::move(c));
    }
  }

  int failed_rows = 0;
  for (const auto& [name, config] : runs) {
    std::fprintf(stderr, "[%s] %zu modes x %zu snr x %d realizations\n", name.c_str(), config.sweep.modes.size(),
                 config.sweep.snr_db.size(), config.sweep.realizations);
    const auto records = snr_sweep(config, [&](const SweepProgress& p) {
      std::fprintf(stderr, "\r[%s] realization %d/%d", name.c_str(), p.done, p.total);
      if (p.done == p.total) std::fputc('\n', stderr);
    });
    for (const auto& r : records) {
      if (!r.failed()) continue;
      ++failed_rows;
      std::fprintf(stderr, "[%s] %s %g dB realization %d failed: %s\n", name.c_str(), to_string(r.mode).c_str(),
                   r.snr_db, r.realization, r.error.c_str());
    }
    const Aggregation agg = aggregate(records);
    for (const auto& w : agg.warnings) std::fprintf(stderr, "[%s] warning: %s\n", name.c_str(), w.c_str());
    write_raw_csv(records, fs::path(out_dir) / (name + "_raw.csv"));
    write_aggregate_csv(agg.rows, fs::path(out_dir) / (name + "_aggregate.csv"));
  }
  if (failed_rows > 0) std::fprintf(stderr, "%d rows failed and were excluded from the aggregates\n", failed_rows);
  return kExitOk;
}

PhaseModel parse_phase_model(const std::string& s) {
  if (s == "fresnel") return PhaseModel::kFresnel;
  if (s == "quadratic") return PhaseModel::kQuadratic;
  throw ConfigError(fmt::format("--phase-model: '{}' is not one of fresnel, quadratic", s));
}

void print_grid(const char* label, const GridReport& r, double tolerance) {
  fmt::print("{}: entries {}  max error {:.3e}  tolerance {:.0e}  time {:.2f} s  {}\n", label, r.entries, r.max_error,
             tolerance, r.seconds, r.max_error <= tolerance ? "ok" : "FAIL");
  if (r.max_error > tolerance) {
    const auto& w = r.worst;
    fmt::print("  worst m={} n={} r={} angle={:.6f}  closed form {:.12g}{:+.12g}j  reference {:.12g}{:+.12g}j\n", w.m,
               w.n, w.radius, w.angle, w.closed_form.real(), w.closed_form.imag(), w.reference.real(),
               w.reference.imag());
  }
}

int cmd_validate_correlation(const CommonOptions& o, const std::string& model, bool inject_fault, int stride,
                             const std::vector<double>& radii) {
  const ExperimentConfig config = load(o);
  const auto& geom = config.scenario.array;
  const double half_width = config.scenario.half_width();
  CorrelationGridOptions options;
  options.quadrature.model = parse_phase_model(model);
  options.pair_stride = stride;
  if (!radii.empty()) options.radii = radii;
  if (inject_fault) options.fault = cplx(1e-3, 0.0);

  fmt::print("M {}  lambda {}  d {}  half-width {:.6f} rad  phase model {}\n", geom.num_antennas, geom.wavelength,
             geom.spacing, half_width, model);
  const GridReport quad = compare_closed_form_to_quadrature(geom, half_width, 1.0, options);
  print_grid("closed form vs quadrature", quad, kQuadratureTolerance);
  const GridReport far = compare_closed_form_to_farfield(geom, half_width, 1.0, kFarFieldRadius, options);
  print_grid("closed form vs far field (r = 1e6 m)", far, kFarFieldTolerance);
  return quad.max_error <= kQuadratureTolerance && far.max_error <= kFarFieldTolerance ? kExitOk : kExitFailure;
}

int cmd_validate_gains(const CommonOptions& o, int draws, bool inject_fault) {
  const ExperimentConfig config = load(o);
  const std::uint64_t seed = realization_seed(config.scenario.seed, 0);
  Scenario scenario = build_scenario(config.scenario, seed);
  if (inject_fault) scenario = miscalibrate_diffuse(scenario, 1.5);
  const GainReport report = validate_gains(scenario, draws, seed);

  fmt::print("{:>6} {:>14} {:>12} {:>14} {:>14} {:>8} {:>10}\n", "user", "mc_mean", "stderr", "exact", "equivalent",
             "z", "identity");
  int breaches = 0;
  for (const auto& u : report.users) {
    const bool ok = u.within(3.0) && u.identity_error <= 1e-10;
    if (!ok) ++breaches;
    fmt::print("{:>6} {:>14.6f} {:>12.6f} {:>14.6f} {:>14.6f} {:>8.3f} {:>10.2e}{}\n", u.user, u.sample_mean,
               u.standard_error, u.exact, u.equivalent, u.z_score(), u.identity_error, ok ? "" : "  FAIL");
  }
  fmt::print("draws {}  users {}  breaches {}  time {:.2f} s\n", draws, report.users.size(), breaches, report.seconds);
  return breaches == 0 ? kExitOk : kExitFailure;
}

nlohmann::json scenario_json(const Scenario& s) {
  nlohmann::json users = nlohmann::json::array();
  for (UserId k = 0; k < static_cast<UserId>(s.num_users()); ++k) {
    const auto& u = s.user(k);
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : u.paths)
      paths.push_back({{"radius", p.radius}, {"angle", p.angle}, {"amplitude", p.amplitude}, {"is_los", p.is_los}});
    const auto& ls = u.correlation.params();
    users.push_back({{"id", k},
                     {"radius", u.geometry.radius},
                     {"angle", u.geometry.angle},
                     {"paths", paths},
                     {"diffuse_gain", ls.gain},
                     {"half_width", ls.half_width},
                     {"equivalent_gain", equivalent_gain(s, k)},
                     {"expected_gain", expected_gain_exact(s, k)}});
  }
  const auto& a = s.array();
  return {{"seed", s.seed()},
          {"array", {{"num_antennas", a.num_antennas}, {"wavelength", a.wavelength}, {"spacing", a.spacing}}},
          {"power_ratio", std::isfinite(s.config().power_ratio) ? nlohmann::json(s.config().power_ratio)
                                                                : nlohmann::json("inf")},
          {"users", users}};
}

int cmd_dump_scenario(const CommonOptions& o, const std::string& out) {
  const ExperimentConfig config = load(o);
  const Scenario scenario = build_scenario(config.scenario, realization_seed(config.scenario.seed, 0));
  const std::string text = scenario_json(scenario).dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", out));
    f << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Downlink XL-MIMO scheduling and precoding simulator", "xlmimo"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string out_dir = "results";
  std::string out_file;
  std::string phase_model = "fresnel";
  bool inject_fault = false;
  int draws = 10000;
  int stride = 1;
  int threads = 0;
  std::vector<double> radii;

  auto* run = app.add_subcommand("run", "Run one realization and print the per-user SE");
  add_common(run, common);

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo SNR sweep; writes raw and aggregate CSVs per variant");
  add_common(sweep, common);
  sweep->add_option("-o,--out", out_dir, "Output directory (created if missing)");
  sweep->add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* vcorr = app.add_subcommand("validate-correlation", "Closed-form correlation against quadrature and far field");
  add_common(vcorr, common);
  vcorr->add_option("--phase-model", phase_model, "Quadrature phase: fresnel or quadratic");
  vcorr->add_option("--stride", stride, "Compare every stride-th element pair")->check(CLI::PositiveNumber);
  vcorr->add_option("--radius", radii, "Scatterer radius in meters (repeatable; default 40 and 230)")
      ->check(CLI::PositiveNumber);
  vcorr->add_flag("--inject-fault", inject_fault, "Corrupt the closed form (negative control)");

  auto* vgain = app.add_subcommand("validate-gains", "Monte Carlo check of the expected and equivalent gains");
  add_common(vgain, common);
  vgain->add_option("--draws", draws, "Channel draws per user")->check(CLI::Range(2, 100000000));
  vgain->add_flag("--inject-fault", inject_fault, "Mis-calibrate the diffuse power (negative control)");

  auto* dump = app.add_subcommand("dump-scenario", "Print the realization-0 scenario as JSON");
  add_common(dump, common);
  dump->add_option("-o,--out", out_file, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (threads > 0) common.threads = threads;

  try {
    if (*run) return cmd_run(common);
    if (*sweep) return cmd_sweep(common, out_dir);
    if (*vcorr) return cmd_validate_correlation(common, phase_model, inject_fault, stride, radii);
    if (*vgain) return cmd_validate_gains(common, draws, inject_fault);
    if (*dump) return cmd_dump_scenario(common, out_file);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitUsage;
  } catch (const SingularityError& e) {
    fmt::print(stderr, "precoding: {}\n", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
