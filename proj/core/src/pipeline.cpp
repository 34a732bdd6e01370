#include "xlmimo/pipeline.hpp"

#include <fmt/format.h>

#include "xlmimo/csi.hpp"
#include "xlmimo/nearfield.hpp"
#include "xlmimo/rng.hpp"
#include "xlmimo/scenario.hpp"

namespace xlmimo {
namespace {

std::vector<CVector> estimate_all(const std::vector<CVector>& h, const std::vector<CVector>& noise, double snr) {
  std::vector<CVector> out;
  out.reserve(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) out.push_back(estimate_channel(h[k], snr, noise[k]));
  return out;
}

std::vector<CVector> gather(const std::vector<CVector>& all, const std::vector<UserId>& users) {
  std::vector<CVector> out;
  out.reserve(users.size());
  for (UserId k : users) out.push_back(all.at(k));
  return out;
}

}  // namespace

BlockDraws draw_block(const Scenario& scenario, std::uint64_t seed) {
  const auto K = static_cast<std::size_t>(scenario.num_users());
  const int M = scenario.num_antennas();
  BlockDraws d;
  d.alpha = temporal_correlation(scenario.config().aging());
  d.h0.reserve(K);
  d.h1.reserve(K);
  d.noise0.reserve(K);
  d.noise1.reserve(K);
  const bool independent = scenario.config().evolution == ChannelEvolution::kIndependent;
  for (UserId k = 0; k < K; ++k) {
    Rng channel(derive_seed(seed, Stream::kChannel, k));
    Rng noise0(derive_seed(seed, Stream::kTrainingNoise0, k));
    Rng innovation(derive_seed(seed, Stream::kInnovation, k));
    Rng noise1(derive_seed(seed, Stream::kTrainingNoise1, k));
    d.h0.push_back(draw_channel(scenario, k, channel));
    d.noise0.push_back(noise0.complex_normal(M));
    if (independent)
      d.h1.push_back(draw_channel(scenario, k, innovation));
    else
      d.h1.push_back(evolve_channel(d.h0.back(), d.alpha, innovation_factor(scenario, k), innovation));
    d.noise1.push_back(noise1.complex_normal(M));
  }
  return d;
}

PipelineOutcome run_block_pipeline(const Scenario& scenario, const BlockDraws& draws,
                                   const SchedulerConfig& config, const LinkBudget& link) {
  const auto K = static_cast<std::size_t>(scenario.num_users());
  if (draws.h0.size() != K || draws.h1.size() != K || draws.noise0.size() != K || draws.noise1.size() != K)
    throw DomainError(fmt::format("run_block_pipeline: draws cover {} users, scenario has {}", draws.h0.size(), K));
  const double snr = link.snr();
  const auto& tr = config.training;

  PipelineOutcome out;
  out.mode = config.mode;
  std::vector<CVector> design;  // channels the final ZF is computed on, aligned with S

  switch (config.mode) {
    case SchedulerMode::kPerfect: {
      SchedulerConfig perfect = config;
      perfect.training.overhead_aware = false;
      out.schedule = isp_schedule(scenario, draws.h1, perfect, link);
      design = gather(draws.h1, out.schedule.scheduled);
      out.prelog = 1.0;
      break;
    }
    case SchedulerMode::kIsp:
    case SchedulerMode::kIspP: {
      const auto est0 = estimate_all(draws.h0, draws.noise0, snr);
      out.schedule = isp_schedule(scenario, est0, config, link);
      out.prelog = out.schedule.prelog;
      if (config.mode == SchedulerMode::kIspP) {
        design = gather(draws.h1, out.schedule.scheduled);
      } else {
        for (UserId k : out.schedule.scheduled) design.push_back(estimate_channel(draws.h1[k], snr, draws.noise1[k]));
      }
      break;
    }
    case SchedulerMode::kSusK:
    case SchedulerMode::kSusS: {
      const auto est0 = estimate_all(draws.h0, draws.noise0, snr);
      out.schedule = sus_schedule(est0, config.sus_epsilon, link, static_cast<std::size_t>(scenario.num_antennas()));
      const std::size_t trained = config.mode == SchedulerMode::kSusK ? K : out.schedule.scheduled.size();
      out.prelog = tr.overhead_aware ? prelog_factor(tr.block_length, tr.per_user, trained) : 1.0;
      out.schedule.prelog = out.prelog;
      for (UserId k : out.schedule.scheduled) design.push_back(estimate_channel(draws.h1[k], snr, draws.noise1[k]));
      break;
    }
  }

  out.precoders = design_zf(design, out.schedule.scheduled, link.transmit_power, link.noise_power, out.prelog);
  out.rates = sum_se(out.precoders, gather(draws.h1, out.schedule.scheduled), link.noise_power, out.prelog);
  return out;
}

PipelineOutcome run_block_pipeline(const Scenario& scenario, const SchedulerConfig& config,
                                   const LinkBudget& link, std::uint64_t seed) {
  return run_block_pipeline(scenario, draw_block(scenario, seed), config, link);
}

}  // namespace xlmimo
