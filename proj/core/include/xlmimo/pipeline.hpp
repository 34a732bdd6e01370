#pragma once

#include <cstdint>
#include <vector>

#include "xlmimo/common.hpp"
#include "xlmimo/config.hpp"
#include "xlmimo/precoding.hpp"
#include "xlmimo/scheduling.hpp"

namespace xlmimo {

class Scenario;

// Random parts of one two-block episode. Training noise is stored as unit
// CN(0, I) draws so the same episode can be replayed at any SNR.
struct BlockDraws {
  std::vector<CVector> h0;      // true channels, block 0
  std::vector<CVector> h1;      // true channels, block 1
  std::vector<CVector> noise0;  // unit training noise, block 0
  std::vector<CVector> noise1;  // unit training noise, block 1
  double alpha = 1.0;
};

// Per-user substreams derive_seed(seed, stream, k) for the block-0 channel,
// both training noises and the innovation, so every user's draws are
// independent of K and of evaluation order.
BlockDraws draw_block(const Scenario& scenario, std::uint64_t seed);

struct PipelineOutcome {
  SchedulerMode mode = SchedulerMode::kIsp;
  ScheduleResult schedule;  // decided on block-0 information
  PrecoderSet precoders;    // final data-stage precoders for block 1
  RateEvaluation rates;     // on the true block-1 channels
  double prelog = 1.0;

  std::size_t num_scheduled() const noexcept { return schedule.scheduled.size(); }
  std::size_t num_candidates() const noexcept { return schedule.candidates.size(); }
  double sum_se() const noexcept { return rates.sum; }
};

// Block 0: every user is trained (warm-up); the scheduler runs on the
// estimates. Block 1: channels have aged, the users the mode trains are
// re-estimated, ZF is recomputed and the sum SE is evaluated on the true
// block-1 channels.
//   ISP     schedule on estimates, final ZF on block-1 estimates, trains S and G
//   ISP-P   same schedule, final ZF on the true block-1 channels
//   SUS-K   SUS on estimates, final ZF on block-1 estimates, trains all K users
//   SUS-S   same schedule as SUS-K, trains only S
//   PERFECT ISP and ZF on the true block-1 channels, pre-log 1
// The training pre-log is applied only when config.training.overhead_aware.
PipelineOutcome run_block_pipeline(const Scenario& scenario, const BlockDraws& draws,
                                   const SchedulerConfig& config, const LinkBudget& link);

PipelineOutcome run_block_pipeline(const Scenario& scenario, const SchedulerConfig& config,
                                   const LinkBudget& link, std::uint64_t seed);

}  // namespace xlmimo
