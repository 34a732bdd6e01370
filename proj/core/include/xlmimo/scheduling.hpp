#pragma once

#include <span>
#include <vector>

#include "xlmimo/common.hpp"
#include "xlmimo/config.hpp"
#include "xlmimo/precoding.hpp"

namespace xlmimo {

class Scenario;

struct LinkBudget {
  double transmit_power = 1.0;
  double noise_power = 0.01;

  double snr() const { return transmit_power / noise_power; }
  static LinkBudget from_snr_db(double transmit_power, double snr_db);
};

struct ScheduleResult {
  std::vector<UserId> scheduled;   // S, in selection order
  std::vector<UserId> candidates;  // G, disjoint from S
  PrecoderSet precoders;           // designed on the channels the scheduler saw
  // Internal metric after every accepted iteration; when the loop ended on a
  // rejected user, its (non-improving) metric is the last entry.
  std::vector<double> metric_trace;
  bool ended_on_rejection = false;
  std::vector<double> initial_gains;   // g_k for every user (ISP only)
  std::vector<double> accepted_gains;  // refreshed gain of each user at acceptance (ISP only)
  std::vector<UserId> singular_rejections;  // users dropped because ZF became singular
  double prelog = 1.0;
  std::size_t gain_refreshes = 0;
};

// g_k - sum_s hbar_s^H F hbar_s - tr(R_k F)
double update_equivalent_gain(double gain, const std::vector<CVector>& responses, const CMatrix& correlation,
                              const CMatrix& precoder_outer_sum);

// Threshold policy: {k not in S : g_k >= nu}. Fixed-size policy: the
// `count` largest g_k outside S. Ties go to the lowest user id. Result is
// sorted by decreasing gain.
std::vector<UserId> candidate_set(std::span<const double> gains, std::span<const UserId> scheduled,
                                  CandidatePolicy policy, int count, double threshold);

// (tau_c - n tau_dot) / tau_c. Throws DomainError if n tau_dot >= tau_c.
double prelog_factor(double block_length, double per_user, std::size_t trained_users);

// Joint scheduling and ZF precoding from long-term statistics and the channel
// estimates `estimates` (one per user of the scenario):
//   * priorities start at the equivalent gains g_k;
//   * each iteration lazily refreshes the provisional winner with the
//     interference penalty of the precoders selected so far until the
//     refreshed winner stays on top, then adds it;
//   * ZF over the estimates of the scheduled set, waterfilling, and the
//     estimated sum SE times the training pre-log with (|S| + |G|) users;
//   * stops at min(K, M) users or when the metric does not improve, in which
//     case the last user is discarded;
//   * a user whose addition makes ZF singular is dropped from the pool.
// Finally G is chosen from the remaining users by the candidate policy.
ScheduleResult isp_schedule(const Scenario& scenario, std::span<const CVector> estimates,
                            const SchedulerConfig& config, const LinkBudget& link);

// Semi-orthogonal user selection: repeatedly adds the user with the largest
// component orthogonal to the span of the selected users, then prunes users
// whose normalized correlation with that component reaches epsilon. Stops at
// `max_users`, an empty pool, or when the sum SE (pre-log 1) stops improving.
ScheduleResult sus_schedule(std::span<const CVector> channels, double epsilon, const LinkBudget& link,
                            std::size_t max_users);

}  // namespace xlmimo
