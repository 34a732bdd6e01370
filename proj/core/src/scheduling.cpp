#include "xlmimo/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "xlmimo/nearfield.hpp"
#include "xlmimo/scenario.hpp"

namespace xlmimo {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Index of the largest value among users flagged in `eligible`; lowest id on ties.
std::size_t argmax_eligible(const std::vector<double>& values, const std::vector<char>& eligible) {
  std::size_t best = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!eligible[i]) continue;
    if (best == values.size() || values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<CVector> gather(std::span<const CVector> channels, const std::vector<UserId>& users) {
  std::vector<CVector> out;
  out.reserve(users.size());
  for (UserId k : users) out.push_back(channels[k]);
  return out;
}

}  // namespace

LinkBudget LinkBudget::from_snr_db(double transmit_power, double snr_db) {
  return {transmit_power, transmit_power / std::pow(10.0, snr_db / 10.0)};
}

double update_equivalent_gain(double gain, const std::vector<CVector>& responses, const CMatrix& correlation,
                              const CMatrix& precoder_outer_sum) {
  const CMatrix& f = precoder_outer_sum;
  double penalty = 0.0;
  for (const auto& h : responses) penalty += h.dot(f * h).real();
  if (correlation.size() != 0) penalty += correlation.cwiseProduct(f.transpose()).sum().real();
  return gain - penalty;
}

std::vector<UserId> candidate_set(std::span<const double> gains, std::span<const UserId> scheduled,
                                  CandidatePolicy policy, int count, double threshold) {
  std::vector<char> in_s(gains.size(), 0);
  for (UserId k : scheduled) in_s.at(k) = 1;
  std::vector<UserId> rest;
  for (UserId k = 0; k < gains.size(); ++k)
    if (!in_s[k]) rest.push_back(k);
  std::stable_sort(rest.begin(), rest.end(), [&](UserId a, UserId b) { return gains[a] > gains[b]; });

  if (policy == CandidatePolicy::kThreshold) {
    std::vector<UserId> out;
    for (UserId k : rest)
      if (gains[k] >= threshold) out.push_back(k);
    return out;
  }
  if (count < 0) throw DomainError("candidate_set: negative candidate count");
  if (rest.size() > static_cast<std::size_t>(count)) rest.resize(static_cast<std::size_t>(count));
  return rest;
}

double prelog_factor(double block_length, double per_user, std::size_t trained_users) {
  const double used = static_cast<double>(trained_users) * per_user;
  if (!(used < block_length))
    throw DomainError(fmt::format("prelog_factor: training {} users x {} samples leaves no data in a block of {}",
                                  trained_users, per_user, block_length));
  return (block_length - used) / block_length;
}

ScheduleResult isp_schedule(const Scenario& scenario, std::span<const CVector> estimates,
                            const SchedulerConfig& config, const LinkBudget& link) {
  const auto K = static_cast<std::size_t>(scenario.num_users());
  const int M = scenario.num_antennas();
  if (estimates.size() != K)
    throw DomainError(fmt::format("isp_schedule: {} estimates for {} users", estimates.size(), K));

  ScheduleResult result;
  result.initial_gains.resize(K);
  for (UserId k = 0; k < K; ++k) result.initial_gains[k] = equivalent_gain(scenario, k);
  const std::vector<double>& g0 = result.initial_gains;

  auto metric_prelog = [&](const std::vector<UserId>& scheduled) {
    if (!config.training.overhead_aware) return 1.0;
    const auto g = candidate_set(g0, scheduled, config.candidate_policy, config.candidate_count,
                                 config.candidate_threshold);
    return prelog_factor(config.training.block_length, config.training.per_user, scheduled.size() + g.size());
  };

  std::vector<double> current = g0;         // g_k^{(l)}, possibly stale
  std::vector<std::size_t> stamp(K, 0);     // iteration at which current[k] was refreshed
  std::vector<char> eligible(K, 1);
  CMatrix outer = CMatrix::Zero(M, M);      // F^{(l)}
  std::size_t iteration = 0;
  double best_metric = kNegInf;
  const std::size_t max_users = std::min<std::size_t>(K, static_cast<std::size_t>(M));

  while (result.scheduled.size() < max_users) {
    std::size_t k = argmax_eligible(current, eligible);
    if (k == K) break;
    for (;;) {
      if (stamp[k] != iteration) {
        const auto& u = scenario.user(k);
        current[k] = update_equivalent_gain(g0[k], u.responses, u.correlation.matrix(), outer);
        stamp[k] = iteration;
        ++result.gain_refreshes;
      }
      const std::size_t q = argmax_eligible(current, eligible);
      if (q == k) break;
      k = q;
    }

    std::vector<UserId> trial = result.scheduled;
    trial.push_back(k);
    PrecoderSet precoders;
    double metric = kNegInf;
    try {
      const auto channels = gather(estimates, trial);
      double prelog = 1.0;
      try {
        prelog = metric_prelog(trial);
      } catch (const DomainError&) {
        prelog = 0.0;  // no data symbols left: never an improvement
      }
      precoders = design_zf(channels, trial, link.transmit_power, link.noise_power, prelog);
      metric = prelog > 0.0 ? sum_se(precoders, channels, link.noise_power, prelog).sum : kNegInf;
    } catch (const SingularityError&) {
      eligible[k] = 0;
      result.singular_rejections.push_back(k);
      continue;
    }

    if (!(metric > best_metric)) {
      result.metric_trace.push_back(metric);
      result.ended_on_rejection = true;
      break;
    }
    best_metric = metric;
    result.metric_trace.push_back(metric);
    result.accepted_gains.push_back(current[k]);
    result.scheduled = std::move(trial);
    result.precoders = std::move(precoders);
    eligible[k] = 0;
    const CVector& f_new = result.precoders.directions.back();
    outer.noalias() += f_new * f_new.adjoint();
    ++iteration;
  }
  if (result.scheduled.empty())
    throw NumericalError("isp_schedule: no user could be scheduled (all zero-forcing attempts were singular)");

  result.candidates = candidate_set(g0, result.scheduled, config.candidate_policy, config.candidate_count,
                                    config.candidate_threshold);
  result.prelog = config.training.overhead_aware
                      ? prelog_factor(config.training.block_length, config.training.per_user,
                                      result.scheduled.size() + result.candidates.size())
                      : 1.0;
  result.precoders.prelog = result.prelog;
  return result;
}

ScheduleResult sus_schedule(std::span<const CVector> channels, double epsilon, const LinkBudget& link,
                            std::size_t max_users) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("sus_schedule: epsilon must lie in (0, 1)");
  const std::size_t K = channels.size();
  if (K == 0) throw DomainError("sus_schedule: no users");
  const Eigen::Index M = channels.front().size();
  max_users = std::min({max_users, K, static_cast<std::size_t>(M)});

  ScheduleResult result;
  std::vector<char> pool(K, 1);
  std::vector<CVector> basis;  // orthonormal directions of the selected users' orthogonal components
  std::vector<double> norms(K);
  std::vector<double> residual(K);
  for (std::size_t k = 0; k < K; ++k) norms[k] = channels[k].norm();
  double best_metric = kNegInf;

  while (result.scheduled.size() < max_users) {
    // Orthogonal component norm for every user still in the pool.
    std::vector<CVector> orth(K);
    for (std::size_t k = 0; k < K; ++k) {
      if (!pool[k]) {
        residual[k] = kNegInf;
        continue;
      }
      CVector g = channels[k];
      for (const auto& q : basis) g -= q * q.dot(g);
      residual[k] = g.norm();
      orth[k] = std::move(g);
    }
    const std::size_t pick = argmax_eligible(residual, pool);
    if (pick == K) break;

    std::vector<UserId> trial = result.scheduled;
    trial.push_back(pick);
    PrecoderSet precoders;
    double metric = kNegInf;
    try {
      const auto chosen = gather(channels, trial);
      precoders = design_zf(chosen, trial, link.transmit_power, link.noise_power, 1.0);
      metric = sum_se(precoders, chosen, link.noise_power, 1.0).sum;
    } catch (const SingularityError&) {
      pool[pick] = 0;
      result.singular_rejections.push_back(pick);
      continue;
    }
    if (!(metric > best_metric)) {
      result.metric_trace.push_back(metric);
      result.ended_on_rejection = true;
      break;
    }
    best_metric = metric;
    result.metric_trace.push_back(metric);
    result.scheduled = std::move(trial);
    result.precoders = std::move(precoders);
    pool[pick] = 0;

    const CVector& g = orth[pick];
    const double gnorm = residual[pick];
    basis.push_back(g / gnorm);
    for (std::size_t k = 0; k < K; ++k) {
      if (!pool[k]) continue;
      const double corr = std::abs(channels[k].dot(g)) / (norms[k] * gnorm);
      if (!(corr < epsilon)) pool[k] = 0;
    }
  }
  if (result.scheduled.empty())
    throw NumericalError("sus_schedule: no user could be scheduled (all zero-forcing attempts were singular)");
  return result;
}

}  // namespace xlmimo
