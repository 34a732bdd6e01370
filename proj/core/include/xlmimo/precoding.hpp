#pragma once

#include <span>
#include <vector>

#include "xlmimo/common.hpp"

namespace xlmimo {

struct PrecoderSet {
  std::vector<UserId> users;        // ordered like directions / powers
  std::vector<CVector> directions;  // unit norm
  std::vector<double> powers;       // p_k^2, watts
  double prelog = 1.0;

  std::size_t size() const noexcept { return users.size(); }
  CVector precoder(std::size_t i) const;  // f_i * sqrt(p_i^2)
  double total_power() const;
};

// Gram matrices with condition number above this are rejected.
inline constexpr double kMaxGramCondition = 1e12;

// Unit-norm zero-forcing directions for the given channel vectors: the
// columns of H (H^H H)^{-1}, normalized, with H = [h_1 ... h_L]. Then
// f_j^H h_k = 0 for j != k. `users` only labels the channels in errors.
// Throws SingularityError (naming the users spanning the near-null space)
// when L > M or cond(H^H H) > kMaxGramCondition.
std::vector<CVector> zf_precoders(const std::vector<CVector>& channels, const std::vector<UserId>& users);

// p_k^2 = max(0, mu - noise / g_k) with sum_k p_k^2 = total_power.
std::vector<double> waterfill(std::span<const double> effective_gains, double total_power, double noise_power);

// Water level mu of the allocation above (for KKT checks).
double water_level(std::span<const double> effective_gains, double total_power, double noise_power);

// ZF directions from `channels`, waterfilling on |f_k^H h_k|^2.
PrecoderSet design_zf(const std::vector<CVector>& channels, const std::vector<UserId>& users, double total_power,
                      double noise_power, double prelog = 1.0);

struct RateEvaluation {
  std::vector<double> per_user;  // bits/s/Hz, aligned with PrecoderSet::users
  double sum = 0.0;
};

// R_k = prelog * log2(1 + |p_k^H h_k|^2 / (noise + sum_{j != k} |p_j^H h_k|^2)).
// `channels[i]` is the channel of precoders.users[i].
RateEvaluation sum_se(const PrecoderSet& precoders, const std::vector<CVector>& channels, double noise_power,
                      double prelog);

}  // namespace xlmimo
