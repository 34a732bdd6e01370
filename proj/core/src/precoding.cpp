#include "xlmimo/precoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace xlmimo {

CVector PrecoderSet::precoder(std::size_t i) const { return directions.at(i) * std::sqrt(powers.at(i)); }

double PrecoderSet::total_power() const { return std::accumulate(powers.begin(), powers.end(), 0.0); }

std::vector<CVector> zf_precoders(const std::vector<CVector>& channels, const std::vector<UserId>& users) {
  if (channels.empty()) return {};
  if (users.size() != channels.size()) throw DomainError("zf_precoders: users and channels differ in length");
  const auto L = static_cast<Eigen::Index>(channels.size());
  const Eigen::Index M = channels.front().size();
  if (L > M)
    throw SingularityError(fmt::format("zf_precoders: {} users exceed {} antennas", L, M), users);

  CMatrix h(M, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    if (channels[static_cast<std::size_t>(i)].size() != M) throw DomainError("zf_precoders: channel length mismatch");
    h.col(i) = channels[static_cast<std::size_t>(i)];
  }
  const CMatrix gram = h.adjoint() * h;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lmin = lambda(0);
  const double lmax = lambda(L - 1);
  if (!(lmin > 0.0) || lmax / lmin > kMaxGramCondition) {
    const CVector null_dir = eig.eigenvectors().col(0);
    const double peak = null_dir.cwiseAbs().maxCoeff();
    std::vector<UserId> offending;
    for (Eigen::Index i = 0; i < L; ++i)
      if (std::abs(null_dir(i)) >= 0.1 * peak) offending.push_back(users[static_cast<std::size_t>(i)]);
    throw SingularityError(fmt::format("zf_precoders: Gram matrix condition number {:.3e} exceeds {:.0e} (users {})",
                                       lmin > 0.0 ? lmax / lmin : INFINITY, kMaxGramCondition,
                                       fmt::join(offending, ", ")),
                           offending);
  }
  const CMatrix inverse = eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint();
  const CMatrix f = h * inverse;

  std::vector<CVector> out;
  out.reserve(channels.size());
  for (Eigen::Index i = 0; i < L; ++i) out.emplace_back(f.col(i).normalized());
  return out;
}

namespace {

struct Waterfill {
  std::vector<double> powers;
  double level = 0.0;
};

Waterfill solve_waterfill(std::span<const double> gains, double total_power, double noise_power) {
  if (gains.empty()) throw DomainError("waterfill: empty gain list");
  if (!(total_power >= 0.0)) throw DomainError("waterfill: total power must be nonnegative");
  if (!(noise_power >= 0.0)) throw DomainError("waterfill: noise power must be nonnegative");
  std::vector<double> floor(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (!(gains[i] > 0.0)) throw DomainError(fmt::format("waterfill: gain {} is not positive", gains[i]));
    floor[i] = noise_power / gains[i];
  }
  std::vector<std::size_t> order(gains.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return floor[a] < floor[b]; });

  // Drop the weakest user while the level does not clear its floor.
  double prefix = 0.0;
  for (std::size_t i : order) prefix += floor[i];
  std::size_t active = order.size();
  double level = (total_power + prefix) / static_cast<double>(active);
  while (active > 1 && level <= floor[order[active - 1]]) {
    prefix -= floor[order[active - 1]];
    --active;
    level = (total_power + prefix) / static_cast<double>(active);
  }
  Waterfill out{std::vector<double>(gains.size(), 0.0), level};
  for (std::size_t r = 0; r < active; ++r) out.powers[order[r]] = std::max(0.0, level - floor[order[r]]);
  return out;
}

}  // namespace

std::vector<double> waterfill(std::span<const double> effective_gains, double total_power, double noise_power) {
  return solve_waterfill(effective_gains, total_power, noise_power).powers;
}

double water_level(std::span<const double> effective_gains, double total_power, double noise_power) {
  return solve_waterfill(effective_gains, total_power, noise_power).level;
}

PrecoderSet design_zf(const std::vector<CVector>& channels, const std::vector<UserId>& users, double total_power,
                      double noise_power, double prelog) {
  PrecoderSet set;
  set.users = users;
  set.prelog = prelog;
  set.directions = zf_precoders(channels, users);
  std::vector<double> gains(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) gains[i] = std::norm(set.directions[i].dot(channels[i]));
  set.powers = waterfill(gains, total_power, noise_power);
  return set;
}

RateEvaluation sum_se(const PrecoderSet& precoders, const std::vector<CVector>& channels, double noise_power,
                      double prelog) {
  const std::size_t n = precoders.size();
  if (channels.size() != n || precoders.directions.size() != n || precoders.powers.size() != n)
    throw DomainError(fmt::format("sum_se: {} precoders but {} channels", n, channels.size()));
  std::vector<CVector> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = precoders.precoder(j);

  RateEvaluation out;
  out.per_user.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double interference = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != k) interference += std::norm(p[j].dot(channels[k]));
    const double signal = std::norm(p[k].dot(channels[k]));
    out.per_user[k] = prelog * std::log2(1.0 + signal / (noise_power + interference));
    out.sum += out.per_user[k];
  }
  return out;
}

}  // namespace xlmimo
