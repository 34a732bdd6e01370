#include "xlmimo/csi.hpp"

#include <cmath>

#include <fmt/format.h>

#include "xlmimo/linalg.hpp"
#include "xlmimo/scenario.hpp"
#include "xlmimo/special_functions.hpp"

namespace xlmimo {
namespace {

void check_alpha(double alpha) {
  if (!(alpha >= -1.0 && alpha <= 1.0)) throw DomainError(fmt::format("temporal correlation {} outside [-1, 1]", alpha));
}

void check_snr(double snr) {
  if (!(snr > 0.0)) throw DomainError(fmt::format("snr must be positive, got {}", snr));
}

}  // namespace

double temporal_correlation(const AgingConfig& cfg) {
  cfg.validate();
  const double doppler = cfg.user_speed / cfg.wavelength;
  return bessel_j0(2.0 * kPi * doppler * cfg.csi_delay / cfg.sampling_frequency);
}

CMatrix innovation_covariance(const Scenario& scenario, UserId k) {
  const UserChannelModel& u = scenario.user(k);
  CMatrix rz = u.correlation.matrix();
  if (rz.size() == 0) rz = CMatrix::Zero(scenario.num_antennas(), scenario.num_antennas());
  for (const auto& h : u.responses) rz.noalias() += h * h.adjoint();
  return rz;
}

CMatrix innovation_factor(const Scenario& scenario, UserId k) {
  const UserChannelModel& u = scenario.user(k);
  return stack_factors(u.responses, u.correlation.factor());
}

CVector evolve_channel(const CVector& h, double alpha, const CMatrix& factor, Rng& rng) {
  check_alpha(alpha);
  if (factor.rows() != h.size()) throw DomainError("evolve_channel: factor and channel sizes differ");
  const CVector u = rng.complex_normal(factor.cols());
  if (alpha == 1.0) return h;
  return alpha * h + std::sqrt(1.0 - alpha * alpha) * (factor * u);
}

CVector estimate_channel(const CVector& h, double snr_linear, Rng& rng) {
  check_snr(snr_linear);
  return estimate_channel(h, snr_linear, rng.complex_normal(h.size()));
}

CVector estimate_channel(const CVector& h, double snr_linear, const CVector& unit_noise) {
  check_snr(snr_linear);
  if (std::isinf(snr_linear)) return h;
  return h + unit_noise / std::sqrt(snr_linear);
}

CMatrix error_covariance(double alpha, double snr_linear, const CMatrix& innovation_cov) {
  check_alpha(alpha);
  check_snr(snr_linear);
  const double a2 = alpha * alpha;
  const double noise = std::isinf(snr_linear) ? 0.0 : 1.0 / snr_linear;
  CMatrix re = (1.0 - a2) * innovation_cov;
  re.diagonal().array() += a2 * noise;
  return re;
}

}  // namespace xlmimo
