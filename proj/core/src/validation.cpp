#include "xlmimo/validation.hpp"

#include <chrono>
#include <cmath>

#include "xlmimo/nearfield.hpp"
#include "xlmimo/rng.hpp"
#include "xlmimo/scenario.hpp"

namespace xlmimo {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <class Reference>
GridReport compare_grid(const ArrayGeometry& geom, double half_width, double gain, const std::vector<double>& radii,
                        const CorrelationGridOptions& options, Reference reference) {
  validate_half_width(half_width);
  if (options.pair_stride < 1) throw DomainError("correlation grid: pair_stride must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  GridReport report;
  for (double r : radii) {
    for (double angle : options.angles) {
      const LocalScattering ls{angle, half_width, r, gain};
      for (int i = 0; i < geom.num_antennas; i += options.pair_stride) {
        for (int j = i; j < geom.num_antennas; j += options.pair_stride) {
          const int m = geom.element_index(i);
          const int n = geom.element_index(j);
          const cplx cf = correlation_entry_closed_form(m, n, geom, ls) + options.fault;
          const cplx ref = reference(m, n, ls);
          const double err = std::abs(cf - ref) / gain;
          ++report.entries;
          if (report.entries == 1 || err > report.max_error) {
            report.max_error = err;
            report.worst = {m, n, r, angle, cf, ref, err};
          }
        }
      }
    }
  }
  report.seconds = seconds_since(start);
  return report;
}

}  // namespace

GridReport compare_closed_form_to_quadrature(const ArrayGeometry& geom, double half_width, double gain,
                                             const CorrelationGridOptions& options) {
  return compare_grid(geom, half_width, gain, options.radii, options, [&](int m, int n, const LocalScattering& ls) {
    return correlation_entry_quadrature(m, n, geom, ls, options.quadrature);
  });
}

GridReport compare_closed_form_to_farfield(const ArrayGeometry& geom, double half_width, double gain, double radius,
                                           const CorrelationGridOptions& options) {
  return compare_grid(geom, half_width, gain, {radius}, options, [&](int m, int n, const LocalScattering& ls) {
    return correlation_entry_farfield(m, n, geom, ls);
  });
}

double GainCheck::z_score() const {
  const double diff = sample_mean - exact;
  if (standard_error > 0.0) return diff / standard_error;
  return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
}

bool GainCheck::within(double sigmas) const { return std::abs(z_score()) <= sigmas; }

bool GainReport::passed(double sigmas, double identity_tolerance) const {
  for (const auto& u : users)
    if (!u.within(sigmas) || !(u.identity_error <= identity_tolerance)) return false;
  return !users.empty();
}

GainReport validate_gains(const Scenario& scenario, int draws, std::uint64_t seed) {
  if (draws < 2) throw DomainError("validate_gains: need at least two draws");
  const auto start = std::chrono::steady_clock::now();
  GainReport report;
  for (UserId k = 0; k < static_cast<UserId>(scenario.num_users()); ++k) {
    Rng rng(derive_seed(seed, Stream::kValidation, k));
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int t = 0; t < draws; ++t) {
      const double g = draw_channel(scenario, k, rng).squaredNorm();
      sum += g;
      sum_sq += g * g;
    }
    const double n = draws;
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    GainCheck c;
    c.user = k;
    c.sample_mean = mean;
    c.standard_error = std::sqrt(var / n);
    c.exact = expected_gain_exact(scenario, k);
    c.equivalent = equivalent_gain(scenario, k);
    c.identity_error = std::abs(c.equivalent - c.exact) / c.exact;
    report.users.push_back(c);
  }
  report.seconds = seconds_since(start);
  return report;
}

Scenario miscalibrate_diffuse(const Scenario& scenario, double scale) {
  if (!(scale > 0.0)) throw DomainError("miscalibrate_diffuse: scale must be positive");
  std::vector<UserChannelModel> users = scenario.users();
  for (auto& u : users) {
    if (u.correlation.is_zero()) continue;
    LocalScattering params = u.correlation.params();
    params.gain *= scale;
    u.correlation = CorrelationMatrix(u.correlation.matrix() * scale, u.correlation.factor() * std::sqrt(scale), params);
  }
  return Scenario(scenario.config(), scenario.seed(), std::move(users));
}

}  // namespace xlmimo
