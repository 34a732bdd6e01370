#pragma once

#include "xlmimo/common.hpp"
#include "xlmimo/config.hpp"
#include "xlmimo/rng.hpp"

namespace xlmimo {

class Scenario;

// alpha = J0(2 pi f_d T_s tau_s) with f_d = v / lambda and T_s = 1 / f_s.
double temporal_correlation(const AgingConfig& cfg);

// R_z = sum_s hbar_s hbar_s^H + R_k
CMatrix innovation_covariance(const Scenario& scenario, UserId k);

// Tall factor [hbar_1 ... hbar_S | L_k] of R_z; avoids an eigendecomposition.
CMatrix innovation_factor(const Scenario& scenario, UserId k);

// h[n+1] = alpha h[n] + sqrt(1 - alpha^2) F u, u ~ CN(0, I), where F F^H = R_z.
CVector evolve_channel(const CVector& h, double alpha, const CMatrix& innovation_factor, Rng& rng);

// Least-squares estimate with an orthogonal pilot: h + w, w ~ CN(0, I / snr).
// An infinite snr returns h unchanged.
CVector estimate_channel(const CVector& h, double snr_linear, Rng& rng);

// Same as estimate_channel with the CN(0, I) draw supplied by the caller.
CVector estimate_channel(const CVector& h, double snr_linear, const CVector& unit_noise);

// R_e = alpha^2 (1 / snr) I + (1 - alpha^2) R_z
CMatrix error_covariance(double alpha, double snr_linear, const CMatrix& innovation_cov);

}  // namespace xlmimo
