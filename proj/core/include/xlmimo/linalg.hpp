#pragma once

#include "xlmimo/common.hpp"

namespace xlmimo {

// (A + A^H) / 2
CMatrix hermitian_part(const CMatrix& a);

// Result of repairing a numerically indefinite Hermitian matrix.
struct PsdRepair {
  CMatrix matrix;  // Hermitian PSD, trace equal to the input trace
  CMatrix factor;  // matrix = factor * factor^H
  double min_eigenvalue = 0.0;  // before clipping
  double max_eigenvalue = 0.0;
  bool clipped = false;
};

// Symmetrizes, eigendecomposes, clips eigenvalues in [-tol * lambda_max, 0)
// to zero and rescales so the trace is preserved. Throws NumericalError when
// an eigenvalue lies below -tol * lambda_max.
PsdRepair repair_psd(const CMatrix& a, double relative_tolerance = 1e-8);

// Tall sampling factor of sum_s v_s v_s^H + L L^H, built by concatenation:
// [v_1 ... v_S | L]. No decomposition is needed.
CMatrix stack_factors(const std::vector<CVector>& rank_one, const CMatrix& factor);

}  // namespace xlmimo
