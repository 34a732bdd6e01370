#include "xlmimo/linalg.hpp"

#include <fmt/format.h>

namespace xlmimo {

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

PsdRepair repair_psd(const CMatrix& a, double relative_tolerance) {
  if (a.rows() != a.cols()) throw DomainError("repair_psd: matrix is not square");
  PsdRepair out;
  const Eigen::Index n = a.rows();
  if (n == 0) return out;

  const CMatrix h = hermitian_part(a);
  const double trace = h.trace().real();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw NumericalError("repair_psd: eigendecomposition failed");

  Eigen::VectorXd lambda = eig.eigenvalues();
  out.min_eigenvalue = lambda.minCoeff();
  out.max_eigenvalue = lambda.maxCoeff();
  if (out.max_eigenvalue <= 0.0) {
    if (out.min_eigenvalue < 0.0 && -out.min_eigenvalue > relative_tolerance * std::abs(trace))
      throw NumericalError(fmt::format("repair_psd: matrix is negative definite (min eigenvalue {:.6e})",
                                       out.min_eigenvalue));
    out.matrix = CMatrix::Zero(n, n);
    out.factor = CMatrix::Zero(n, n);
    out.clipped = out.min_eigenvalue < 0.0;
    return out;
  }
  const double floor = -relative_tolerance * out.max_eigenvalue;
  if (out.min_eigenvalue < floor)
    throw NumericalError(fmt::format(
        "repair_psd: min eigenvalue {:.6e} below -{:.1e} * max eigenvalue {:.6e}",
        out.min_eigenvalue, relative_tolerance, out.max_eigenvalue));

  for (Eigen::Index i = 0; i < n; ++i) {
    if (lambda(i) < 0.0) {
      lambda(i) = 0.0;
      out.clipped = true;
    }
  }
  const double clipped_trace = lambda.sum();
  const double scale = (out.clipped && clipped_trace > 0.0) ? trace / clipped_trace : 1.0;
  lambda *= scale;

  const CMatrix& v = eig.eigenvectors();
  out.factor = v * lambda.cwiseSqrt().asDiagonal();
  if (out.clipped) {
    out.matrix = hermitian_part(out.factor * out.factor.adjoint());
  } else {
    out.matrix = h;
  }
  return out;
}

CMatrix stack_factors(const std::vector<CVector>& rank_one, const CMatrix& factor) {
  const Eigen::Index rows = rank_one.empty() ? factor.rows() : rank_one.front().size();
  const Eigen::Index cols = static_cast<Eigen::Index>(rank_one.size()) + factor.cols();
  CMatrix out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& v : rank_one) out.col(c++) = v;
  if (factor.cols() > 0) out.rightCols(factor.cols()) = factor;
  return out;
}

}  // namespace xlmimo
