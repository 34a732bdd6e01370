#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "xlmimo/correlation.hpp"
#include "xlmimo/rng.hpp"

using namespace xlmimo;
using xlmimo::testing::complex_near;

namespace {

const ArrayGeometry kArray{64, 0.15, 0.075};
const double kHalfWidth = std::sqrt(3.0) * 10.0 * kPi / 180.0;

LocalScattering cluster(double angle, double radius, double gain = 1.0, double half_width = kHalfWidth) {
  return {angle, half_width, radius, gain};
}

QuadratureOptions quadratic_model() {
  QuadratureOptions o;
  o.model = PhaseModel::kQuadratic;
  return o;
}

}  // namespace

TEST(CorrelationEntry, DiagonalIsGain) {
  for (int m : {-32, 0, 17}) {
    EXPECT_EQ(correlation_entry_closed_form(m, m, kArray, cluster(0.3, 40.0, 2.5)), cplx(2.5, 0.0));
    EXPECT_EQ(correlation_entry_quadrature(m, m, kArray, cluster(0.3, 40.0, 2.5)), cplx(2.5, 0.0));
    EXPECT_EQ(correlation_entry_farfield(m, m, kArray, cluster(0.3, 40.0, 2.5)), cplx(2.5, 0.0));
  }
}

TEST(CorrelationEntry, ReferencePairMatchesHighPrecisionQuadrature) {
  // mpmath values from tests/oracles/generate.py for m = 10, n = -5, r = 40 m,
  // nominal pi/6, half-width sqrt(3) * 10 deg.
  const LocalScattering ls = cluster(kPi / 6.0, 40.0);
  const cplx second_order(0.00227493433733067, 0.013582450503231686);
  const cplx fresnel(0.022590592511857315, 0.024090559532349282);

  EXPECT_TRUE(complex_near(correlation_entry_closed_form(10, -5, kArray, ls), second_order, 1e-12));
  EXPECT_TRUE(complex_near(correlation_entry_quadrature(10, -5, kArray, ls, quadratic_model()), second_order, 1e-12));
  EXPECT_TRUE(complex_near(correlation_entry_quadrature(10, -5, kArray, ls), fresnel, 1e-12));
}

TEST(CorrelationEntry, ClosedFormAveragesTheSecondOrderPhaseOnly) {
  // The closed form keeps terms up to delta^2; the full Fresnel phase keeps
  // sin/cos(nominal + delta) exactly, so near the array the two differ well
  // beyond quadrature accuracy.
  const LocalScattering ls = cluster(kPi / 6.0, 40.0);
  const cplx cf = correlation_entry_closed_form(10, -5, kArray, ls);
  const cplx fresnel = correlation_entry_quadrature(10, -5, kArray, ls);
  EXPECT_GT(std::abs(cf - fresnel), 1e-3);
}

TEST(CorrelationEntry, ClosedFormMatchesSecondOrderQuadratureOnGrid) {
  double worst = 0.0;
  for (double r : {40.0, 230.0})
    for (double angle : {-kPi / 4.0, 0.0, kPi / 4.0})
      for (int m = -32; m < 32; m += 5)
        for (int n = -32; n < 32; n += 3) {
          const LocalScattering ls = cluster(angle, r);
          const cplx cf = correlation_entry_closed_form(m, n, kArray, ls);
          const cplx q = correlation_entry_quadrature(m, n, kArray, ls, quadratic_model());
          worst = std::max(worst, std::abs(cf - q));
        }
  EXPECT_LE(worst, 1e-6);
}

TEST(CorrelationEntry, ConjugateSymmetry) {
  const LocalScattering ls = cluster(-0.4, 55.0);
  for (int m = -32; m < 32; m += 7)
    for (int n = -30; n < 32; n += 9) {
      const cplx a = correlation_entry_closed_form(m, n, kArray, ls);
      const cplx b = correlation_entry_closed_form(n, m, kArray, ls);
      EXPECT_TRUE(complex_near(a, std::conj(b), 1e-13));
    }
}

TEST(CorrelationEntry, LinearInGain) {
  const LocalScattering one = cluster(0.2, 70.0, 1.0);
  const LocalScattering two = cluster(0.2, 70.0, 2.0);
  EXPECT_TRUE(complex_near(correlation_entry_quadrature(3, -8, kArray, two),
                           2.0 * correlation_entry_quadrature(3, -8, kArray, one), 1e-14));
  EXPECT_TRUE(complex_near(correlation_entry_closed_form(3, -8, kArray, two),
                           2.0 * correlation_entry_closed_form(3, -8, kArray, one), 1e-14));
}

TEST(CorrelationEntry, SecondOrderQuadratureConvergesToFarFieldFormula) {
  const ArrayGeometry small{8, 0.15, 0.075};
  QuadratureOptions quad;
  quad.model = PhaseModel::kQuadratic;
  for (double angle : {-kPi / 4.0, 0.0, kPi / 4.0})
    for (int m = -4; m < 4; ++m)
      for (int n = -4; n < 4; ++n) {
        const LocalScattering ls = cluster(angle, 1e6);
        EXPECT_TRUE(complex_near(correlation_entry_quadrature(m, n, small, ls, quad),
                                 correlation_entry_farfield(m, n, small, ls), 1e-6))
            << m << "," << n << " angle " << angle;
      }
}

TEST(CorrelationEntry, FresnelQuadratureKeepsAngularCurvatureAtFarField) {
  // The far-field formula linearizes sin(nominal + delta); the Fresnel phase
  // does not, so even adjacent elements differ once the half-width is 0.3 rad.
  const ArrayGeometry small{8, 0.15, 0.075};
  const LocalScattering ls = cluster(kPi / 4.0, 1e6);
  const cplx fresnel = correlation_entry_quadrature(1, 0, small, ls);
  EXPECT_GT(std::abs(fresnel - correlation_entry_farfield(1, 0, small, ls)), 1e-3);
  const LocalScattering narrow{kPi / 4.0, 0.003, 1e6, 1.0};
  EXPECT_TRUE(complex_near(correlation_entry_quadrature(1, 0, small, narrow),
                           correlation_entry_farfield(1, 0, small, narrow), 1e-4));
}

TEST(CorrelationEntry, ClosedFormConvergesToFarFieldFormula) {
  double worst = 0.0;
  for (double angle : {-kPi / 4.0, 0.0, kPi / 4.0})
    for (int m = -32; m < 32; ++m)
      for (int n = m; n < 32; ++n) {
        const LocalScattering ls = cluster(angle, 1e6);
        worst = std::max(worst, std::abs(correlation_entry_closed_form(m, n, kArray, ls) -
                                         correlation_entry_farfield(m, n, kArray, ls)));
      }
  EXPECT_LE(worst, 1e-4);
}

TEST(CorrelationEntry, FarFieldPointSourceLimit) {
  const LocalScattering ls = cluster(0.5, 1e6, 1.0, 1e-9);
  const double k = kArray.wavenumber();
  const cplx expected = std::exp(kJ * (k * 7.0 * kArray.spacing * std::sin(0.5)));
  EXPECT_TRUE(complex_near(correlation_entry_farfield(4, -3, kArray, ls), expected, 1e-12));
}

TEST(QuadraticPhaseAverage, DegenerateBranches) {
  EXPECT_EQ(quadratic_phase_average(0.0, 0.0, 0.3), cplx(1.0, 0.0));
  EXPECT_TRUE(complex_near(quadratic_phase_average(2.0, 0.0, 0.3), std::sin(0.6) / 0.6, 1e-15));
}

TEST(QuadraticPhaseAverage, ContinuousAcrossSmallCurvatureSwitch) {
  // c crosses the 1e-12 threshold: the error-function branch must agree with
  // the sinc limit.
  for (double b : {0.0, 1e-3, 5.0, 120.0}) {
    const cplx limit = quadratic_phase_average(b, 0.0, 0.3);
    for (double c : {2e-12, 1e-11, 1e-9, 1e-7}) {
      EXPECT_TRUE(complex_near(quadratic_phase_average(b, c, 0.3), limit, 1e-6)) << "b " << b << " c " << c;
      EXPECT_TRUE(complex_near(quadratic_phase_average(b, -c, 0.3), limit, 1e-6)) << "b " << b << " c " << -c;
    }
  }
}

TEST(QuadraticPhaseAverage, ContinuousAlongBroadsidePath) {
  // c -> 0 as the nominal angle -> 0.
  const cplx at_zero = correlation_entry_closed_form(20, -11, kArray, cluster(0.0, 40.0));
  for (double angle : {1e-3, 1e-5, 1e-7, 1e-9}) {
    EXPECT_TRUE(complex_near(correlation_entry_closed_form(20, -11, kArray, cluster(angle, 40.0)), at_zero,
                             std::max(1e-6, 50.0 * angle)));
  }
}

TEST(QuadraticPhaseAverage, StableForLargeCurvature) {
  // Large b and c: the naive erf formula overflows; compare with quadrature.
  const double b = 400.0;
  const double c = 900.0;
  const double hw = 0.45;
  double re = 0.0, im = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double t = -hw + (i + 0.5) * (2.0 * hw / n);
    re += std::cos(b * t + c * t * t);
    im += std::sin(b * t + c * t * t);
  }
  const cplx midpoint(re / n, im / n);
  EXPECT_TRUE(complex_near(quadratic_phase_average(b, c, hw), midpoint, 1e-8));
}

TEST(CorrelationEntry, HalfWidthOutOfRange) {
  EXPECT_THROW(correlation_entry_closed_form(1, 2, kArray, cluster(0.0, 40.0, 1.0, 0.0)), DomainError);
  EXPECT_THROW(correlation_entry_closed_form(1, 2, kArray, cluster(0.0, 40.0, 1.0, 0.5)), DomainError);
  EXPECT_NO_THROW(correlation_entry_closed_form(1, 2, kArray, cluster(0.0, 40.0, 1.0, kMaxHalfWidth)));
  EXPECT_THROW(correlation_entry_quadrature(1, 2, kArray, cluster(0.0, 40.0, 1.0, -0.1)), DomainError);
}

TEST(CorrelationMatrix, HermitianWithCalibratedDiagonal) {
  const CorrelationMatrix r = build_correlation_matrix(kArray, cluster(0.6, 40.0, 3.0));
  EXPECT_EQ(r.size(), 64);
  EXPECT_EQ((r.matrix() - r.matrix().adjoint()).norm(), 0.0);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(r.matrix()(i, i).real(), 3.0, 3e-10);
  EXPECT_NEAR(r.matrix().trace().real(), 64.0 * 3.0, 1e-10 * 64.0 * 3.0);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(r.matrix());
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12 * eig.eigenvalues().maxCoeff());
  EXPECT_LT((r.factor() * r.factor().adjoint() - r.matrix()).norm(), 1e-10 * r.matrix().norm());
}

TEST(CorrelationMatrix, EntriesComeFromClosedForm) {
  const LocalScattering ls = cluster(-0.2, 120.0);
  const CorrelationMatrix r = build_correlation_matrix(kArray, ls);
  for (int i = 0; i < 64; i += 9)
    for (int j = 0; j < 64; j += 7)
      EXPECT_TRUE(complex_near(r.matrix()(i, j),
                               correlation_entry_closed_form(kArray.element_index(i), kArray.element_index(j), kArray, ls),
                               1e-9));
}

TEST(CorrelationMatrix, SampledCovarianceMatchesMatrix) {
  const ArrayGeometry small{8, 0.15, 0.075};
  const CorrelationMatrix r = build_correlation_matrix(small, cluster(0.3, 40.0));
  Rng rng(2024);
  const int draws = 10000;
  // Probe directions: each |v^H x|^2 is a scalar with known mean v^H R v.
  std::vector<CVector> probes;
  for (int i = 0; i < 4; ++i) probes.push_back(Rng(100 + i).complex_normal(8).normalized());
  std::vector<double> sum(probes.size(), 0.0), sum_sq(probes.size(), 0.0);
  for (int t = 0; t < draws; ++t) {
    const CVector x = r.factor() * rng.complex_normal(r.factor().cols());
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const double q = std::norm(probes[p].dot(x));
      sum[p] += q;
      sum_sq[p] += q * q;
    }
  }
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const double mean = sum[p] / draws;
    const double se = std::sqrt((sum_sq[p] / draws - mean * mean) / (draws - 1));
    const double expected = probes[p].dot(r.matrix() * probes[p]).real();
    EXPECT_LE(std::abs(mean - expected), 3.0 * se) << "probe " << p;
  }
}

TEST(CorrelationMatrix, ZeroGainGivesZeroMatrix) {
  const CorrelationMatrix r = build_correlation_matrix(kArray, cluster(0.0, 40.0, 0.0));
  EXPECT_TRUE(r.is_zero());
  EXPECT_EQ(r.matrix().norm(), 0.0);
  EXPECT_EQ(CorrelationMatrix::zero(5).size(), 5);
}

TEST(CorrelationMatrix, CsvDump) {
  const ArrayGeometry small{3, 0.15, 0.075};
  const CorrelationMatrix r = build_correlation_matrix(small, cluster(0.1, 50.0, 2.0));
  const auto path = std::filesystem::temp_directory_path() / "xlmimo_corr_dump.csv";
  write_correlation_csv(r, path);
  std::ifstream in(path);
  std::string header, values, first;
  std::getline(in, header);
  std::getline(in, values);
  std::getline(in, first);
  EXPECT_EQ(header, "M,beta,nominal_angle,half_width,radius");
  EXPECT_EQ(values.rfind("3,2,", 0), 0u);
  EXPECT_EQ(first, "0,0,2,0");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 8);
  std::filesystem::remove(path);
}
