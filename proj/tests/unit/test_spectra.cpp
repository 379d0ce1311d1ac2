#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <hltp/floquet.hpp>
#include <hltp/spectra.hpp>
#include <hltp/system_io.hpp>

#include "../support/oracles.hpp"

using namespace hltp;

namespace {

std::string data(const std::string& name) { return std::string(HLTP_DATA_DIR) + "/systems/" + name; }

// Sorted copy for multiset comparison.
std::vector<cdouble> sorted(std::vector<cdouble> v) {
  std::sort(v.begin(), v.end(), [](cdouble a, cdouble b) {
    return std::make_pair(a.imag(), a.real()) < std::make_pair(b.imag(), b.real());
  });
  return v;
}

double multiset_distance(const VectorXcd& a, std::vector<cdouble> b) {
  std::vector<cdouble> av(a.data(), a.data() + a.size());
  av = sorted(av);
  b = sorted(b);
  if (av.size() != b.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (size_t i = 0; i < av.size(); ++i) d = std::max(d, std::abs(av[i] - b[i]));
  return d;
}

}  // namespace

TEST(TruncatedSpectrum, ZeroSystem) {
  const int m = 5;
  const FourierMatrix A = FourierMatrix::zero(2.0, 2, 2);
  std::vector<cdouble> expect;
  for (int p = 0; p < 2; ++p)
    for (int k = -m; k <= m; ++k) expect.push_back(cdouble(0.0, -A.omega() * k));
  EXPECT_LT(multiset_distance(truncated_spectrum(A, m).eigs, expect), 1e-13);
}

TEST(TruncatedSpectrum, ConstantSystem) {
  MatrixXcd c(2, 2);
  c << -1.0, 2.0, -0.5, -4.0;
  const FourierMatrix A = FourierMatrix::constant(1.0, c);
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<MatrixXcd>(c).eigenvalues();
  const int m = 4;
  std::vector<cdouble> expect;
  for (int p = 0; p < 2; ++p)
    for (int k = -m; k <= m; ++k) expect.push_back(ev(p) - cdouble(0.0, A.omega() * k));
  EXPECT_LT(multiset_distance(truncated_spectrum(A, m).eigs, expect), 1e-12);
}

TEST(Classify, ConstantSystemAllConverged) {
  MatrixXcd c(2, 2);
  c << -1.0, 2.0, -0.5, -4.0;
  const FourierMatrix A = FourierMatrix::constant(1.0, c);
  const HarmonicSpectrum exact = HarmonicSpectrum::from(floquet_factorize(A));
  const SpectrumClassification cl = classify(truncated_spectrum(A, 6).eigs, 6, exact);
  EXPECT_EQ(cl.lambda1.size(), 26u);
  EXPECT_TRUE(cl.lambda2_plus.empty());
  EXPECT_TRUE(cl.lambda2_minus.empty());
  EXPECT_TRUE(cl.truncation_is_hurwitz);
}

TEST(Classify, SpectrumExamplePartitionAndFlags) {
  const LtpSystem sys = load_system(data("boundary2x2.json"));
  const FloquetFactorization fac = floquet_factorize(sys.A);
  const HarmonicSpectrum exact = HarmonicSpectrum::from(fac);
  for (int m : {20, 40}) {
    const SpectrumClassification cl = classify(truncated_spectrum(sys.A, m).eigs, m, exact, {}, &sys.A, &fac);
    EXPECT_EQ(cl.lambda1.size() + cl.lambda2_plus.size() + cl.lambda2_minus.size(),
              static_cast<size_t>(2 * (2 * m + 1)));
    for (auto z : cl.lambda1) {
      const double r = z.real();
      EXPECT_TRUE(std::abs(r + 0.3) < 0.05 || std::abs(r + 2.7) < 0.05) << z;
    }
    double max_re = -1e300;
    for (auto z : cl.lambda2_plus) max_re = std::max(max_re, z.real());
    EXPECT_GT(max_re, 0.0);
    EXPECT_FALSE(cl.truncation_is_hurwitz);
    EXPECT_TRUE(cl.exact_is_hurwitz);
    // Real A: boundary sets mirror each other.
    std::vector<cdouble> conj_minus;
    for (auto z : cl.lambda2_minus) conj_minus.push_back(std::conj(z));
    const auto a = sorted(cl.lambda2_plus), b = sorted(conj_minus);
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i) EXPECT_LT(std::abs(a[i] - b[i]), 1e-8);
    EXPECT_GE(cl.j0, 1);
  }
}

TEST(Classify, BoundaryLayerTranslatesByOmega) {
  const LtpSystem sys = load_system(data("boundary2x2.json"));
  const HarmonicSpectrum exact = HarmonicSpectrum::from(floquet_factorize(sys.A));
  std::vector<cdouble> prev;
  for (int m = 22; m <= 30; ++m) {
    const SpectrumClassification cl = classify(truncated_spectrum(sys.A, m).eigs, m, exact);
    if (!prev.empty()) {
      EXPECT_EQ(cl.lambda2_plus.size(), prev.size());
      EXPECT_LT(shift_distance(prev, cl.lambda2_plus, sys.A.omega()), 1e-8) << "m = " << m;
    }
    prev = cl.lambda2_plus;
  }
}

TEST(Classify, ResidualsOfConvergedEigenvaluesDecay) {
  const LtpSystem sys = load_system(data("boundary2x2.json"));
  const FloquetFactorization fac = floquet_factorize(sys.A);
  const HarmonicSpectrum exact = HarmonicSpectrum::from(fac);
  // The central lattice points (k = 0) keep improving as m grows.
  double prev = 1e300;
  for (int m : {10, 20, 30}) {
    const SpectrumClassification cl = classify(truncated_spectrum(sys.A, m).eigs, m, exact, {}, &sys.A, &fac);
    double worst = 0.0;
    for (size_t i = 0; i < cl.residuals.size(); ++i) {
      if (cl.matched_p[i] >= 0 && cl.matched_k[i] == 0) worst = std::max(worst, cl.residuals[i]);
    }
    EXPECT_LT(worst, 2.0 * prev);
    prev = worst;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(ShiftDistance, SizesAndEmptySets) {
  const std::vector<cdouble> a{cdouble(1, 0), cdouble(2, 1)};
  const std::vector<cdouble> b{cdouble(1, 2), cdouble(2, 3), cdouble(9, 9)};
  EXPECT_NEAR(shift_distance(a, b, 2.0), 0.0, 1e-15);
  EXPECT_NEAR(shift_distance(b, a, -2.0), 0.0, 1e-15);
  EXPECT_EQ(shift_distance({}, {}, 1.0), 0.0);
  EXPECT_TRUE(std::isinf(shift_distance(a, {}, 1.0)));
}

TEST(InverseBound, ConstantPositiveSystem) {
  const double c = 0.7;
  const auto b = uniform_inverse_bound(FourierMatrix::constant(1.0, c * MatrixXcd::Identity(2, 2)), {2, 5, 9});
  for (const auto& x : b) EXPECT_NEAR(x.value, 1.0 / c, 1e-12);
}

TEST(InverseBound, ScalarExampleBounded) {
  const LtpSystem sys = load_system(data("scalar1d.json"));
  const auto b = uniform_inverse_bound(sys.A, {8, 16, 24, 32});
  for (const auto& x : b) {
    EXPECT_FALSE(x.singular);
    // Independent SVD of the oracle Toeplitz minus the frequency diagonal.
    MatrixXcd H = oracle::toeplitz(sys.A, x.m);
    for (int k = -x.m; k <= x.m; ++k) H(k + x.m, k + x.m) -= cdouble(0.0, sys.A.omega() * k);
    const auto s = Eigen::BDCSVD<MatrixXcd>(H).singularValues();
    EXPECT_NEAR(x.value, 1.0 / s(s.size() - 1), 1e-9 * x.value);
    EXPECT_LT(x.value, 10.0);
  }
}
