#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <hltp/dense.hpp>
#include <hltp/errors.hpp>
#include <hltp/floquet.hpp>
#include <hltp/riccati.hpp>
#include <hltp/system_io.hpp>

#include "../support/oracles.hpp"

using namespace hltp;

namespace {

std::string data(const std::string& name) { return std::string(HLTP_DATA_DIR) + "/systems/" + name; }

double distance(const FourierMatrix& a, const FourierMatrix& b) {
  const int band = std::max(a.band(), b.band());
  return (a.with_band(band) - b.with_band(band)).l2_norm();
}

struct Constant {
  MatrixXcd A, B, Q, R;
};

Constant unstable_constant() {
  Constant c;
  c.A.resize(2, 2);
  c.A << 0.5, 1.0, -0.3, 0.2;
  c.B.resize(2, 1);
  c.B << 0.0, 1.0;
  c.Q = MatrixXcd::Identity(2, 2);
  c.R = 2.0 * MatrixXcd::Identity(1, 1);
  return c;
}

FourierMatrix K(double T, const MatrixXcd& m) { return FourierMatrix::constant(T, m); }

}  // namespace

TEST(DenseCare, MatchesHamiltonianEigenvectors) {
  const Constant c = unstable_constant();
  const MatrixXcd G = c.B * c.R.inverse() * c.B.adjoint();
  const MatrixXcd X = solve_care(c.A, G, c.Q);
  EXPECT_LT((X - oracle::care(c.A, G, c.Q)).norm(), 1e-10 * X.norm());
  EXPECT_LT((c.A.adjoint() * X + X * c.A - X * G * X + c.Q).norm(), 1e-10);
}

TEST(InitialGain, StableSystemKeepsZero) {
  const InitialGain g = initial_gain(K(1.0, -MatrixXcd::Identity(2, 2)), K(1.0, MatrixXcd::Ones(2, 1)),
                                     FourierMatrix::identity(1.0, 1), FourierMatrix::identity(1.0, 2));
  EXPECT_EQ(g.method, "zero");
  EXPECT_EQ(g.K0.l2_norm(), 0.0);
  EXPECT_LT(g.closed_loop_radius, 1.0);
}

TEST(InitialGain, UnstablePeriodicExampleCertified) {
  const LtpSystem s = load_system(data("unstable2x2.json"));
  const InitialGain g = initial_gain(s.A, *s.B, *s.R, *s.Q);
  EXPECT_NE(g.method, "zero");
  EXPECT_LT(g.closed_loop_radius, 1.0 - 1e-6);
  // Independent check of the certificate with the fixed-step monodromy.
  FourierMatrix Acl = s.A - multiply(*s.B, g.K0);
  const Eigen::VectorXcd mu = Eigen::ComplexEigenSolver<MatrixXcd>(oracle::monodromy(Acl, 20000)).eigenvalues();
  EXPECT_LT(mu.cwiseAbs().maxCoeff(), 1.0);
}

TEST(InitialGain, UncontrollableUnstableRejected) {
  EXPECT_THROW(initial_gain(K(1.0, MatrixXcd::Identity(1, 1)), FourierMatrix::zero(1.0, 1, 1),
                            FourierMatrix::identity(1.0, 1), FourierMatrix::identity(1.0, 1)),
               PreconditionError);
}

TEST(Kleinman, ConstantSystemMatchesCare) {
  const Constant c = unstable_constant();
  KleinmanConfig cfg;
  cfg.eps = 1e-6;
  cfg.m0 = 2;
  const RiccatiSolution sol = kleinman_solve(K(1.0, c.A), K(1.0, c.B), K(1.0, c.Q), K(1.0, c.R), cfg);
  const MatrixXcd X = oracle::care(c.A, c.B * c.R.inverse() * c.B.adjoint(), c.Q);
  EXPECT_LT(distance(sol.S, K(1.0, X)), 1e-8 * X.norm());
  EXPECT_LE(sol.iterations, 8);
  EXPECT_TRUE(sol.certificate_ok);
  EXPECT_LT(sol.closed_loop_radius, 1.0);
  // K = R^{-1} B^* S
  EXPECT_LT((sol.K.phasor(0) - c.R.inverse() * c.B.adjoint() * X).norm(), 1e-8);
}

TEST(Kleinman, ZeroWeightRejected) {
  const Constant c = unstable_constant();
  EXPECT_THROW(kleinman_solve(K(1.0, c.A), K(1.0, c.B), FourierMatrix::zero(1.0, 2, 2), K(1.0, c.R)),
               PreconditionError);
}

TEST(Kleinman, NonStabilizingK0Rejected) {
  const Constant c = unstable_constant();
  KleinmanConfig cfg;
  cfg.K0 = FourierMatrix::zero(1.0, 1, 2);
  EXPECT_THROW(kleinman_solve(K(1.0, c.A), K(1.0, c.B), K(1.0, c.Q), K(1.0, c.R), cfg), PreconditionError);
}

TEST(Kleinman, RandomPeriodicAgreesWithOracle) {
  std::mt19937_64 rng(51);
  const FourierMatrix A = oracle::random_signal(rng, 1.0, 2, 2, 2, 0.6, 0.4);
  FourierMatrix B = oracle::random_signal(rng, 1.0, 2, 1, 2, 0.4, 0.6);
  B.phasor(0)(0, 0) += 1.0;
  B.make_real();
  const FourierMatrix Q = FourierMatrix::identity(1.0, 2), R = FourierMatrix::identity(1.0, 1);
  KleinmanConfig cfg;
  cfg.eps = 1e-6;
  const RiccatiSolution sol = kleinman_solve(A, B, Q, R, cfg);
  EXPECT_LT(distance(sol.S, oracle::riccati_periodic(A, B, Q, R, 40)), 1e-5);
  EXPECT_LT(distance(sol.S, time_domain_riccati_oracle(A, B, Q, R)), 1e-5);
  EXPECT_TRUE(sol.certificate_ok);
  EXPECT_LE(sol.residual_riccati, sol.bound_eta_eps2);
  for (double margin : sol.monotone_log) EXPECT_GT(margin, -1e-7);
}

TEST(Residual, ConstantExactAndPerturbed) {
  const Constant c = unstable_constant();
  const MatrixXcd X = oracle::care(c.A, c.B * c.R.inverse() * c.B.adjoint(), c.Q);
  const auto res = [&](const MatrixXcd& S) {
    return riccati_residual(K(1.0, c.A), K(1.0, c.B), K(1.0, c.Q), K(1.0, c.R), K(1.0, S));
  };
  EXPECT_LT(res(X), 1e-10);
  MatrixXcd E = MatrixXcd::Zero(2, 2);
  E(0, 1) = E(1, 0) = 1.0;
  const double r1 = res(X + 1e-4 * E), r2 = res(X + 1e-5 * E);
  EXPECT_NEAR(r1 / r2, 10.0, 1e-2);
}

TEST(FullTruncated, ConstantSystemIsToeplitz) {
  const Constant c = unstable_constant();
  const TruncatedRiccati t = full_truncated_riccati(K(1.0, c.A), K(1.0, c.B), K(1.0, c.Q), K(1.0, c.R), 4);
  EXPECT_LT(t.defect_P.maxCoeff(), -10.0);
  EXPECT_LT(t.defect_K.maxCoeff(), -10.0);
}

TEST(FullTruncated, PeriodicExampleCornerDefectPersists) {
  const LtpSystem s = load_system(data("unstable2x2.json"));
  std::vector<double> corner, centre;
  for (int m : {16, 32}) {
    const int w = 2 * m + 1;
    const TruncatedRiccati t = full_truncated_riccati(s.A, *s.B, *s.Q, *s.R, m);
    double c = -1e300, z = -1e300;
    for (int i = 0; i + 1 < w; ++i)
      for (int j = 0; j + 1 < w; ++j) {
        if ((i < 3 && j < 3) || (i > w - 5 && j > w - 5)) c = std::max(c, t.defect_P(i, j));
        if (std::abs(i - m) < 3 && std::abs(j - m) < 3) z = std::max(z, t.defect_P(i, j));
      }
    corner.push_back(c);
    centre.push_back(z);
  }
  EXPECT_NEAR(corner[0], corner[1], 0.1);
  EXPECT_LT(centre[1], centre[0] - 1.0);
  EXPECT_GT(corner[1], centre[1] + 2.0);
}

TEST(TimeDomainOracle, ConstantSystem) {
  const Constant c = unstable_constant();
  const FourierMatrix S = time_domain_riccati_oracle(K(1.0, c.A), K(1.0, c.B), K(1.0, c.Q), K(1.0, c.R));
  const MatrixXcd X = oracle::care(c.A, c.B * c.R.inverse() * c.B.adjoint(), c.Q);
  EXPECT_LT((S.phasor(0) - X).norm(), 1e-8 * X.norm());
  for (int k = 1; k <= 3; ++k) EXPECT_LT(S.phasor(k).norm(), 1e-8);
}

TEST(Eta, GridNormOfInputWeight) {
  FourierMatrix B(1.0, 1, 1, 1);
  B.phasor(0)(0, 0) = 1.0;
  B.phasor(1)(0, 0) = B.phasor(-1)(0, 0) = 0.5;  // 1 + cos: max |B|^2 = 4
  EXPECT_NEAR(riccati_eta(B, FourierMatrix::identity(1.0, 1)), 4.0, 1e-12);
}
