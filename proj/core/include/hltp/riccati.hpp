#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hltp/fourier.hpp"
#include "hltp/lyapunov.hpp"

namespace hltp {

// Gains follow u = -K x with K = R^{-1} B^* S and closed loop A - B K.

struct KleinmanIteration {
  int index = 0;
  int m = 0;
  double lyapunov_residual = 0.0;  // per-step symbol residual
  double change = 0.0;             // ||S(k) - S(k-1)|| phasor l2 (NaN for k = 1)
  double monotone_margin = 0.0;    // min grid eig of S(k-1) - S(k) (NaN for k = 1)
  double min_eigenvalue = 0.0;     // min grid eig of S(k)
  double closed_loop_radius = 0.0; // spectral radius of the closed-loop monodromy
  double gain_tail = 0.0;          // tail energy discarded when capping K's band
};

struct RiccatiSolution {
  FourierMatrix S;
  FourierMatrix K;
  int iterations = 0;
  int m_final = 0;
  double residual_riccati = 0.0;  // symbol Riccati residual of S
  double eta = 0.0;               // max grid ||B R^{-1} B^*||_2
  double eps = 0.0;               // target accuracy
  double eps_achieved = 0.0;      // sqrt(||dS||^2 + lyapunov_residual / eta) at the last step
  double bound_eta_eps2 = 0.0;    // eta * eps^2
  bool certificate_ok = false;    // residual_riccati <= bound_eta_eps2
  std::vector<double> monotone_log;
  std::vector<KleinmanIteration> log;
  double closed_loop_radius = 0.0;
};

struct KleinmanConfig {
  double eps = 1e-5;
  int m0 = 8;
  int m_max = 128;
  double outer_tol = 1e-9;
  int max_outer = 50;
  bool fixed_m = false;            // keep m_k = m0 throughout
  std::optional<FourierMatrix> K0;
  int rinv_band = -1;              // band of R^{-1}; -1 picks 4*band(R) + 8
};

struct InitialGain {
  FourierMatrix K0;
  std::string method;              // "zero", "averaged_lqr", "truncated_riccati", "user"
  double closed_loop_radius = 0.0; // max |mu| of A - B K0
};

// Candidate ladder: zero gain, averaged LQR, central block row of the
// truncated Riccati gain; the first candidate with closed-loop multipliers
// below 1 - 1e-6 is returned. PreconditionError if none certifies.
InitialGain initial_gain(const FourierMatrix& A, const FourierMatrix& B, const FourierMatrix& R,
                         const FourierMatrix& Q, int m_trunc = 16);

// Each step solves its Lyapunov equation to min(eps, eta eps^2 / 4), floored
// at 1e3 machine epsilons times (1 + ||Q_k||), raising m as needed.
RiccatiSolution kleinman_solve(const FourierMatrix& A, const FourierMatrix& B,
                               const FourierMatrix& Q, const FourierMatrix& R,
                               const KleinmanConfig& cfg = {});

double riccati_residual(const FourierMatrix& A, const FourierMatrix& B, const FourierMatrix& Q,
                        const FourierMatrix& R, const FourierMatrix& S, int rinv_band = -1);

// max over a grid of ||B(t) R(t)^{-1} B(t)^*||_2.
double riccati_eta(const FourierMatrix& B, const FourierMatrix& R, int samples = 512);

struct TruncatedRiccati {
  int m = 0;
  MatrixXcd P_m;
  MatrixXcd K_m;
  Eigen::MatrixXd defect_P;
  Eigen::MatrixXd defect_K;
  MatrixXcd delta_P;  // P_m - T_m(S_ref), empty without reference
  MatrixXcd delta_K;  // K_m - T_m(K_ref)
};

TruncatedRiccati full_truncated_riccati(const FourierMatrix& A, const FourierMatrix& B,
                                        const FourierMatrix& Q, const FourierMatrix& R, int m,
                                        const FourierMatrix* S_ref = nullptr,
                                        const FourierMatrix* K_ref = nullptr);

struct RiccatiOracleOptions {
  int grid_samples = 256;
  int band_out = -1;
  int max_periods = 400;
  double fixed_point_tol = 1e-9;
  OdeOptions ode{1e-12, 1e-12};
};

// Periodic Riccati differential equation -S' = A^*S + SA - S B R^{-1} B^* S + Q
// integrated backward period by period from S(T) = Q(0) to the fixed point.
FourierMatrix time_domain_riccati_oracle(const FourierMatrix& A, const FourierMatrix& B,
                                         const FourierMatrix& Q, const FourierMatrix& R,
                                         const RiccatiOracleOptions& opts = {});

}  // namespace hltp
