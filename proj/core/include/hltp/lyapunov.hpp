#pragma once

#include <vector>

#include "hltp/fourier.hpp"
#include "hltp/ode.hpp"

namespace hltp {

// Harmonic Lyapunov equation in symbol form, equivalent to the periodic
// differential equation P' + A^* P + P A + Q = 0.
struct LyapunovSolution {
  FourierMatrix P;
  int m_used = 0;
  double residual_symbol = 0.0;  // stacked l2 norm of A^*P + PA + N.P + Q
  double residual_time = 0.0;    // max grid ||P' + A^*P + PA + Q||_2
  bool positive_definite = false;
  double min_eigenvalue = 0.0;   // min over the grid of lambda_min(P(t))
  double asymmetry = 0.0;        // phasor l2 norm removed by Hermitian symmetrization
  double rcond = 0.0;            // reciprocal condition estimate of the linear system
  std::vector<std::pair<int, double>> history;  // (m, residual) per adaptive step
};

struct SymbolLyapunovSystem {
  int n = 0, m = 0;
  MatrixXcd M;     // n^2 (2m+1) square
  VectorXcd rhs;   // -col(Q)|_m
};

// Unknown ordering: entry (i,j) of P is block (j*n + i), each block holding
// phasors k = -m..m. M = Id_n (x) (A_m^* + N_m) + [block (j,s) = Id_n (x) T_m(a_sj)].
SymbolLyapunovSystem assemble_symbol_lyapunov(const FourierMatrix& A, const FourierMatrix& Q, int m);

LyapunovSolution solve_symbol_lyapunov(const FourierMatrix& A, const FourierMatrix& Q, int m);

double symbol_residual(const FourierMatrix& A, const FourierMatrix& Q, const FourierMatrix& P);

// Grows m by max(4, m/2) from m0 until symbol_residual < eps. Checks the
// harmonic Lyapunov operator is invertible via the Floquet exponents
// first (PreconditionError otherwise); ConvergenceError if m_max is hit.
LyapunovSolution solve_adaptive(const FourierMatrix& A, const FourierMatrix& Q, double eps, int m0,
                                int m_max, bool check_invertible = true);

struct TruncatedLyapunov {
  int m = 0;
  MatrixXcd P_m;                // dense solution of H^* P + P H + Q_m = 0
  MatrixXcd delta;              // P_m - T_m(P_ref), empty without a reference
  Eigen::MatrixXd defect_map;   // log10 |P_m(i,j) - P_m(i+1,j+1)| blockwise
};

TruncatedLyapunov solve_truncated_full(const FourierMatrix& A, const FourierMatrix& Q, int m,
                                       const FourierMatrix* P_ref = nullptr);

struct OracleOptions {
  int grid_samples = 256;
  int band_out = -1;  // -1: grid_samples/2 - 1
  OdeOptions ode{1e-12, 1e-14};
};

// Periodic solution of P' + A^*P + PA + Q = 0 from the transition matrix:
// P(0) solves P0 = Psi^* P0 Psi + int_0^T Phi^* Q Phi; P(t) is integrated
// backward from P(T) = P0 and Fourier-analyzed. Requires Floquet multipliers inside the unit disk.
FourierMatrix time_domain_oracle(const FourierMatrix& A, const FourierMatrix& Q,
                                 const OracleOptions& opts = {});

// Grid diagnostics of a Hermitian-valued signal.
double min_grid_eigenvalue(const FourierMatrix& P, int samples = 256);
double time_residual_lyapunov(const FourierMatrix& A, const FourierMatrix& Q,
                              const FourierMatrix& P, int samples = 256);

}  // namespace hltp
