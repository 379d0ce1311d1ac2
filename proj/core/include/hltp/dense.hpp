#pragma once

#include <Eigen/Dense>

namespace hltp {

// Solves H^* X + X H + Q = 0 by the complex Schur (Bartels-Stewart) method.
// Throws PreconditionError naming the offending eigenvalue pair when
// conj(lambda_i) + lambda_j vanishes to working precision.
Eigen::MatrixXcd solve_continuous_lyapunov(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& Q);

// Solves X = Psi^* X Psi + W through its Kronecker form; intended for small
// state dimensions.
Eigen::MatrixXcd solve_stein(const Eigen::MatrixXcd& Psi, const Eigen::MatrixXcd& W);

// Stabilizing solution of A^* X + X A - X G X + Q = 0 (G = B R^{-1} B^*)
// by the scaled Newton iteration for the matrix sign function of the
// Hamiltonian. Throws ConvergenceError if the iteration stalls.
Eigen::MatrixXcd solve_care(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& G,
                            const Eigen::MatrixXcd& Q);

}  // namespace hltp
