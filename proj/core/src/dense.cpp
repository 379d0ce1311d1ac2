#include "hltp/dense.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hltp/errors.hpp"

namespace hltp {

using Eigen::MatrixXcd;

MatrixXcd solve_continuous_lyapunov(const MatrixXcd& H, const MatrixXcd& Q) {
  const Eigen::Index N = H.rows();
  if (H.cols() != N || Q.rows() != N || Q.cols() != N) {
    throw PreconditionError("solve_continuous_lyapunov: dimension mismatch");
  }
  Eigen::ComplexSchur<MatrixXcd> schur(H);
  if (schur.info() != Eigen::Success) {
    throw ConvergenceError("solve_continuous_lyapunov: Schur decomposition failed");
  }
  const MatrixXcd& U = schur.matrixU();
  const MatrixXcd& T = schur.matrixT();
  const MatrixXcd C = -(U.adjoint() * Q * U);
  const MatrixXcd Tadj = T.adjoint();
  const double scale = std::max(T.cwiseAbs().maxCoeff(), 1.0);

  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      if (std::abs(std::conj(T(i, i)) + T(j, j)) < 1e-13 * scale) {
        std::ostringstream os;
        os << "finite Lyapunov equation not solvable: eigenvalues " << T(i, i) << " and "
           << T(j, j) << " satisfy conj(l_i) + l_j = 0";
        throw PreconditionError(os.str());
      }
    }
  }

  MatrixXcd Y(N, N);
  MatrixXcd L = Tadj;
  for (Eigen::Index j = 0; j < N; ++j) {
    Eigen::VectorXcd rhs = C.col(j);
    if (j > 0) rhs.noalias() -= Y.leftCols(j) * T.col(j).head(j);
    L.diagonal() = Tadj.diagonal().array() + T(j, j);
    Y.col(j) = L.triangularView<Eigen::Lower>().solve(rhs);
  }
  return U * Y * U.adjoint();
}

MatrixXcd solve_stein(const MatrixXcd& Psi, const MatrixXcd& W) {
  const Eigen::Index n = Psi.rows();
  const Eigen::Index n2 = n * n;
  MatrixXcd K = MatrixXcd::Identity(n2, n2);
  const MatrixXcd Pa = Psi.adjoint();
  // vec(Psi^* X Psi) = (Psi^T kron Psi^*) vec(X), column-major vec.
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      K.block(a * n, b * n, n, n) -= Psi(b, a) * Pa;
    }
  }
  Eigen::VectorXcd w = Eigen::Map<const Eigen::VectorXcd>(W.data(), n2);
  Eigen::PartialPivLU<MatrixXcd> lu(K);
  Eigen::VectorXcd x = lu.solve(w);
  x += lu.solve(w - K * x);
  return Eigen::Map<MatrixXcd>(x.data(), n, n);
}

MatrixXcd solve_care(const MatrixXcd& A, const MatrixXcd& G, const MatrixXcd& Q) {
  const Eigen::Index n = A.rows();
  MatrixXcd Z(2 * n, 2 * n);
  Z << A, -G, -Q, -A.adjoint();

  const int max_iter = 200;
  int it = 0;
  for (; it < max_iter; ++it) {
    Eigen::PartialPivLU<MatrixXcd> lu(Z);
    // Determinant scaling c = |det Z|^(-1/(2n)) computed in log form.
    double logdet = 0.0;
    const MatrixXcd& LU = lu.matrixLU();
    for (Eigen::Index i = 0; i < 2 * n; ++i) logdet += std::log(std::abs(LU(i, i)));
    const double c = std::exp(-logdet / static_cast<double>(2 * n));
    MatrixXcd Znew = 0.5 * (c * Z + lu.inverse() / c);
    const double change = (Znew - Z).norm();
    const double size = Z.norm();
    Z = std::move(Znew);
    if (!Z.allFinite()) throw ConvergenceError("solve_care: sign iteration diverged");
    if (change <= 1e-13 * size) break;
  }
  if (it == max_iter) throw ConvergenceError("solve_care: sign iteration did not converge");

  const MatrixXcd I = MatrixXcd::Identity(n, n);
  MatrixXcd lhs(2 * n, n), rhs(2 * n, n);
  lhs << Z.topRightCorner(n, n), Z.bottomRightCorner(n, n) + I;
  rhs << Z.topLeftCorner(n, n) + I, Z.bottomLeftCorner(n, n);
  MatrixXcd X = lhs.colPivHouseholderQr().solve(-rhs);
  X = 0.5 * (X + X.adjoint()).eval();
  const double res = (A.adjoint() * X + X * A - X * G * X + Q).norm();
  if (!X.allFinite() || res > 1e-6 * (1.0 + Q.norm() + X.norm() * (A.norm() + G.norm() * X.norm()))) {
    std::ostringstream os;
    os << "solve_care: residual " << res << " too large; Hamiltonian may have imaginary-axis "
       << "eigenvalues";
    throw ConvergenceError(os.str());
  }
  return X;
}

}  // namespace hltp
