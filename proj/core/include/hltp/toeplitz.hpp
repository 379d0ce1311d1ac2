#pragma once

#include <string>

#include "hltp/fourier.hpp"

namespace hltp {

// Largest dense dimension n*(2m+1) the Toeplitz layer will build.
inline constexpr int kMaxDenseDim = 4096;

// Block-of-Toeplitz matrix: block (i,j) is the Toeplitz matrix of the
// phasors of entry (i,j), position (r,c) holding a_{ij, r-c} with r in
// [row_lo, row_hi] and c in [col_lo, col_hi]. The central m-truncation has
// both windows equal to [-m, m].
class BlockToeplitzOperator {
 public:
  BlockToeplitzOperator() = default;
  BlockToeplitzOperator(const FourierMatrix& f, int row_lo, int row_hi, int col_lo, int col_hi);

  int block_rows() const { return n_; }
  int block_cols() const { return p_; }
  int row_lo() const { return row_lo_; }
  int row_hi() const { return row_hi_; }
  int col_lo() const { return col_lo_; }
  int col_hi() const { return col_hi_; }
  int row_width() const { return row_hi_ - row_lo_ + 1; }
  int col_width() const { return col_hi_ - col_lo_ + 1; }
  // Truncation order when the operator is central (row and column windows
  // both [-m, m]); -1 otherwise.
  int trunc() const;
  bool is_central() const { return trunc() >= 0; }

  const MatrixXcd& data() const { return data_; }
  MatrixXcd block(int i, int j) const;

 private:
  int n_ = 0, p_ = 0;
  int row_lo_ = 0, row_hi_ = -1, col_lo_ = 0, col_hi_ = -1;
  MatrixXcd data_;
};

// Central m-truncation T_m(f).
BlockToeplitzOperator toeplitz(const FourierMatrix& f, int m);

enum class TruncationKind { Central, Left, Right };

// Finite surrogates of the one-sided truncations. Left keeps phasor indices
// [-m, M] (the m+ truncation), Right keeps [-M, m] (m-), Central keeps
// [-m, m]; M is the working band standing in for infinity and must exceed
// m for the one-sided kinds.
BlockToeplitzOperator truncation(const FourierMatrix& f, TruncationKind kind, int m, int M);

// Central sub-block [-m, m] of a central operator of order >= m.
BlockToeplitzOperator central_truncation(const BlockToeplitzOperator& op, int m);

// Block Hankel matrices with (rows x cols) scalar windows per block:
// H(a+)(i,l) = a_{i+l-1}, H(a-)(i,l) = a_{-i-l+1}, indices 1-based.
MatrixXcd hankel_plus(const FourierMatrix& f, int rows, int cols);
MatrixXcd hankel_minus(const FourierMatrix& f, int rows, int cols);

// Id_n (x) J_w where J_w reverses a window of length w.
MatrixXcd flip(int n, int w);

struct ProductCorrection {
  MatrixXcd TaTb;   // T_m(A) T_m(B)
  MatrixXcd Tc;     // T_m(AB)
  MatrixXcd Eplus;  // H(A+) H(B-)
  MatrixXcd Eminus; // J H(A-) H(B+) J
  double residual = 0.0;  // ||TaTb - Tc + E+ + E-||_F
};

// Finite product identity T_m(A)T_m(B) = T_m(AB) - E+ - E-, with Hankel
// inner dimension eta. Requires eta >= max(band(A), band(B)).
ProductCorrection product_with_correction(const FourierMatrix& A, const FourierMatrix& B, int m,
                                          int eta);

struct TruncationResidual {
  VectorXcd lhs;          // T_m(A) x|_m
  VectorXcd full;         // (T(A) x)|_m
  VectorXcd corr_minus;   // H(A+) J x|_m^-   (phasors below -m)
  VectorXcd corr_plus;    // J H(A-) x|_m^+   (phasors above +m)
  double residual = 0.0;  // ||lhs - full + corr_minus + corr_plus||
};

// Restriction identity for a vector x with phasors beyond m. The vector's
// band plays the role of the working band; full is exact because x vanishes
// outside it.
TruncationResidual truncation_residual(const FourierMatrix& A, const PhasorVector& x, int m);

struct EmbeddingCheck {
  VectorXcd direct;     // T_M(A) applied to x|_m embedded with zeros, rows [-M, M]
  VectorXcd assembled;  // [J H(A-) ; T_m(A) ; H(A+) J] x|_m, rows [-M, M]
  double residual = 0.0;
};

// Column structure of T(A) acting on a vector supported in [-m, m].
EmbeddingCheck embedding_check(const FourierMatrix& A, const PhasorVector& x, int m, int M);

struct OperatorNorms {
  double sigma_max = 0.0;     // ||T_m(f)||_2
  double linf_grid = 0.0;     // max over a grid of ||f(t)||_2
  double hankel_plus = 0.0;   // ||H(f+)|| with window (2m+1) x max(band,1)
  double hankel_minus = 0.0;
  double frobenius = 0.0;     // L2 norm of ||f(t)||_F, i.e. stacked phasor l2 norm
  bool bound_holds = true;    // sigma_max <= linf_grid + 1e-9
};

OperatorNorms operator_norms(const FourierMatrix& f, int m);

// Truncated harmonic operator A_m - N_m with N_m = Id_n (x) diag(j omega k).
class HarmonicOperator {
 public:
  HarmonicOperator() = default;
  HarmonicOperator(const FourierMatrix& A, int m);

  int n() const { return n_; }
  int trunc() const { return m_; }
  double omega() const { return omega_; }
  int dim() const { return n_ * (2 * m_ + 1); }
  const BlockToeplitzOperator& toeplitz_part() const { return Am_; }

  // Diagonal of N_m in the stacked layout.
  VectorXcd n_diagonal() const;
  MatrixXcd dense() const;          // A_m - N_m
  MatrixXcd dense_adjoint() const;  // A_m^* + N_m
  VectorXcd apply(const VectorXcd& x) const;

 private:
  int n_ = 0, m_ = 0;
  double omega_ = 0.0;
  BlockToeplitzOperator Am_;
};

// Toeplicity defect log10|M(i,j) - M(i+1,j+1)| evaluated inside every
// (w x w) block of a block matrix with square blocks of width w. Entries
// equal to zero map to -inf.
Eigen::MatrixXd toeplicity_defect(const MatrixXcd& M, int block_width);

// CSV dump: header line "rows,cols,m,n" followed by one row per matrix row
// with re,im pairs per entry.
void write_matrix_csv(const std::string& path, const MatrixXcd& M, int m, int n);
void write_real_matrix_csv(const std::string& path, const Eigen::MatrixXd& M, int m, int n);

}  // namespace hltp
