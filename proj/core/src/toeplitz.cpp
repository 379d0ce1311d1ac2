#include "hltp/toeplitz.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "hltp/errors.hpp"

namespace hltp {

namespace {

void check_dense_limit(long dim, const char* what) {
  if (dim > kMaxDenseDim) {
    std::ostringstream os;
    os << what << ": dense dimension " << dim << " exceeds the limit of " << kMaxDenseDim;
    throw PreconditionError(os.str());
  }
}

}  // namespace

BlockToeplitzOperator::BlockToeplitzOperator(const FourierMatrix& f, int row_lo, int row_hi,
                                             int col_lo, int col_hi)
    : n_(f.rows()), p_(f.cols()), row_lo_(row_lo), row_hi_(row_hi), col_lo_(col_lo),
      col_hi_(col_hi) {
  if (row_hi < row_lo || col_hi < col_lo) throw PreconditionError("toeplitz: empty window");
  const int rw = row_width(), cw = col_width();
  check_dense_limit(static_cast<long>(n_) * rw, "toeplitz");
  check_dense_limit(static_cast<long>(p_) * cw, "toeplitz");
  data_ = MatrixXcd::Zero(n_ * rw, p_ * cw);
  for (int r = 0; r < rw; ++r) {
    for (int c = 0; c < cw; ++c) {
      const int k = (row_lo + r) - (col_lo + c);
      if (k < -f.band() || k > f.band()) continue;
      const MatrixXcd& a = f.phasor(k);
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < p_; ++j) data_(i * rw + r, j * cw + c) = a(i, j);
      }
    }
  }
}

int BlockToeplitzOperator::trunc() const {
  if (row_lo_ == col_lo_ && row_hi_ == col_hi_ && row_lo_ == -row_hi_) return row_hi_;
  return -1;
}

MatrixXcd BlockToeplitzOperator::block(int i, int j) const {
  return data_.block(i * row_width(), j * col_width(), row_width(), col_width());
}

BlockToeplitzOperator toeplitz(const FourierMatrix& f, int m) {
  if (m < 0) throw PreconditionError("toeplitz: negative truncation order");
  return BlockToeplitzOperator(f, -m, m, -m, m);
}

BlockToeplitzOperator truncation(const FourierMatrix& f, TruncationKind kind, int m, int M) {
  switch (kind) {
    case TruncationKind::Central:
      return toeplitz(f, m);
    case TruncationKind::Left:
      if (M <= m) throw PreconditionError("truncation: working band must exceed m");
      return BlockToeplitzOperator(f, -m, M, -m, M);
    case TruncationKind::Right:
      if (M <= m) throw PreconditionError("truncation: working band must exceed m");
      return BlockToeplitzOperator(f, -M, m, -M, m);
  }
  throw InternalError("truncation: unknown kind");
}

BlockToeplitzOperator central_truncation(const BlockToeplitzOperator& op, int m) {
  const int M = op.trunc();
  if (M < 0) throw PreconditionError("central_truncation: operator is not central");
  if (m > M) throw PreconditionError("central_truncation: target order exceeds source order");
  // Rebuild from the phasors stored in the first block column and row.
  const int w = 2 * M + 1;
  FourierMatrix f(1.0, op.block_rows(), op.block_cols(), 2 * M);
  for (int i = 0; i < op.block_rows(); ++i) {
    for (int j = 0; j < op.block_cols(); ++j) {
      for (int r = 0; r < w; ++r) f.phasor(r)(i, j) = op.data()(i * w + r, j * w);
      for (int c = 0; c < w; ++c) f.phasor(-c)(i, j) = op.data()(i * w, j * w + c);
    }
  }
  return toeplitz(f, m);
}

namespace {

MatrixXcd hankel(const FourierMatrix& f, int rows, int cols, int sign) {
  const int n = f.rows(), p = f.cols();
  MatrixXcd H = MatrixXcd::Zero(n * rows, p * cols);
  for (int r = 1; r <= rows; ++r) {
    for (int l = 1; l <= cols; ++l) {
      const int k = sign * (r + l - 1);
      if (k < -f.band() || k > f.band()) continue;
      const MatrixXcd& a = f.phasor(k);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) H(i * rows + r - 1, j * cols + l - 1) = a(i, j);
      }
    }
  }
  return H;
}

}  // namespace

MatrixXcd hankel_plus(const FourierMatrix& f, int rows, int cols) { return hankel(f, rows, cols, +1); }
MatrixXcd hankel_minus(const FourierMatrix& f, int rows, int cols) { return hankel(f, rows, cols, -1); }

MatrixXcd flip(int n, int w) {
  MatrixXcd J = MatrixXcd::Zero(n * w, n * w);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < w; ++r) J(i * w + r, i * w + (w - 1 - r)) = 1.0;
  }
  return J;
}

ProductCorrection product_with_correction(const FourierMatrix& A, const FourierMatrix& B, int m,
                                          int eta) {
  if (eta < std::max(A.band(), B.band())) {
    std::ostringstream os;
    os << "product_with_correction: eta = " << eta << " below max band "
       << std::max(A.band(), B.band());
    throw PreconditionError(os.str());
  }
  const int w = 2 * m + 1;
  ProductCorrection out;
  out.TaTb = toeplitz(A, m).data() * toeplitz(B, m).data();
  out.Tc = toeplitz(multiply(A, B), m).data();
  out.Eplus = hankel_plus(A, w, eta) * hankel_minus(B, eta, w);
  out.Eminus = flip(A.rows(), w) * hankel_minus(A, w, eta) * hankel_plus(B, eta, w) *
               flip(B.cols(), w);
  out.residual = (out.TaTb - out.Tc + out.Eplus + out.Eminus).norm();
  return out;
}

TruncationResidual truncation_residual(const FourierMatrix& A, const PhasorVector& x, int m) {
  if (A.cols() != x.dim()) throw PreconditionError("truncation_residual: dimension mismatch");
  const int M = x.band;
  if (M <= m) throw PreconditionError("truncation_residual: vector band must exceed m");
  const int p = x.dim(), L = M - m;
  TruncationResidual out;
  out.lhs = toeplitz(A, m).data() * x.stacked(m);
  out.full = BlockToeplitzOperator(A, -m, m, -M, M).data() * x.stacked(M);
  VectorXcd below(p * L), above(p * L);
  for (int j = 0; j < p; ++j) {
    for (int l = 1; l <= L; ++l) {
      below(j * L + l - 1) = x.at(j, -m - l);
      above(j * L + l - 1) = x.at(j, m + l);
    }
  }
  out.corr_minus = hankel_plus(A, 2 * m + 1, L) * below;
  out.corr_plus = flip(A.rows(), 2 * m + 1) * (hankel_minus(A, 2 * m + 1, L) * above);
  out.residual = (out.lhs - out.full + out.corr_minus + out.corr_plus).norm();
  return out;
}

EmbeddingCheck embedding_check(const FourierMatrix& A, const PhasorVector& x, int m, int M) {
  if (A.cols() != x.dim()) throw PreconditionError("embedding_check: dimension mismatch");
  if (M <= m) throw PreconditionError("embedding_check: working band must exceed m");
  const int n = A.rows(), p = x.dim(), L = M - m, w = 2 * m + 1, W = 2 * M + 1;
  const VectorXcd xm = x.stacked(m);
  EmbeddingCheck out;
  out.direct = BlockToeplitzOperator(A, -M, M, -m, m).data() * xm;
  const VectorXcd top = flip(n, L) * (hankel_minus(A, L, w) * xm);
  const VectorXcd mid = toeplitz(A, m).data() * xm;
  const VectorXcd bottom = hankel_plus(A, L, w) * (flip(p, w) * xm);
  out.assembled.resize(n * W);
  for (int i = 0; i < n; ++i) {
    out.assembled.segment(i * W, L) = top.segment(i * L, L);
    out.assembled.segment(i * W + L, w) = mid.segment(i * w, w);
    out.assembled.segment(i * W + L + w, L) = bottom.segment(i * L, L);
  }
  out.residual = (out.direct - out.assembled).norm();
  return out;
}

OperatorNorms operator_norms(const FourierMatrix& f, int m) {
  OperatorNorms out;
  const MatrixXcd T = toeplitz(f, m).data();
  out.sigma_max = Eigen::BDCSVD<MatrixXcd>(T).singularValues()(0);
  TimeGrid grid(f.period(), next_pow2(64 * (f.band() + 1)));
  for (const auto& s : f.sample(grid)) {
    out.linf_grid = std::max(out.linf_grid, Eigen::JacobiSVD<MatrixXcd>(s).singularValues()(0));
  }
  const int eta = std::max(f.band(), 1);
  auto top_sv = [](const MatrixXcd& H) {
    return Eigen::JacobiSVD<MatrixXcd>(H).singularValues()(0);
  };
  out.hankel_plus = top_sv(hankel_plus(f, 2 * m + 1, eta));
  out.hankel_minus = top_sv(hankel_minus(f, 2 * m + 1, eta));
  out.frobenius = f.l2_norm();
  out.bound_holds = out.sigma_max <= out.linf_grid + 1e-9;
  if (!out.bound_holds) {
    std::ostringstream os;
    os << "operator_norms: ||T_m|| = " << out.sigma_max << " exceeds the grid L-infinity norm "
       << out.linf_grid;
    throw InternalError(os.str());
  }
  return out;
}

HarmonicOperator::HarmonicOperator(const FourierMatrix& A, int m)
    : n_(A.rows()), m_(m), omega_(A.omega()), Am_(toeplitz(A, m)) {
  if (A.rows() != A.cols()) throw PreconditionError("harmonic_operator: A must be square");
}

VectorXcd HarmonicOperator::n_diagonal() const {
  const int w = 2 * m_ + 1;
  VectorXcd d(n_ * w);
  for (int i = 0; i < n_; ++i) {
    for (int k = -m_; k <= m_; ++k) d(i * w + k + m_) = cdouble(0.0, omega_ * k);
  }
  return d;
}

MatrixXcd HarmonicOperator::dense() const {
  MatrixXcd H = Am_.data();
  H.diagonal() -= n_diagonal();
  return H;
}

MatrixXcd HarmonicOperator::dense_adjoint() const {
  MatrixXcd H = Am_.data().adjoint();
  H.diagonal() += n_diagonal();
  return H;
}

VectorXcd HarmonicOperator::apply(const VectorXcd& x) const {
  return Am_.data() * x - n_diagonal().cwiseProduct(x);
}

Eigen::MatrixXd toeplicity_defect(const MatrixXcd& M, int w) {
  if (w < 2 || M.rows() % w != 0 || M.cols() % w != 0) {
    throw PreconditionError("toeplicity_defect: matrix is not made of square blocks of width w");
  }
  const int nb = M.rows() / w, pb = M.cols() / w;
  Eigen::MatrixXd D(nb * (w - 1), pb * (w - 1));
  for (int bi = 0; bi < nb; ++bi) {
    for (int bj = 0; bj < pb; ++bj) {
      for (int r = 0; r + 1 < w; ++r) {
        for (int c = 0; c + 1 < w; ++c) {
          const double d =
              std::abs(M(bi * w + r, bj * w + c) - M(bi * w + r + 1, bj * w + c + 1));
          D(bi * (w - 1) + r, bj * (w - 1) + c) =
              d > 0.0 ? std::log10(d) : -std::numeric_limits<double>::infinity();
        }
      }
    }
  }
  return D;
}

namespace {

FILE* open_or_throw(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw PreconditionError("cannot open " + path + " for writing");
  return fp;
}

}  // namespace

void write_matrix_csv(const std::string& path, const MatrixXcd& M, int m, int n) {
  FILE* fp = open_or_throw(path);
  std::fprintf(fp, "%ld,%ld,%d,%d\n", static_cast<long>(M.rows()), static_cast<long>(M.cols()), m,
               n);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      std::fprintf(fp, "%s%.17g,%.17g", j ? "," : "", M(i, j).real(), M(i, j).imag());
    }
    std::fputc('\n', fp);
  }
  std::fclose(fp);
}

void write_real_matrix_csv(const std::string& path, const Eigen::MatrixXd& M, int m, int n) {
  FILE* fp = open_or_throw(path);
  std::fprintf(fp, "%ld,%ld,%d,%d\n", static_cast<long>(M.rows()), static_cast<long>(M.cols()), m,
               n);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      std::fprintf(fp, "%s%.17g", j ? "," : "", M(i, j));
    }
    std::fputc('\n', fp);
  }
  std::fclose(fp);
}

}  // namespace hltp
