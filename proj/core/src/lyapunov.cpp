#include "hltp/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hltp/dense.hpp"
#include "hltp/errors.hpp"
#include "hltp/floquet.hpp"
#include "hltp/toeplitz.hpp"

namespace hltp {

namespace {

void check_square_pair(const FourierMatrix& A, const FourierMatrix& Q, const char* who) {
  if (A.rows() != A.cols() || Q.rows() != A.rows() || Q.cols() != A.cols()) {
    throw PreconditionError(std::string(who) + ": A and Q must be square of equal size");
  }
  if (std::abs(A.period() - Q.period()) > 1e-12 * A.period()) {
    throw PreconditionError(std::string(who) + ": period mismatch");
  }
}

}  // namespace

SymbolLyapunovSystem assemble_symbol_lyapunov(const FourierMatrix& A, const FourierMatrix& Q,
                                              int m) {
  check_square_pair(A, Q, "assemble_symbol_lyapunov");
  const int n = A.rows(), w = 2 * m + 1, nw = n * w;
  HarmonicOperator H(A, m);
  const MatrixXcd Hadj = H.dense_adjoint();
  const MatrixXcd& Am = H.toeplitz_part().data();

  SymbolLyapunovSystem sys;
  sys.n = n;
  sys.m = m;
  sys.M = MatrixXcd::Zero(n * nw, n * nw);
  // P(:, j) couples through A^* from the left: Id_n (x) (A_m^* + N_m).
  for (int j = 0; j < n; ++j) sys.M.block(j * nw, j * nw, nw, nw) = Hadj;
  // P A: unknown (i, s) feeds equation (i, j) through T_m(a_sj).
  for (int j = 0; j < n; ++j) {
    for (int s = 0; s < n; ++s) {
      const auto Tsj = Am.block(s * w, j * w, w, w);
      for (int i = 0; i < n; ++i) {
        sys.M.block((j * n + i) * w, (s * n + i) * w, w, w) += Tsj;
      }
    }
  }
  sys.rhs.resize(n * nw);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = -m; k <= m; ++k) sys.rhs((j * n + i) * w + k + m) = -Q.coeff(i, j, k);
    }
  }
  return sys;
}

double symbol_residual(const FourierMatrix& A, const FourierMatrix& Q, const FourierMatrix& P) {
  FourierMatrix R = multiply(A.adjoint(), P);
  R += multiply(P, A);
  R += P.derivative();
  R += Q;
  return R.l2_norm();
}

double min_grid_eigenvalue(const FourierMatrix& P, int samples) {
  TimeGrid grid(P.period(), std::max(samples, next_pow2(4 * P.band() + 4)));
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& s : P.sample(grid)) {
    const MatrixXcd h = 0.5 * (s + s.adjoint());
    lo = std::min(lo, Eigen::SelfAdjointEigenSolver<MatrixXcd>(h, Eigen::EigenvaluesOnly)
                          .eigenvalues()(0));
  }
  return lo;
}

double time_residual_lyapunov(const FourierMatrix& A, const FourierMatrix& Q,
                              const FourierMatrix& P, int samples) {
  TimeGrid grid(P.period(), std::max(samples, next_pow2(4 * (P.band() + A.band()) + 4)));
  const FourierMatrix dP = P.derivative();
  double worst = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double t = grid.time(i);
    const MatrixXcd At = A.evaluate(t), Pt = P.evaluate(t);
    const MatrixXcd r = dP.evaluate(t) + At.adjoint() * Pt + Pt * At + Q.evaluate(t);
    worst = std::max(worst, r.operatorNorm());
  }
  return worst;
}

LyapunovSolution solve_symbol_lyapunov(const FourierMatrix& A, const FourierMatrix& Q, int m) {
  SymbolLyapunovSystem sys = assemble_symbol_lyapunov(A, Q, m);
  const int n = sys.n, w = 2 * m + 1;
  Eigen::PartialPivLU<MatrixXcd> lu(sys.M);
  LyapunovSolution sol;
  sol.rcond = lu.rcond();
  if (!(sol.rcond > 1e-15)) {
    std::ostringstream os;
    os << "solve_symbol_lyapunov: linear system is singular at m = " << m
       << " (rcond " << sol.rcond << ")";
    throw PreconditionError(os.str());
  }
  VectorXcd x = lu.solve(sys.rhs);
  x += lu.solve(sys.rhs - sys.M * x);

  FourierMatrix P(A.period(), n, n, m);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = -m; k <= m; ++k) P.phasor(k)(i, j) = x((j * n + i) * w + k + m);
    }
  }
  sol.P = P.hermitian_part();
  sol.asymmetry = (P - sol.P).l2_norm();
  if (A.is_real() && Q.is_real()) sol.P.make_real();
  sol.m_used = m;
  sol.residual_symbol = symbol_residual(A, Q, sol.P);
  sol.residual_time = time_residual_lyapunov(A, Q, sol.P);
  sol.min_eigenvalue = min_grid_eigenvalue(sol.P);
  sol.positive_definite = sol.min_eigenvalue > 0.0;
  return sol;
}

namespace {

void check_lyapunov_invertible(const FourierMatrix& A) {
  const VectorXcd mu = floquet_multipliers(A);
  const double T = A.period(), w = A.omega();
  double scale = 1.0;
  VectorXcd lam(mu.size());
  for (Eigen::Index p = 0; p < mu.size(); ++p) {
    if (std::abs(mu(p)) == 0.0) throw PreconditionError("solve_adaptive: zero Floquet multiplier");
    lam(p) = std::log(mu(p)) / T;
    scale = std::max(scale, std::abs(lam(p)));
  }
  for (Eigen::Index p = 0; p < lam.size(); ++p) {
    for (Eigen::Index q = 0; q < lam.size(); ++q) {
      const cdouble s = std::conj(lam(p)) + lam(q);
      const double k = std::round(-s.imag() / w);
      const double d = std::abs(s + cdouble(0.0, w * k));
      if (d < 1e-8 * scale) {
        std::ostringstream os;
        os << "harmonic Lyapunov operator is not invertible: Floquet exponents " << lam(p)
           << " and " << lam(q) << " give conj(l_p) + l_q in j*omega*Z";
        throw PreconditionError(os.str());
      }
    }
  }
}

}  // namespace

LyapunovSolution solve_adaptive(const FourierMatrix& A, const FourierMatrix& Q, double eps, int m0,
                                int m_max, bool check_invertible) {
  check_square_pair(A, Q, "solve_adaptive");
  if (!(eps > 0.0)) throw PreconditionError("solve_adaptive: eps must be positive");
  if (check_invertible) check_lyapunov_invertible(A);
  std::vector<std::pair<int, double>> history;
  int m = std::max(m0, 0);
  while (true) {
    LyapunovSolution sol = solve_symbol_lyapunov(A, Q, m);
    history.emplace_back(m, sol.residual_symbol);
    if (sol.residual_symbol < eps) {
      sol.history = std::move(history);
      return sol;
    }
    if (m >= m_max) {
      std::ostringstream os;
      os << "solve_adaptive: residual " << sol.residual_symbol << " still above " << eps
         << " at m = " << m;
      throw ConvergenceError(os.str());
    }
    m = std::min(m_max, m + std::max(4, m / 2));
  }
}

TruncatedLyapunov solve_truncated_full(const FourierMatrix& A, const FourierMatrix& Q, int m,
                                       const FourierMatrix* P_ref) {
  check_square_pair(A, Q, "solve_truncated_full");
  const int w = 2 * m + 1;
  TruncatedLyapunov out;
  out.m = m;
  const MatrixXcd H = HarmonicOperator(A, m).dense();
  const MatrixXcd Qm = toeplitz(Q, m).data();
  out.P_m = solve_continuous_lyapunov(H, Qm);
  out.P_m = 0.5 * (out.P_m + out.P_m.adjoint()).eval();
  if (P_ref) out.delta = out.P_m - toeplitz(*P_ref, m).data();
  out.defect_map = toeplicity_defect(out.P_m, w);
  return out;
}

FourierMatrix time_domain_oracle(const FourierMatrix& A, const FourierMatrix& Q,
                                 const OracleOptions& opts) {
  check_square_pair(A, Q, "time_domain_oracle");
  const int n = A.rows(), n2 = n * n;
  const TimeGrid grid(A.period(), opts.grid_samples);
  const int band = opts.band_out >= 0 ? opts.band_out : opts.grid_samples / 2 - 1;

  VectorXcd x0 = VectorXcd::Zero(2 * n2);
  for (int i = 0; i < n; ++i) x0(i * n + i) = 1.0;
  auto rhs = [&](double t, const VectorXcd& x, VectorXcd& dx) {
    Eigen::Map<const MatrixXcd> Phi(x.data(), n, n);
    const MatrixXcd At = A.evaluate(t);
    dx.resize(2 * n2);
    Eigen::Map<MatrixXcd>(dx.data(), n, n).noalias() = At * Phi;
    Eigen::Map<MatrixXcd>(dx.data() + n2, n, n).noalias() = Phi.adjoint() * Q.evaluate(t) * Phi;
  };
  const std::vector<double> times{0.0, A.period()};
  auto xs = integrate(rhs, x0, times, opts.ode);

  const MatrixXcd Psi = Eigen::Map<const MatrixXcd>(xs.back().data(), n, n);
  const MatrixXcd WT = Eigen::Map<const MatrixXcd>(xs.back().data() + n2, n, n);
  const double rho = Eigen::ComplexEigenSolver<MatrixXcd>(Psi, false).eigenvalues().cwiseAbs().maxCoeff();
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "time_domain_oracle: Floquet multiplier of modulus " << rho << " is not inside the unit disk";
    throw PreconditionError(os.str());
  }
  const MatrixXcd P0 = solve_stein(Psi, WT);

  // The Lyapunov flow is only stable backward in time, so P(t) is obtained
  // by integrating -P' = A^*P + PA + Q from P(T) = P0 down to t = 0.
  auto back = [&](double t, const VectorXcd& x, VectorXcd& dx) {
    Eigen::Map<const MatrixXcd> P(x.data(), n, n);
    const MatrixXcd At = A.evaluate(t);
    dx.resize(n2);
    Eigen::Map<MatrixXcd>(dx.data(), n, n) = -(At.adjoint() * P + P * At + Q.evaluate(t));
  };
  std::vector<double> back_times = grid.times();
  back_times.push_back(A.period());
  std::reverse(back_times.begin(), back_times.end());
  const VectorXcd p0 = Eigen::Map<const VectorXcd>(P0.data(), n2);
  auto ps = integrate(back, p0, back_times, opts.ode);
  std::vector<MatrixXcd> samples(grid.size());
  for (int s = 0; s < grid.size(); ++s) {
    const MatrixXcd Pt = Eigen::Map<const MatrixXcd>(ps[grid.size() - s].data(), n, n);
    samples[s] = 0.5 * (Pt + Pt.adjoint());
  }
  FourierMatrix P = analyze(samples, grid, band);
  if (A.is_real() && Q.is_real()) P.make_real();
  return P;
}

}  // namespace hltp
