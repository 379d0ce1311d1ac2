#include "hltp/riccati.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hltp/dense.hpp"
#include "hltp/errors.hpp"
#include "hltp/floquet.hpp"
#include "hltp/toeplitz.hpp"

namespace hltp {

namespace {

constexpr double kStabilityMargin = 1e-6;

void check_shapes(const FourierMatrix& A, const FourierMatrix& B, const FourierMatrix& Q,
                  const FourierMatrix& R, const char* who) {
  const int n = A.rows(), p = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != p ||
      R.cols() != p) {
    throw PreconditionError(std::string(who) + ": incompatible shapes of A, B, Q, R");
  }
  for (const FourierMatrix* f : {&B, &Q, &R}) {
    if (std::abs(f->period() - A.period()) > 1e-12 * A.period()) {
      throw PreconditionError(std::string(who) + ": period mismatch");
    }
  }
}

int default_rinv_band(const FourierMatrix& R, int requested) {
  if (requested >= 0) return requested;
  return R.band() == 0 ? 0 : 4 * R.band() + 8;
}

FourierMatrix closed_loop(const FourierMatrix& A, const FourierMatrix& B, const FourierMatrix& K) {
  return A - multiply(B, K);
}

FourierMatrix gain_from(const FourierMatrix& Rinv, const FourierMatrix& B, const FourierMatrix& S,
                        int band_cap, double* tail) {
  return multiply(Rinv, multiply(B.adjoint(), S), band_cap, tail);
}

}  // namespace

double riccati_eta(const FourierMatrix& B, const FourierMatrix& R, int samples) {
  TimeGrid grid(B.period(), std::max(samples, next_pow2(8 * (B.band() + R.band()) + 8)));
  double eta = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double t = grid.time(i);
    const MatrixXcd Bt = B.evaluate(t);
    const MatrixXcd G = Bt * R.evaluate(t).inverse() * Bt.adjoint();
    eta = std::max(eta, G.operatorNorm());
  }
  return eta;
}

double riccati_residual(const FourierMatrix& A, const FourierMatrix& B, const FourierMatrix& Q,
                        const FourierMatrix& R, const FourierMatrix& S, int rinv_band) {
  check_shapes(A, B, Q, R, "riccati_residual");
  const FourierMatrix Rinv = invert_pointwise(R, default_rinv_band(R, rinv_band)).inverse;
  const FourierMatrix G = multiply(multiply(B, Rinv), B.adjoint());
  FourierMatrix res = multiply(A.adjoint(), S);
  res += multiply(S, A);
  res += S.derivative();
  res -= multiply(multiply(S, G), S);
  res += Q;
  return res.l2_norm();
}

TruncatedRiccati full_truncated_riccati(const FourierMatrix& A, const FourierMatrix& B,
                                        const FourierMatrix& Q, const FourierMatrix& R, int m,
                                        const FourierMatrix* S_ref, const FourierMatrix* K_ref) {
  check_shapes(A, B, Q, R, "full_truncated_riccati");
  const int w = 2 * m + 1;
  const MatrixXcd H = HarmonicOperator(A, m).dense();
  const MatrixXcd Bm = toeplitz(B, m).data();
  const MatrixXcd Rm = toeplitz(R, m).data();
  const MatrixXcd Qm = toeplitz(Q, m).data();
  Eigen::LDLT<MatrixXcd> Rldlt(Rm);
  if (Rldlt.info() != Eigen::Success) {
    throw PreconditionError("full_truncated_riccati: truncated R is not invertible");
  }
  const MatrixXcd RinvBt = Rldlt.solve(Bm.adjoint());
  const MatrixXcd G = Bm * RinvBt;
  TruncatedRiccati out;
  out.m = m;
  try {
    out.P_m = solve_care(H, 0.5 * (G + G.adjoint()), Qm);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string("full_truncated_riccati: dense Riccati solve failed: ") +
                           e.what());
  }
  out.K_m = RinvBt * out.P_m;
  out.defect_P = toeplicity_defect(out.P_m, w);
  out.defect_K = toeplicity_defect(out.K_m, w);
  if (S_ref) out.delta_P = out.P_m - toeplitz(*S_ref, m).data();
  if (K_ref) out.delta_K = out.K_m - toeplitz(*K_ref, m).data();
  return out;
}

InitialGain initial_gain(const FourierMatrix& A, const FourierMatrix& B, const FourierMatrix& R,
                         const FourierMatrix& Q, int m_trunc) {
  check_shapes(A, B, Q, R, "initial_gain");
  const int n = A.rows(), p = B.cols();
  const double T = A.period();
  std::ostringstream failures;

  auto certify = [&](const FourierMatrix& K, const std::string& method,
                     InitialGain& out) -> bool {
    try {
      const double rho = spectral_radius_of_monodromy(closed_loop(A, B, K));
      failures << method << ": closed-loop spectral radius " << rho << "; ";
      if (rho < 1.0 - kStabilityMargin) {
        out.K0 = K;
        out.method = method;
        out.closed_loop_radius = rho;
        return true;
      }
    } catch (const Error& e) {
      failures << method << ": " << e.what() << "; ";
    }
    return false;
  };

  InitialGain out;
  FourierMatrix K = FourierMatrix::zero(T, p, n);
  K.mark_real(true);
  if (certify(K, "zero", out)) return out;

  try {
    const MatrixXcd A0 = A.phasor(0), B0 = B.phasor(0), Q0 = Q.phasor(0), R0 = R.phasor(0);
    const MatrixXcd R0inv = R0.inverse();
    const MatrixXcd X = solve_care(A0, B0 * R0inv * B0.adjoint(), Q0);
    K = FourierMatrix::constant(T, R0inv * B0.adjoint() * X);
    if (A.is_real() && B.is_real() && R.is_real() && Q.is_real()) K.make_real();
    if (certify(K, "averaged_lqr", out)) return out;
  } catch (const Error& e) {
    failures << "averaged_lqr: " << e.what() << "; ";
  }

  try {
    const int m = std::max(m_trunc, 1);
    const int w = 2 * m + 1;
    TruncatedRiccati tr = full_truncated_riccati(A, B, Q, R, m);
    K = FourierMatrix(T, p, n, m);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = -m; k <= m; ++k) K.phasor(k)(i, j) = tr.K_m(i * w + m, j * w + m - k);
      }
    }
    if (A.is_real() && B.is_real() && R.is_real() && Q.is_real()) K.make_real();
    if (certify(K, "truncated_riccati", out)) return out;
  } catch (const Error& e) {
    failures << "truncated_riccati: " << e.what() << "; ";
  }

  throw PreconditionError("initial_gain: no candidate gain certified stabilizing (" +
                          failures.str() + "); supply K0 explicitly");
}

RiccatiSolution kleinman_solve(const FourierMatrix& A, const FourierMatrix& B,
                               const FourierMatrix& Q, const FourierMatrix& R,
                               const KleinmanConfig& cfg) {
  check_shapes(A, B, Q, R, "kleinman_solve");
  if (!(cfg.eps > 0.0)) throw PreconditionError("kleinman_solve: eps must be positive");
  if (!(min_grid_eigenvalue(Q) > 0.0)) {
    throw PreconditionError("kleinman_solve: Q(t) must be positive definite on the grid");
  }
  if (!(min_grid_eigenvalue(R) > 0.0)) {
    throw PreconditionError("kleinman_solve: R(t) must be positive definite on the grid");
  }
  const bool real = A.is_real() && B.is_real() && Q.is_real() && R.is_real();
  const FourierMatrix Rinv = invert_pointwise(R, default_rinv_band(R, cfg.rinv_band)).inverse;

  RiccatiSolution sol;
  sol.eps = cfg.eps;
  sol.eta = riccati_eta(B, R);
  const double lyap_tol = std::min(cfg.eps, sol.eta * cfg.eps * cfg.eps / 4.0);

  FourierMatrix K;
  if (cfg.K0) {
    K = *cfg.K0;
    const double rho = spectral_radius_of_monodromy(closed_loop(A, B, K));
    if (!(rho < 1.0 - kStabilityMargin)) {
      std::ostringstream os;
      os << "kleinman_solve: supplied K0 is not stabilizing (closed-loop radius " << rho << ")";
      throw PreconditionError(os.str());
    }
  } else {
    K = initial_gain(A, B, R, Q).K0;
  }

  int m = std::max(cfg.m0, 1);
  FourierMatrix S_prev;
  double last_change = std::numeric_limits<double>::infinity();
  double last_lyap = 0.0;
  for (int it = 1; it <= cfg.max_outer; ++it) {
    KleinmanIteration rec;
    rec.index = it;
    const FourierMatrix Ak = closed_loop(A, B, K);
    rec.closed_loop_radius = spectral_radius_of_monodromy(Ak);
    if (!(rec.closed_loop_radius < 1.0)) {
      std::ostringstream os;
      os << "kleinman_solve: closed loop lost Floquet stability at iteration " << it
         << " (radius " << rec.closed_loop_radius << ")";
      throw ConvergenceError(os.str());
    }
    FourierMatrix Qk = Q + multiply(multiply(K.adjoint(), R), K);
    Qk = Qk.hermitian_part();
    if (real) Qk.make_real();

    // Targets below round-off cannot be met by adding harmonics.
    const double step_tol =
        std::max(lyap_tol, 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + Qk.l2_norm()));
    LyapunovSolution ls = solve_symbol_lyapunov(Ak, Qk, m);
    while (!cfg.fixed_m && ls.residual_symbol >= step_tol && m < cfg.m_max) {
      m = std::min(cfg.m_max, m + std::max(4, m / 2));
      ls = solve_symbol_lyapunov(Ak, Qk, m);
    }
    if (!cfg.fixed_m && ls.residual_symbol >= step_tol) {
      std::ostringstream os;
      os << "kleinman_solve: per-step Lyapunov residual " << ls.residual_symbol
         << " above " << step_tol << " at m_max = " << cfg.m_max << " (iteration " << it << ")";
      throw ConvergenceError(os.str());
    }
    rec.m = m;
    rec.lyapunov_residual = ls.residual_symbol;
    rec.min_eigenvalue = ls.min_eigenvalue;
    const FourierMatrix& S = ls.P;
    rec.change = std::numeric_limits<double>::quiet_NaN();
    rec.monotone_margin = std::numeric_limits<double>::quiet_NaN();
    if (it > 1) {
      rec.change = (S - S_prev).l2_norm();
      rec.monotone_margin = min_grid_eigenvalue((S_prev - S).hermitian_part());
      sol.monotone_log.push_back(rec.monotone_margin);
    }
    K = gain_from(Rinv, B, S, 2 * m, &rec.gain_tail);
    if (real) K.make_real();
    last_change = it > 1 ? rec.change : std::numeric_limits<double>::infinity();
    last_lyap = ls.residual_symbol;
    S_prev = S;
    sol.log.push_back(rec);
    sol.iterations = it;

    if (last_change < cfg.outer_tol) {
      sol.residual_riccati = riccati_residual(A, B, Q, R, S, cfg.rinv_band);
      sol.bound_eta_eps2 = sol.eta * cfg.eps * cfg.eps;
      sol.certificate_ok = sol.residual_riccati <= sol.bound_eta_eps2;
      if (sol.certificate_ok || cfg.fixed_m || m >= cfg.m_max) break;
      m = std::min(cfg.m_max, m + std::max(4, m / 2));
    }
  }
  if (!(last_change < cfg.outer_tol)) {
    std::ostringstream os;
    os << "kleinman_solve: outer iteration did not converge in " << cfg.max_outer
       << " steps (last change " << last_change << ")";
    throw ConvergenceError(os.str());
  }
  sol.S = S_prev;
  sol.K = K;
  sol.m_final = m;
  sol.eps_achieved =
      std::sqrt(last_change * last_change + (sol.eta > 0.0 ? last_lyap / sol.eta : 0.0));
  sol.closed_loop_radius = spectral_radius_of_monodromy(closed_loop(A, B, K));
  return sol;
}

FourierMatrix time_domain_riccati_oracle(const FourierMatrix& A, const FourierMatrix& B,
                                         const FourierMatrix& Q, const FourierMatrix& R,
                                         const RiccatiOracleOptions& opts) {
  check_shapes(A, B, Q, R, "time_domain_riccati_oracle");
  const int n = A.rows();
  const double T = A.period();
  auto rhs = [&](double t, const VectorXcd& x, VectorXcd& dx) {
    Eigen::Map<const MatrixXcd> S(x.data(), n, n);
    const MatrixXcd At = A.evaluate(t), Bt = B.evaluate(t);
    const MatrixXcd G = Bt * R.evaluate(t).inverse() * Bt.adjoint();
    dx.resize(n * n);
    Eigen::Map<MatrixXcd>(dx.data(), n, n) =
        -(At.adjoint() * S + S * At - S * G * S + Q.evaluate(t));
  };
  MatrixXcd ST = Q.evaluate(0.0);
  bool converged = false;
  for (int p = 0; p < opts.max_periods; ++p) {
    VectorXcd x0 = Eigen::Map<const VectorXcd>(ST.data(), n * n);
    auto xs = integrate(rhs, x0, {T, 0.0}, opts.ode);
    MatrixXcd S0 = Eigen::Map<const MatrixXcd>(xs.back().data(), n, n);
    S0 = 0.5 * (S0 + S0.adjoint()).eval();
    const double d = (S0 - ST).norm();
    ST = S0;
    if (d < opts.fixed_point_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("time_domain_riccati_oracle: period map did not reach a fixed point");
  }
  const TimeGrid grid(T, opts.grid_samples);
  std::vector<double> times{T};
  for (int i = grid.size() - 1; i >= 0; --i) times.push_back(grid.time(i));
  VectorXcd x0 = Eigen::Map<const VectorXcd>(ST.data(), n * n);
  auto xs = integrate(rhs, x0, times, opts.ode);
  std::vector<MatrixXcd> samples(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    MatrixXcd S = Eigen::Map<const MatrixXcd>(xs[grid.size() - i].data(), n, n);
    samples[i] = 0.5 * (S + S.adjoint());
  }
  const int band = opts.band_out >= 0 ? opts.band_out : opts.grid_samples / 2 - 1;
  FourierMatrix S = analyze(samples, grid, band);
  if (A.is_real() && B.is_real() && Q.is_real() && R.is_real()) S.make_real();
  return S;
}

}  // namespace hltp
