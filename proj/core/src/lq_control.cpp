#include "hltp/lq_control.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hltp/errors.hpp"
#include "hltp/toeplitz.hpp"

namespace hltp {

namespace {

void check_pair(const FourierMatrix& A, const FourierMatrix& B, const char* who) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw PreconditionError(std::string(who) + ": incompatible shapes of A and B");
  }
}

Eigen::PartialPivLU<MatrixXcd> factor_harmonic(const MatrixXcd& H, int m) {
  Eigen::PartialPivLU<MatrixXcd> lu(H);
  if (!(lu.rcond() > 1e-14)) {
    std::ostringstream os;
    os << "harmonic operator truncated at m = " << m << " is singular (rcond " << lu.rcond()
       << ")";
    throw PreconditionError(os.str());
  }
  return lu;
}

double equilibrium_residual(const FourierMatrix& A, const FourierMatrix& B, const PhasorVector& X,
                            const PhasorVector& U, int m) {
  const VectorXcd r =
      HarmonicOperator(A, m).apply(X.stacked(m)) + toeplitz(B, m).data() * U.stacked(m);
  return r.norm();
}

PhasorVector real_projection(const PhasorVector& v) {
  FourierMatrix f = v.to_signal();
  f.make_real();
  return PhasorVector::from(f);
}

}  // namespace

HarmonicEquilibrium equilibrium_from_input(const FourierMatrix& A, const FourierMatrix& B,
                                           const PhasorVector& U_ref, int m) {
  check_pair(A, B, "equilibrium_from_input");
  if (U_ref.dim() != B.cols()) throw PreconditionError("equilibrium_from_input: input size");
  const MatrixXcd H = HarmonicOperator(A, m).dense();
  auto lu = factor_harmonic(H, m);
  const VectorXcd x = -lu.solve(toeplitz(B, m).data() * U_ref.stacked(m));
  HarmonicEquilibrium eq;
  eq.m = m;
  eq.X_ref = PhasorVector::from_stacked(A.period(), A.rows(), m, x);
  eq.U_ref = PhasorVector::from_stacked(A.period(), B.cols(), m, U_ref.stacked(m));
  eq.residual = equilibrium_residual(A, B, eq.X_ref, eq.U_ref, m);
  eq.truncation_residual = equilibrium_residual(A, B, eq.X_ref, eq.U_ref, 2 * m);
  return eq;
}

HarmonicEquilibrium nearest_equilibrium(const FourierMatrix& A, const FourierMatrix& B,
                                        const PhasorVector& X_d, int m, int input_band) {
  check_pair(A, B, "nearest_equilibrium");
  if (X_d.dim() != A.rows()) throw PreconditionError("nearest_equilibrium: target size");
  const int mu = input_band < 0 ? m / 2 : std::min(input_band, m);
  const int p = B.cols(), w = 2 * m + 1;
  const MatrixXcd H = HarmonicOperator(A, m).dense();
  auto lu = factor_harmonic(H, m);
  const MatrixXcd Bm = toeplitz(B, m).data();
  MatrixXcd Bu(Bm.rows(), p * (2 * mu + 1));
  for (int i = 0; i < p; ++i) {
    Bu.middleCols(i * (2 * mu + 1), 2 * mu + 1) = Bm.middleCols(i * w + m - mu, 2 * mu + 1);
  }
  const MatrixXcd Mmap = -lu.solve(Bu);
  const VectorXcd xd = X_d.stacked(m);
  Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(Mmap);
  VectorXcd u = PhasorVector::from_stacked(A.period(), p, mu, cod.solve(xd)).stacked(m);
  const bool real_target =
      X_d.to_signal().conjugate_symmetry_defect() <= 1e-14 * (1.0 + X_d.l2_norm());
  if (A.is_real() && B.is_real() && real_target) {
    u = real_projection(PhasorVector::from_stacked(A.period(), B.cols(), m, u)).stacked(m);
  }
  HarmonicEquilibrium eq;
  eq.m = m;
  eq.rank_deficient = cod.rank() < Mmap.cols();
  eq.U_ref = PhasorVector::from_stacked(A.period(), p, m, u);
  const VectorXcd x = -lu.solve(Bm * u);
  eq.X_ref = PhasorVector::from_stacked(A.period(), A.rows(), m, x);
  eq.cost = (xd - x).squaredNorm();
  eq.gradient_norm = (Mmap.adjoint() * (x - xd)).norm();  // at the projected input
  eq.residual = equilibrium_residual(A, B, eq.X_ref, eq.U_ref, m);
  eq.truncation_residual = equilibrium_residual(A, B, eq.X_ref, eq.U_ref, 2 * m);
  return eq;
}

ReconstructedGain reconstruct_gain(const FourierMatrix& K, int m0) {
  if (m0 < 0 || m0 > K.band()) throw PreconditionError("reconstruct_gain: m0 outside [0, band]");
  ReconstructedGain out;
  out.K = K.with_band(m0, &out.tail_energy);
  out.K.mark_real(false);
  TimeGrid grid(K.period(), next_pow2(4 * m0 + 64));
  for (const auto& s : out.K.sample(grid)) {
    out.imag_leakage = std::max(out.imag_leakage, s.imag().cwiseAbs().maxCoeff());
  }
  out.K.make_real();
  return out;
}

SimulationResult simulate_closed_loop(const FourierMatrix& A, const FourierMatrix& B,
                                      const FourierMatrix& K, const TrackingScenario& sc) {
  check_pair(A, B, "simulate_closed_loop");
  const int n = A.rows(), p = B.cols();
  if (K.rows() != p || K.cols() != n) throw PreconditionError("simulate_closed_loop: gain shape");
  if (sc.x0.size() != n) throw PreconditionError("simulate_closed_loop: x0 size");
  const double T = A.period();
  SimulationResult res;
  {
    TimeGrid grid(T, next_pow2(4 * K.band() + 64));
    for (const auto& s : K.sample(grid)) {
      res.gain_imag_leakage = std::max(res.gain_imag_leakage, s.imag().cwiseAbs().maxCoeff());
    }
  }

  VectorXcd x = sc.x0.cast<cdouble>();
  double prev_end = -std::numeric_limits<double>::infinity();
  for (const TrackingSegment& seg : sc.segments) {
    if (!(seg.t_end > seg.t_start) || seg.t_start < prev_end) {
      throw PreconditionError("simulate_closed_loop: segments must be ordered and non-overlapping");
    }
    prev_end = seg.t_end;
    SegmentReport rep;
    rep.t_start = seg.t_start;
    rep.t_end = seg.t_end;
    if (seg.u_ref) {
      rep.equilibrium = equilibrium_from_input(A, B, *seg.u_ref, sc.m);
    } else if (seg.x_d) {
      rep.equilibrium = nearest_equilibrium(A, B, *seg.x_d, sc.m);
    } else {
      rep.equilibrium = equilibrium_from_input(A, B, PhasorVector(T, p, 0), sc.m);
    }
    const FourierMatrix xref_sig = rep.equilibrium.X_ref.to_signal();
    const FourierMatrix uref_sig = rep.equilibrium.U_ref.to_signal();
    auto leak = [&](const FourierMatrix& f) {
      TimeGrid g(T, next_pow2(4 * f.band() + 64));
      double l = 0.0;
      for (const auto& s : f.sample(g)) l = std::max(l, s.imag().cwiseAbs().maxCoeff());
      return l;
    };
    rep.imag_leakage = std::max(leak(xref_sig), leak(uref_sig));
    auto xref_at = [&](double t) -> Eigen::VectorXd { return xref_sig.evaluate(t).col(0).real(); };
    auto uref_at = [&](double t) -> Eigen::VectorXd { return uref_sig.evaluate(t).col(0).real(); };
    auto control = [&](double t, const VectorXcd& xs) -> Eigen::VectorXd {
      const Eigen::VectorXd xr = xs.real();
      return -K.evaluate(t).real() * (xr - xref_at(t)) + uref_at(t);
    };
    auto rhs = [&](double t, const VectorXcd& xs, VectorXcd& dx) {
      const Eigen::VectorXd u = control(t, xs);
      dx = A.evaluate(t) * xs + B.evaluate(t) * u.cast<cdouble>();
    };

    std::vector<double> times;
    const int steps = std::max(1, static_cast<int>(std::ceil((seg.t_end - seg.t_start) / sc.output_step - 1e-9)));
    for (int i = 0; i <= steps; ++i) {
      times.push_back(std::min(seg.t_end, seg.t_start + i * sc.output_step));
    }
    const std::vector<VectorXcd> xs = integrate(rhs, x, times, sc.ode);
    const size_t first = res.t.empty() ? 0 : 1;  // avoid duplicating the switch instant
    for (size_t i = first; i < times.size(); ++i) {
      const Eigen::VectorXd xi = xs[i].real();
      const Eigen::VectorXd xr = xref_at(times[i]);
      res.t.push_back(times[i]);
      res.x.push_back(xi);
      res.u.push_back(control(times[i], xs[i]));
      res.xref.push_back(xr);
      res.err.push_back((xi - xr).norm());
      const double nx = xi.norm();
      res.max_state_norm = std::max(res.max_state_norm, nx);
      if (!res.divergence_time && sc.divergence_threshold > 0 && nx > sc.divergence_threshold) {
        res.divergence_time = times[i];
      }
    }
    x = xs.back();
    const Eigen::VectorXd xr_end = xref_at(seg.t_end);
    rep.terminal_error = (x.real() - xr_end).norm();
    rep.xref_norm = xr_end.norm();
    rep.relative_error = rep.terminal_error / (1.0 + rep.xref_norm);
    res.segments.push_back(rep);
  }
  return res;
}

}  // namespace hltp
