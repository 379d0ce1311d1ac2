#pragma once

#include <optional>
#include <vector>

#include "hltp/fourier.hpp"
#include "hltp/ode.hpp"

namespace hltp {

// Constant phasor pair with 0 = (A_m - N_m) X_ref + B_m U_ref.
struct HarmonicEquilibrium {
  PhasorVector X_ref;
  PhasorVector U_ref;
  int m = 0;
  double residual = 0.0;             // at the working truncation m
  double truncation_residual = 0.0;  // same pair embedded and re-evaluated at 2m
  // nearest_equilibrium only
  double cost = 0.0;                 // ||X_d - X_ref||^2
  double gradient_norm = 0.0;
  bool rank_deficient = false;
};

HarmonicEquilibrium equilibrium_from_input(const FourierMatrix& A, const FourierMatrix& B,
                                           const PhasorVector& U_ref, int m);

// min over U_ref of ||X_d - X_ref||^2 subject to the equilibrium relation,
// solved with a rank-revealing complete orthogonal decomposition (minimum
// norm minimizer when the map is rank deficient). U_ref is restricted to
// |k| <= input_band (-1 picks m/2) so the minimizer cannot lean on
// harmonics that only the truncation edge resolves.
HarmonicEquilibrium nearest_equilibrium(const FourierMatrix& A, const FourierMatrix& B,
                                        const PhasorVector& X_d, int m, int input_band = -1);

struct ReconstructedGain {
  FourierMatrix K;
  double tail_energy = 0.0;     // energy of the discarded phasors |k| > m0
  double imag_leakage = 0.0;    // max |Im K(t)| over a grid before real-part enforcement
};

ReconstructedGain reconstruct_gain(const FourierMatrix& K, int m0);

struct TrackingSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  std::optional<PhasorVector> u_ref;  // target input phasors, or
  std::optional<PhasorVector> x_d;    // desired state phasors (nearest equilibrium)
};

struct TrackingScenario {
  std::vector<TrackingSegment> segments;
  Eigen::VectorXd x0;
  int m = 32;                         // working truncation for the equilibria
  double output_step = 0.01;
  double divergence_threshold = 1e3;
  OdeOptions ode{1e-9, 1e-12};
};

struct SegmentReport {
  double t_start = 0.0, t_end = 0.0;
  HarmonicEquilibrium equilibrium;
  double terminal_error = 0.0;    // ||x(t_end) - x_ref(t_end)||
  double xref_norm = 0.0;         // ||x_ref(t_end)||
  double relative_error = 0.0;    // terminal_error / (1 + xref_norm)
  double imag_leakage = 0.0;      // max |Im| of reconstructed x_ref, u_ref
};

struct SimulationResult {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x, u, xref;
  std::vector<double> err;
  std::vector<SegmentReport> segments;
  double max_state_norm = 0.0;
  std::optional<double> divergence_time;  // first sample with ||x|| above the threshold
  double gain_imag_leakage = 0.0;
};

// Closed loop x' = A x + B u with u = -K (x - x_ref) + u_ref, segment by
// segment; x_ref and u_ref come from the steady-state reconstruction of the
// segment's harmonic equilibrium.
SimulationResult simulate_closed_loop(const FourierMatrix& A, const FourierMatrix& B,
                                      const FourierMatrix& K, const TrackingScenario& scenario);

}  // namespace hltp
