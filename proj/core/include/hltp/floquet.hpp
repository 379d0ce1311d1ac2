#pragma once

#include <optional>
#include <vector>

#include "hltp/fourier.hpp"
#include "hltp/ode.hpp"

namespace hltp {

struct Monodromy {
  MatrixXcd phi_T;                         // Phi(T, 0)
  std::vector<MatrixXcd> transition;       // Phi(t_i, 0) on the grid
  OdeStats stats;
  double liouville_error = 0.0;            // |det Phi(T) - exp(int tr A)|, relative to max(|exp(.)|, prod ||col||)
};

// Integrates dPhi/dt = A(t) Phi, Phi(0) = Id over one period, sampling on
// grid. Throws ConvergenceError when the Liouville determinant check is off
// by more than 1e-6 relative.
Monodromy integrate_transition(const FourierMatrix& A, const TimeGrid& grid,
                               const OdeOptions& opts = {});

// Multipliers (eigenvalues of Phi(T,0)) only.
VectorXcd floquet_multipliers(const FourierMatrix& A, const OdeOptions& opts = {});
double spectral_radius_of_monodromy(const FourierMatrix& A, const OdeOptions& opts = {});

struct ChainForcing {
  VectorXcd previous_initial;  // v_{i-1}(0); v_{i-1} is re-integrated alongside
  cdouble coefficient;         // 1/(T mu)
};

struct PeriodicVector {
  FourierMatrix v;                 // n x 1 phasors of v(t)
  std::vector<VectorXcd> samples;  // v(t_i) on the grid
  VectorXcd end_value;             // v(T) from the integrator
  double periodicity_error = 0.0;  // ||v(T) - v(0)||
};

// Solves dv/dt = (A(t) - lambda Id) v - c v_prev(t), v(0) = phi, over one
// period, where v_prev is the previous chain vector when forcing is given.
// Throws PreconditionError when ||v(T) - v(0)|| > tol * ||v(0)||.
PeriodicVector periodic_eigenvector(const FourierMatrix& A, cdouble lambda, const VectorXcd& phi,
                                    const TimeGrid& grid, int band_out, double tol,
                                    const std::optional<ChainForcing>& forcing = std::nullopt,
                                    const OdeOptions& opts = {});

struct FloquetOptions {
  int grid_samples = 256;
  int band_out = -1;            // phasor band of W; -1 picks grid_samples/2 - 1
  double periodicity_tol = 1e-8;  // raised to 100 rel_tol ||Phi(T)|| / |mu| per column
  double cluster_tol = 1e-7;    // relative multiplier distance treated as repeated
  double defect_cond = 1e8;     // eigenvector condition number marking a defective cluster
  double suspect_cond = 1e10;
  OdeOptions ode{1e-11, 1e-13};
};

struct FloquetFactorization {
  double period = 1.0;
  FourierMatrix W;
  FourierMatrix W_inv;
  MatrixXcd Lambda;               // Jordan form, superdiagonal 0 or 1/(T mu)
  VectorXcd mu;                   // multipliers, ordered like the columns of W
  VectorXcd lambda;               // principal log(mu)/T
  std::vector<bool> defective;    // per column: part of a Jordan chain
  std::vector<double> chain_scale;  // per column: scaling applied to the chain
  bool defective_suspect = false; // eigenvector basis condition above suspect_cond
  Monodromy monodromy;
  double periodicity_error = 0.0;    // max over columns of ||v(T) - v(0)||
  double periodicity_amplification = 1.0;  // max over columns of ||Phi(T)|| / |mu|
  double floquet_identity = 0.0;     // ||exp(Lambda T) - W(T)^{-1} Phi(T) W(T)||
  double residual_dW = 0.0;          // max grid ||W' - A W + W Lambda||
  double residual_dWinv = 0.0;       // max grid ||(W^{-1})' + W^{-1} A - Lambda W^{-1}||
  double eigvec_condition = 0.0;
};

FloquetFactorization floquet_factorize(const FourierMatrix& A, const FloquetOptions& opts = {});

class HarmonicSpectrum {
 public:
  HarmonicSpectrum() = default;
  HarmonicSpectrum(VectorXcd base, double omega) : base_(std::move(base)), omega_(omega) {}
  static HarmonicSpectrum from(const FloquetFactorization& fac);

  const VectorXcd& base() const { return base_; }
  double omega() const { return omega_; }
  // lambda_p + j omega k for |k| <= window, ordered by p then k.
  std::vector<cdouble> values(int window) const;
  bool is_hurwitz() const;
  // No lambda_p + j omega k vanishes (distance above tol).
  bool is_invertible(double tol = 1e-9) const;
  // sup |(lambda_p + j omega k)^{-1}| over all k.
  double sigma_plus() const;

 private:
  VectorXcd base_;
  double omega_ = 1.0;
};

}  // namespace hltp
