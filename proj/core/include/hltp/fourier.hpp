#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace hltp {

using cdouble = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Phasor convention used everywhere in the library: coefficient k multiplies
// exp(+j*omega*k*t) and is obtained as (1/T) * integral of a(t) exp(-j*omega*k*t).
inline constexpr int kPhasorSign = +1;

// N equispaced samples t_i = i*T/N on [0, T).
class TimeGrid {
 public:
  TimeGrid(double period, int samples);

  // Smallest power-of-two grid with N >= 4*band + 4.
  static TimeGrid for_band(double period, int band);

  double period() const { return period_; }
  double omega() const;
  int size() const { return samples_; }
  double time(int i) const { return period_ * i / samples_; }
  std::vector<double> times() const;

 private:
  double period_;
  int samples_;
};

int next_pow2(int n);

// A T-periodic rows x cols matrix function stored by its phasors k in
// [-band, band]. Phasors outside the stored band read as zero.
class FourierMatrix {
 public:
  FourierMatrix() = default;
  FourierMatrix(double period, int rows, int cols, int band);

  static FourierMatrix constant(double period, const MatrixXcd& value);
  static FourierMatrix zero(double period, int rows, int cols) {
    return FourierMatrix(period, rows, cols, 0);
  }
  static FourierMatrix identity(double period, int n) {
    return constant(period, MatrixXcd::Identity(n, n));
  }

  double period() const { return period_; }
  double omega() const;
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int band() const { return band_; }

  const MatrixXcd& phasor(int k) const;
  MatrixXcd& phasor(int k);
  cdouble coeff(int i, int j, int k) const;

  // Whether the signal is flagged real-valued. make_real() projects the
  // phasors onto the conjugate-symmetric subspace before setting the flag.
  bool is_real() const { return real_; }
  FourierMatrix& make_real();
  void mark_real(bool real) { real_ = real; }
  // max_k ||P_{-k} - conj(P_k)||_max, zero for an exactly real signal.
  double conjugate_symmetry_defect() const;

  MatrixXcd evaluate(double t) const;
  std::vector<MatrixXcd> sample(const TimeGrid& grid) const;

  // Restricts or zero-pads to a new band; the discarded phasor energy is
  // written to tail_energy when requested.
  FourierMatrix with_band(int band, double* tail_energy = nullptr) const;
  // Sum of |coefficient|^2 over phasors with |k| > band.
  double tail_energy(int band) const;

  // Pointwise conjugate transpose: (A^*)_k = (A_{-k})^*.
  FourierMatrix adjoint() const;
  // Time derivative: phasor k scaled by j*omega*k.
  FourierMatrix derivative() const;
  FourierMatrix block(int row, int col, int rows, int cols) const;
  FourierMatrix column(int j) const { return block(0, j, rows_, 1); }

  // Pointwise Hermitian part (P + P^*)/2; for a Hermitian-valued signal
  // this enforces P_{-k} = P_k^*.
  FourierMatrix hermitian_part() const;

  // Stacked l2 norm of all coefficients (equals the L2 norm over one period
  // of the Frobenius norm of the signal, by Parseval).
  double l2_norm() const;

  FourierMatrix& operator+=(const FourierMatrix& o);
  FourierMatrix& operator-=(const FourierMatrix& o);
  FourierMatrix& operator*=(cdouble s);

  const std::vector<MatrixXcd>& raw() const { return phasors_; }

 private:
  double period_ = 1.0;
  int rows_ = 0;
  int cols_ = 0;
  int band_ = 0;
  bool real_ = false;
  std::vector<MatrixXcd> phasors_;  // index k + band
};

FourierMatrix operator+(FourierMatrix a, const FourierMatrix& b);
FourierMatrix operator-(FourierMatrix a, const FourierMatrix& b);
FourierMatrix operator*(cdouble s, FourierMatrix a);
FourierMatrix operator-(FourierMatrix a);

// Phasor coordinates of an n-vector signal, coeffs(i, k + band).
struct PhasorVector {
  double period = 1.0;
  int band = 0;
  Eigen::MatrixXcd coeffs;  // dim x (2*band+1)

  PhasorVector() = default;
  PhasorVector(double period, int dim, int band);
  static PhasorVector from(const FourierMatrix& column_signal);

  int dim() const { return static_cast<int>(coeffs.rows()); }
  cdouble at(int i, int k) const;
  // Stacked layout used by the Toeplitz operators: entry i*(2m+1) + (k+m).
  VectorXcd stacked(int m) const;
  static PhasorVector from_stacked(double period, int dim, int m, const VectorXcd& x);
  FourierMatrix to_signal() const;
  double l2_norm() const { return coeffs.norm(); }
};

// Discrete Fourier analysis of samples taken on grid. Requires
// band <= (N-1)/2.
FourierMatrix analyze(const std::vector<MatrixXcd>& samples, const TimeGrid& grid, int band);

// Exact phasor convolution. The result has band band(f)+band(g) unless
// band_out is given, in which case it is truncated and the discarded tail
// energy is reported.
FourierMatrix multiply(const FourierMatrix& f, const FourierMatrix& g);
FourierMatrix multiply(const FourierMatrix& f, const FourierMatrix& g, int band_out,
                       double* tail_energy = nullptr);

struct PointwiseInverse {
  FourierMatrix inverse;
  double residual = 0.0;     // max over a check grid of ||r(t) r^{-1}(t) - Id||_2
  double min_abs_det = 0.0;  // min over the sampling grid of |det r(t)|
  double worst_time = 0.0;   // time at which min_abs_det is attained
};

// Pointwise matrix inverse of a square signal re-analyzed to band_out.
// Throws PreconditionError when |det r(t)| < eta on the sampling grid.
PointwiseInverse invert_pointwise(const FourierMatrix& r, int band_out, double eta = 1e-10);

// x(t_i) = sum_p X_p(t_i) exp(j omega p t_i) + (T/2) dX0(t_i). When dX0 is
// empty the zeroth-phasor derivative is taken as zero (steady state).
std::vector<VectorXcd> reconstruct_trajectory(const std::vector<double>& times,
                                              const std::vector<PhasorVector>& X,
                                              const std::vector<VectorXcd>& dX0 = {});

// Sliding-window phasors X_k(t) = (1/T) int_{t-T}^{t} x(s) exp(-j omega k s) ds
// by trapezoid quadrature, for a trajectory sampled uniformly with step h
// starting at t = 0. Evaluated at sample index idx (requires idx*h >= T and
// T/h integral). Validation utility only.
PhasorVector sliding_phasors(const std::vector<VectorXcd>& x, double h, double period, int band,
                             int idx);

}  // namespace hltp
