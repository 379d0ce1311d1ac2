#include "hltp/fourier.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "hltp/errors.hpp"

namespace hltp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Forward DFT of each matrix entry across samples, returning
// sum_n x_n exp(-2 pi j k n / N) for k in [-band, band].
std::vector<MatrixXcd> dft_entries(const std::vector<MatrixXcd>& samples, int band) {
  const int N = static_cast<int>(samples.size());
  const int rows = samples.front().rows();
  const int cols = samples.front().cols();
  std::vector<MatrixXcd> out(2 * band + 1, MatrixXcd::Zero(rows, cols));
  Eigen::FFT<double> fft;
  std::vector<cdouble> in(N), spec;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      for (int n = 0; n < N; ++n) in[n] = samples[n](i, j);
      fft.fwd(spec, in);
      for (int k = -band; k <= band; ++k) out[k + band](i, j) = spec[(k + N) % N];
    }
  }
  return out;
}

}  // namespace

TimeGrid::TimeGrid(double period, int samples) : period_(period), samples_(samples) {
  if (!(period > 0.0)) throw PreconditionError("TimeGrid: period must be positive");
  if (samples < 1) throw PreconditionError("TimeGrid: sample count must be positive");
}

TimeGrid TimeGrid::for_band(double period, int band) {
  return TimeGrid(period, next_pow2(4 * band + 4));
}

double TimeGrid::omega() const { return kTwoPi / period_; }

std::vector<double> TimeGrid::times() const {
  std::vector<double> t(samples_);
  for (int i = 0; i < samples_; ++i) t[i] = time(i);
  return t;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

FourierMatrix::FourierMatrix(double period, int rows, int cols, int band)
    : period_(period), rows_(rows), cols_(cols), band_(band),
      phasors_(2 * band + 1, MatrixXcd::Zero(rows, cols)) {
  if (!(period > 0.0)) throw PreconditionError("FourierMatrix: period must be positive");
  if (rows < 1 || cols < 1) throw PreconditionError("FourierMatrix: empty shape");
  if (band < 0) throw PreconditionError("FourierMatrix: negative band");
}

FourierMatrix FourierMatrix::constant(double period, const MatrixXcd& value) {
  FourierMatrix f(period, value.rows(), value.cols(), 0);
  f.phasors_[0] = value;
  f.real_ = value.imag().isZero(0.0);
  return f;
}

double FourierMatrix::omega() const { return kTwoPi / period_; }

const MatrixXcd& FourierMatrix::phasor(int k) const {
  if (k < -band_ || k > band_) {
    throw PreconditionError("FourierMatrix::phasor: index outside stored band");
  }
  return phasors_[k + band_];
}

MatrixXcd& FourierMatrix::phasor(int k) {
  if (k < -band_ || k > band_) {
    throw PreconditionError("FourierMatrix::phasor: index outside stored band");
  }
  return phasors_[k + band_];
}

cdouble FourierMatrix::coeff(int i, int j, int k) const {
  if (k < -band_ || k > band_) return 0.0;
  return phasors_[k + band_](i, j);
}

FourierMatrix& FourierMatrix::make_real() {
  for (int k = 0; k <= band_; ++k) {
    MatrixXcd avg = 0.5 * (phasors_[band_ + k] + phasors_[band_ - k].conjugate());
    phasors_[band_ + k] = avg;
    phasors_[band_ - k] = avg.conjugate();
  }
  real_ = true;
  return *this;
}

double FourierMatrix::conjugate_symmetry_defect() const {
  double d = 0.0;
  for (int k = 0; k <= band_; ++k) {
    d = std::max(d, (phasors_[band_ - k] - phasors_[band_ + k].conjugate()).cwiseAbs().maxCoeff());
  }
  return d;
}

MatrixXcd FourierMatrix::evaluate(double t) const {
  const cdouble step = std::polar(1.0, omega() * t);
  MatrixXcd out = phasors_[band_];
  cdouble e = 1.0;
  for (int k = 1; k <= band_; ++k) {
    e *= step;
    out += phasors_[band_ + k] * e + phasors_[band_ - k] * std::conj(e);
  }
  if (real_) out = out.real().cast<cdouble>();
  return out;
}

std::vector<MatrixXcd> FourierMatrix::sample(const TimeGrid& grid) const {
  const int N = grid.size();
  if (N < 2 * band_ + 1) {
    // Coarse grid: direct evaluation keeps the samples exact.
    std::vector<MatrixXcd> out(N);
    for (int n = 0; n < N; ++n) out[n] = evaluate(grid.time(n));
    return out;
  }
  std::vector<MatrixXcd> out(N, MatrixXcd::Zero(rows_, cols_));
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<cdouble> spec(N), time;
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      std::fill(spec.begin(), spec.end(), cdouble(0.0));
      for (int k = -band_; k <= band_; ++k) spec[(k + N) % N] += phasors_[k + band_](i, j);
      fft.inv(time, spec);
      for (int n = 0; n < N; ++n) out[n](i, j) = time[n];
    }
  }
  if (real_) {
    for (auto& m : out) m = m.real().cast<cdouble>();
  }
  return out;
}

FourierMatrix FourierMatrix::with_band(int band, double* tail) const {
  FourierMatrix out(period_, rows_, cols_, band);
  const int b = std::min(band, band_);
  for (int k = -b; k <= b; ++k) out.phasors_[k + band] = phasors_[k + band_];
  out.real_ = real_;
  if (tail) *tail = tail_energy(band);
  return out;
}

double FourierMatrix::tail_energy(int band) const {
  double e = 0.0;
  for (int k = -band_; k <= band_; ++k) {
    if (std::abs(k) > band) e += phasors_[k + band_].squaredNorm();
  }
  return e;
}

FourierMatrix FourierMatrix::adjoint() const {
  FourierMatrix out(period_, cols_, rows_, band_);
  for (int k = -band_; k <= band_; ++k) out.phasors_[k + band_] = phasors_[band_ - k].adjoint();
  out.real_ = real_;
  return out;
}

FourierMatrix FourierMatrix::derivative() const {
  FourierMatrix out = *this;
  const double w = omega();
  for (int k = -band_; k <= band_; ++k) out.phasors_[k + band_] *= cdouble(0.0, w * k);
  return out;
}

FourierMatrix FourierMatrix::block(int row, int col, int rows, int cols) const {
  FourierMatrix out(period_, rows, cols, band_);
  for (int k = 0; k < 2 * band_ + 1; ++k) out.phasors_[k] = phasors_[k].block(row, col, rows, cols);
  out.real_ = real_;
  return out;
}

FourierMatrix FourierMatrix::hermitian_part() const {
  if (rows_ != cols_) throw PreconditionError("hermitian_part: signal is not square");
  FourierMatrix out = *this;
  for (int k = -band_; k <= band_; ++k) {
    out.phasors_[k + band_] = 0.5 * (phasors_[k + band_] + phasors_[band_ - k].adjoint());
  }
  return out;
}

double FourierMatrix::l2_norm() const {
  double s = 0.0;
  for (const auto& p : phasors_) s += p.squaredNorm();
  return std::sqrt(s);
}

namespace {

void check_same_shape(const FourierMatrix& a, const FourierMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw PreconditionError(std::string(op) + ": shape mismatch");
  }
  if (std::abs(a.period() - b.period()) > 1e-12 * a.period()) {
    throw PreconditionError(std::string(op) + ": period mismatch");
  }
}

}  // namespace

FourierMatrix& FourierMatrix::operator+=(const FourierMatrix& o) {
  check_same_shape(*this, o, "operator+");
  if (o.band_ > band_) *this = with_band(o.band_);
  for (int k = -o.band_; k <= o.band_; ++k) phasors_[k + band_] += o.phasors_[k + o.band_];
  real_ = real_ && o.real_;
  return *this;
}

FourierMatrix& FourierMatrix::operator-=(const FourierMatrix& o) {
  check_same_shape(*this, o, "operator-");
  if (o.band_ > band_) *this = with_band(o.band_);
  for (int k = -o.band_; k <= o.band_; ++k) phasors_[k + band_] -= o.phasors_[k + o.band_];
  real_ = real_ && o.real_;
  return *this;
}

FourierMatrix& FourierMatrix::operator*=(cdouble s) {
  for (auto& p : phasors_) p *= s;
  real_ = real_ && s.imag() == 0.0;
  return *this;
}

FourierMatrix operator+(FourierMatrix a, const FourierMatrix& b) { return a += b; }
FourierMatrix operator-(FourierMatrix a, const FourierMatrix& b) { return a -= b; }
FourierMatrix operator*(cdouble s, FourierMatrix a) { return a *= s; }
FourierMatrix operator-(FourierMatrix a) { return a *= -1.0; }

PhasorVector::PhasorVector(double period, int dim, int band)
    : period(period), band(band), coeffs(MatrixXcd::Zero(dim, 2 * band + 1)) {}

PhasorVector PhasorVector::from(const FourierMatrix& f) {
  if (f.cols() != 1) throw PreconditionError("PhasorVector::from: signal must be a column");
  PhasorVector v(f.period(), f.rows(), f.band());
  for (int k = -f.band(); k <= f.band(); ++k) v.coeffs.col(k + f.band()) = f.phasor(k);
  return v;
}

cdouble PhasorVector::at(int i, int k) const {
  if (k < -band || k > band) return 0.0;
  return coeffs(i, k + band);
}

VectorXcd PhasorVector::stacked(int m) const {
  const int w = 2 * m + 1;
  VectorXcd x(dim() * w);
  for (int i = 0; i < dim(); ++i) {
    for (int k = -m; k <= m; ++k) x(i * w + k + m) = at(i, k);
  }
  return x;
}

PhasorVector PhasorVector::from_stacked(double period, int dim, int m, const VectorXcd& x) {
  const int w = 2 * m + 1;
  if (x.size() != dim * w) throw PreconditionError("PhasorVector::from_stacked: size mismatch");
  PhasorVector v(period, dim, m);
  for (int i = 0; i < dim; ++i) {
    for (int k = -m; k <= m; ++k) v.coeffs(i, k + m) = x(i * w + k + m);
  }
  return v;
}

FourierMatrix PhasorVector::to_signal() const {
  FourierMatrix f(period, dim(), 1, band);
  for (int k = -band; k <= band; ++k) f.phasor(k) = coeffs.col(k + band);
  return f;
}

FourierMatrix analyze(const std::vector<MatrixXcd>& samples, const TimeGrid& grid, int band) {
  const int N = grid.size();
  if (static_cast<int>(samples.size()) != N) {
    throw PreconditionError("analyze: sample count does not match the grid");
  }
  if (band < 0 || 2 * band + 1 > N) {
    std::ostringstream os;
    os << "analyze: band " << band << " too large for a grid of " << N << " samples";
    throw PreconditionError(os.str());
  }
  auto spec = dft_entries(samples, band);
  FourierMatrix f(grid.period(), samples.front().rows(), samples.front().cols(), band);
  for (int k = -band; k <= band; ++k) f.phasor(k) = spec[k + band] / static_cast<double>(N);
  return f;
}

FourierMatrix multiply(const FourierMatrix& f, const FourierMatrix& g) {
  return multiply(f, g, f.band() + g.band());
}

FourierMatrix multiply(const FourierMatrix& f, const FourierMatrix& g, int band_out,
                       double* tail_energy) {
  if (f.cols() != g.rows()) throw PreconditionError("multiply: inner dimensions differ");
  if (std::abs(f.period() - g.period()) > 1e-12 * f.period()) {
    throw PreconditionError("multiply: period mismatch");
  }
  const int full = f.band() + g.band();
  FourierMatrix prod;
  if (f.band() == 0 || g.band() == 0) {
    // One factor is constant: the convolution degenerates to a product.
    prod = FourierMatrix(f.period(), f.rows(), g.cols(), full);
    for (int k = -full; k <= full; ++k) {
      if (f.band() == 0) {
        prod.phasor(k) = f.phasor(0) * g.phasor(k);
      } else {
        prod.phasor(k) = f.phasor(k) * g.phasor(0);
      }
    }
  } else {
    TimeGrid grid(f.period(), next_pow2(4 * full + 4));
    auto fs = f.sample(grid);
    auto gs = g.sample(grid);
    std::vector<MatrixXcd> ps(grid.size());
    for (int n = 0; n < grid.size(); ++n) ps[n] = fs[n] * gs[n];
    prod = analyze(ps, grid, full);
  }
  if (f.is_real() && g.is_real()) prod.make_real();
  if (band_out >= full) {
    if (tail_energy) *tail_energy = 0.0;
    return band_out == full ? prod : prod.with_band(band_out);
  }
  return prod.with_band(band_out, tail_energy);
}

PointwiseInverse invert_pointwise(const FourierMatrix& r, int band_out, double eta) {
  if (r.rows() != r.cols()) throw PreconditionError("invert_pointwise: signal is not square");
  PointwiseInverse res;
  if (r.band() == 0) {
    const MatrixXcd& c = r.phasor(0);
    const double d = std::abs(c.determinant());
    res.min_abs_det = d;
    if (d < eta) throw PreconditionError("invert_pointwise: constant matrix is singular");
    res.inverse = FourierMatrix::constant(r.period(), c.inverse()).with_band(band_out);
    res.inverse.mark_real(r.is_real());
    res.residual = (c * res.inverse.phasor(0) - MatrixXcd::Identity(c.rows(), c.cols())).norm();
    return res;
  }
  TimeGrid grid(r.period(), next_pow2(8 * (band_out + r.band()) + 8));
  auto rs = r.sample(grid);
  std::vector<MatrixXcd> inv(grid.size());
  res.min_abs_det = std::numeric_limits<double>::infinity();
  for (int n = 0; n < grid.size(); ++n) {
    const double d = std::abs(rs[n].determinant());
    if (d < res.min_abs_det) {
      res.min_abs_det = d;
      res.worst_time = grid.time(n);
    }
  }
  if (res.min_abs_det < eta) {
    std::ostringstream os;
    os << "invert_pointwise: |det r(t)| = " << res.min_abs_det << " below " << eta
       << " at t = " << res.worst_time;
    throw PreconditionError(os.str());
  }
  for (int n = 0; n < grid.size(); ++n) inv[n] = rs[n].inverse();
  res.inverse = analyze(inv, grid, band_out);
  if (r.is_real()) res.inverse.make_real();
  // Residual of the band-limited inverse on a grid offset by half a step.
  const double h = grid.period() / grid.size();
  for (int n = 0; n < grid.size(); ++n) {
    const double t = (n + 0.5) * h;
    MatrixXcd e = r.evaluate(t) * res.inverse.evaluate(t);
    e -= MatrixXcd::Identity(r.rows(), r.cols());
    res.residual = std::max(res.residual, e.operatorNorm());
  }
  return res;
}

std::vector<VectorXcd> reconstruct_trajectory(const std::vector<double>& times,
                                              const std::vector<PhasorVector>& X,
                                              const std::vector<VectorXcd>& dX0) {
  if (times.size() != X.size()) {
    throw PreconditionError("reconstruct_trajectory: times and phasors differ in length");
  }
  if (!dX0.empty() && dX0.size() != X.size()) {
    throw PreconditionError("reconstruct_trajectory: dX0 length mismatch");
  }
  std::vector<VectorXcd> x(times.size());
  for (size_t s = 0; s < times.size(); ++s) {
    const PhasorVector& p = X[s];
    const double w = kTwoPi / p.period;
    VectorXcd v = VectorXcd::Zero(p.dim());
    for (int k = -p.band; k <= p.band; ++k) {
      v += p.coeffs.col(k + p.band) * std::polar(1.0, w * k * times[s]);
    }
    if (!dX0.empty()) v += 0.5 * p.period * dX0[s];
    x[s] = v;
  }
  return x;
}

PhasorVector sliding_phasors(const std::vector<VectorXcd>& x, double h, double period, int band,
                             int idx) {
  const int steps = static_cast<int>(std::lround(period / h));
  if (std::abs(steps * h - period) > 1e-9 * period) {
    throw PreconditionError("sliding_phasors: period is not a multiple of the step");
  }
  if (idx < steps || idx >= static_cast<int>(x.size())) {
    throw PreconditionError("sliding_phasors: window leaves the sampled range");
  }
  const double w = kTwoPi / period;
  PhasorVector out(period, x[idx].size(), band);
  for (int k = -band; k <= band; ++k) {
    VectorXcd acc = VectorXcd::Zero(x[idx].size());
    for (int s = idx - steps; s <= idx; ++s) {
      const double weight = (s == idx - steps || s == idx) ? 0.5 : 1.0;
      acc += weight * x[s] * std::polar(1.0, -w * k * s * h);
    }
    out.coeffs.col(k + band) = acc * (h / period);
  }
  return out;
}

}  // namespace hltp
