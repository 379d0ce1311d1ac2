#include "hltp/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "hltp/errors.hpp"

namespace hltp {

namespace {

std::vector<double> grid_with_end(const TimeGrid& grid) {
  std::vector<double> t = grid.times();
  t.push_back(grid.period());
  return t;
}

double condition_number(const MatrixXcd& V) {
  MatrixXcd U = V;
  for (Eigen::Index j = 0; j < U.cols(); ++j) U.col(j).normalize();
  Eigen::JacobiSVD<MatrixXcd> svd(U);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

struct ChainRun {
  std::vector<std::vector<VectorXcd>> samples;  // per chain member, grid samples
  std::vector<VectorXcd> end;                   // v_i(T)
};

// Integrates a Jordan chain v_1..v_r jointly: v_1' = (A - lambda) v_1,
// v_i' = (A - lambda) v_i - c v_{i-1}.
ChainRun integrate_chain(const FourierMatrix& A, cdouble lambda, cdouble c,
                         const std::vector<VectorXcd>& init, const TimeGrid& grid,
                         const OdeOptions& opts) {
  const int n = A.rows();
  const int r = static_cast<int>(init.size());
  VectorXcd x0(n * r);
  for (int i = 0; i < r; ++i) x0.segment(i * n, n) = init[i];
  auto rhs = [&](double t, const VectorXcd& x, VectorXcd& dx) {
    const MatrixXcd At = A.evaluate(t);
    dx.resize(x.size());
    for (int i = 0; i < r; ++i) {
      dx.segment(i * n, n) = At * x.segment(i * n, n) - lambda * x.segment(i * n, n);
      if (i > 0) dx.segment(i * n, n) -= c * x.segment((i - 1) * n, n);
    }
  };
  auto xs = integrate(rhs, x0, grid_with_end(grid), opts);
  ChainRun run;
  run.samples.assign(r, std::vector<VectorXcd>(grid.size()));
  for (int s = 0; s < grid.size(); ++s) {
    for (int i = 0; i < r; ++i) run.samples[i][s] = xs[s].segment(i * n, n);
  }
  for (int i = 0; i < r; ++i) run.end.push_back(xs.back().segment(i * n, n));
  return run;
}

FourierMatrix analyze_vector(const std::vector<VectorXcd>& samples, const TimeGrid& grid,
                             int band) {
  std::vector<MatrixXcd> m(samples.begin(), samples.end());
  return analyze(m, grid, band);
}

}  // namespace

Monodromy integrate_transition(const FourierMatrix& A, const TimeGrid& grid,
                               const OdeOptions& opts) {
  if (A.rows() != A.cols()) throw PreconditionError("integrate_transition: A must be square");
  const int n = A.rows();
  VectorXcd x0 = Eigen::Map<const VectorXcd>(MatrixXcd::Identity(n, n).eval().data(), n * n);
  auto rhs = [&](double t, const VectorXcd& x, VectorXcd& dx) {
    Eigen::Map<const MatrixXcd> Phi(x.data(), n, n);
    dx.resize(n * n);
    Eigen::Map<MatrixXcd>(dx.data(), n, n).noalias() = A.evaluate(t) * Phi;
  };
  Monodromy out;
  auto xs = integrate(rhs, x0, grid_with_end(grid), opts, &out.stats);
  out.transition.reserve(grid.size());
  for (int s = 0; s < grid.size(); ++s) {
    out.transition.push_back(Eigen::Map<const MatrixXcd>(xs[s].data(), n, n));
  }
  out.phi_T = Eigen::Map<const MatrixXcd>(xs.back().data(), n, n);
  const cdouble expected = std::exp(A.phasor(0).trace() * A.period());
  // Relative to the Hadamard bound: det Phi(T) can be tiny next to the
  // entries of Phi(T), so dividing by |det| alone measures cancellation.
  double hadamard = 1.0;
  for (int j = 0; j < n; ++j) hadamard *= out.phi_T.col(j).norm();
  out.liouville_error = std::abs(out.phi_T.determinant() - expected) /
                        std::max(std::abs(expected), hadamard);
  if (!(out.liouville_error <= 1e-6)) {
    std::ostringstream os;
    os << "integrate_transition: Liouville determinant check failed (relative error "
       << out.liouville_error << ")";
    throw ConvergenceError(os.str());
  }
  return out;
}

VectorXcd floquet_multipliers(const FourierMatrix& A, const OdeOptions& opts) {
  Monodromy mono = integrate_transition(A, TimeGrid(A.period(), 1), opts);
  return Eigen::ComplexEigenSolver<MatrixXcd>(mono.phi_T, false).eigenvalues();
}

double spectral_radius_of_monodromy(const FourierMatrix& A, const OdeOptions& opts) {
  return floquet_multipliers(A, opts).cwiseAbs().maxCoeff();
}

PeriodicVector periodic_eigenvector(const FourierMatrix& A, cdouble lambda, const VectorXcd& phi,
                                    const TimeGrid& grid, int band_out, double tol,
                                    const std::optional<ChainForcing>& forcing,
                                    const OdeOptions& opts) {
  if (phi.size() != A.rows()) throw PreconditionError("periodic_eigenvector: size mismatch");
  std::vector<VectorXcd> init;
  cdouble c = 0.0;
  if (forcing) {
    init.push_back(forcing->previous_initial);
    c = forcing->coefficient;
  }
  init.push_back(phi);
  ChainRun run = integrate_chain(A, lambda, c, init, grid, opts);
  PeriodicVector out;
  out.samples = run.samples.back();
  out.end_value = run.end.back();
  out.periodicity_error = (out.end_value - phi).norm();
  if (out.periodicity_error > tol * phi.norm()) {
    std::ostringstream os;
    os << "periodic_eigenvector: ||v(T) - v(0)|| = " << out.periodicity_error
       << " exceeds tolerance; wrong branch or misclassified defective multiplier";
    throw PreconditionError(os.str());
  }
  out.v = analyze_vector(out.samples, grid, band_out);
  return out;
}

FloquetFactorization floquet_factorize(const FourierMatrix& A, const FloquetOptions& opts) {
  if (A.rows() != A.cols()) throw PreconditionError("floquet_factorize: A must be square");
  const int n = A.rows();
  const double T = A.period();
  const TimeGrid grid(T, opts.grid_samples);
  const int band = opts.band_out >= 0 ? opts.band_out : opts.grid_samples / 2 - 1;

  FloquetFactorization fac;
  fac.period = T;
  fac.monodromy = integrate_transition(A, grid, opts.ode);
  const MatrixXcd& Phi = fac.monodromy.phi_T;
  if (Phi.fullPivLu().rcond() < 1e-14) {
    throw PreconditionError("floquet_factorize: monodromy matrix is numerically singular");
  }

  Eigen::ComplexEigenSolver<MatrixXcd> es(Phi);
  if (es.info() != Eigen::Success) throw ConvergenceError("floquet_factorize: eigensolver failed");
  const VectorXcd mu = es.eigenvalues();
  const MatrixXcd V = es.eigenvectors();
  fac.eigvec_condition = condition_number(V);

  // Group multipliers closer than cluster_tol (relative).
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double scale = std::max(std::abs(mu(i)), std::abs(mu(j)));
      if (std::abs(mu(i) - mu(j)) <= opts.cluster_tol * scale) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<int>> clusters;
  {
    std::vector<int> root_index(n, -1);
    for (int i = 0; i < n; ++i) {
      const int r = find(i);
      if (root_index[r] < 0) {
        root_index[r] = static_cast<int>(clusters.size());
        clusters.emplace_back();
      }
      clusters[root_index[r]].push_back(i);
    }
  }

  fac.W = FourierMatrix(T, n, n, band);
  MatrixXcd W_end(n, n), W0(n, n);
  fac.Lambda = MatrixXcd::Zero(n, n);
  fac.mu.resize(n);
  fac.lambda.resize(n);
  fac.defective.assign(n, false);
  fac.chain_scale.assign(n, 1.0);

  // Integrating v' = (A - lambda) v forward amplifies errors along the less
  // damped modes by about ||Phi(T)|| / |mu|; the periodicity gate scales with it.
  const double phi_norm = Phi.operatorNorm();
  double worst_excess = 0.0;
  int col = 0;
  auto store = [&](const ChainRun& run, const std::vector<VectorXcd>& init, cdouble m) {
    const double amp = std::max(1.0, phi_norm / std::abs(m));
    fac.periodicity_amplification = std::max(fac.periodicity_amplification, amp);
    const double allowed = std::max(opts.periodicity_tol, 100.0 * opts.ode.rel_tol * amp);
    for (size_t i = 0; i < init.size(); ++i) {
      worst_excess = std::max(worst_excess, (run.end[i] - init[i]).norm() / allowed);
      FourierMatrix v = analyze_vector(run.samples[i], grid, band);
      for (int k = -band; k <= band; ++k) fac.W.phasor(k).col(col + i) = v.phasor(k);
      W_end.col(col + i) = run.end[i];
      W0.col(col + i) = init[i];
      fac.periodicity_error = std::max(fac.periodicity_error, (run.end[i] - init[i]).norm());
    }
  };

  for (const auto& cl : clusters) {
    const int r = static_cast<int>(cl.size());
    bool defective = false;
    if (r > 1) {
      MatrixXcd Vc(n, r);
      for (int i = 0; i < r; ++i) Vc.col(i) = V.col(cl[i]);
      defective = condition_number(Vc) > opts.defect_cond;
    }
    if (!defective) {
      for (int idx : cl) {
        const cdouble m = mu(idx);
        const cdouble lam = std::log(m) / T;
        VectorXcd phi = V.col(idx).normalized();
        ChainRun run = integrate_chain(A, lam, 0.0, {phi}, grid, opts.ode);
        fac.mu(col) = m;
        fac.lambda(col) = lam;
        fac.Lambda(col, col) = lam;
        store(run, {phi}, m);
        ++col;
      }
      continue;
    }

    // Single Jordan chain for the whole cluster.
    cdouble mbar = 0.0;
    for (int idx : cl) mbar += mu(idx);
    mbar /= static_cast<double>(r);
    const cdouble lam = std::log(mbar) / T;
    const cdouble c = 1.0 / (T * mbar);
    const MatrixXcd N = Phi - mbar * MatrixXcd::Identity(n, n);
    MatrixXcd Nr = MatrixXcd::Identity(n, n), Nr1;
    for (int i = 0; i < r; ++i) {
      if (i == r - 1) Nr1 = Nr;
      Nr = N * Nr;
    }
    Eigen::JacobiSVD<MatrixXcd> svdr(Nr, Eigen::ComputeFullV);
    const MatrixXcd Z = svdr.matrixV().rightCols(r);
    Eigen::JacobiSVD<MatrixXcd> svdt(Nr1 * Z, Eigen::ComputeFullV);
    const VectorXcd top = Z * svdt.matrixV().col(0);
    MatrixXcd G(n, r);
    VectorXcd g = top;
    for (int i = r - 1; i >= 0; --i) {
      G.col(i) = g;
      g = N * g;
    }
    // E = mbar * exp(S / mbar) is the monodromy of the chain block; express
    // Phi's Jordan basis G in the basis that conjugates E to mbar + S.
    MatrixXcd S = MatrixXcd::Zero(r, r);
    for (int i = 0; i + 1 < r; ++i) S(i, i + 1) = 1.0;
    MatrixXcd E = MatrixXcd::Zero(r, r), term = MatrixXcd::Identity(r, r);
    for (int k = 0; k < r; ++k) {
      E += term;
      term = term * S / (mbar * static_cast<double>(k + 1));
    }
    E *= mbar;
    const MatrixXcd NE = E - mbar * MatrixXcd::Identity(r, r);
    MatrixXcd X(r, r);
    VectorXcd e = VectorXcd::Unit(r, r - 1);
    for (int i = r - 1; i >= 0; --i) {
      X.col(i) = e;
      e = NE * e;
    }
    MatrixXcd chain = G * X.inverse();
    double scale = 0.0;
    for (int i = 0; i < r; ++i) scale = std::max(scale, chain.col(i).norm());
    chain /= scale;
    std::vector<VectorXcd> init;
    for (int i = 0; i < r; ++i) init.push_back(chain.col(i));
    ChainRun run = integrate_chain(A, lam, c, init, grid, opts.ode);
    for (int i = 0; i < r; ++i) {
      fac.mu(col + i) = mbar;
      fac.lambda(col + i) = lam;
      fac.Lambda(col + i, col + i) = lam;
      if (i + 1 < r) fac.Lambda(col + i, col + i + 1) = c;
      fac.defective[col + i] = true;
      fac.chain_scale[col + i] = 1.0 / scale;
    }
    store(run, init, mbar);
    col += r;
  }

  fac.defective_suspect = condition_number(W0) > opts.suspect_cond;
  if (worst_excess > 1.0) {
    std::ostringstream os;
    os << "floquet_factorize: periodic eigenvector check failed, ||v(T) - v(0)|| = "
       << fac.periodicity_error << " (amplification " << fac.periodicity_amplification << ")";
    throw PreconditionError(os.str());
  }

  const MatrixXcd expLT = (fac.Lambda * T).exp();
  fac.floquet_identity = (expLT - W_end.inverse() * Phi * W_end).norm();

  fac.W_inv = invert_pointwise(fac.W, band).inverse;

  const FourierMatrix dW = fac.W.derivative();
  const FourierMatrix dWi = fac.W_inv.derivative();
  for (int s = 0; s < grid.size(); ++s) {
    const double t = grid.time(s);
    const MatrixXcd At = A.evaluate(t);
    const MatrixXcd Wt = fac.W.evaluate(t);
    const MatrixXcd Wit = fac.W_inv.evaluate(t);
    fac.residual_dW =
        std::max(fac.residual_dW, (dW.evaluate(t) - At * Wt + Wt * fac.Lambda).norm());
    fac.residual_dWinv =
        std::max(fac.residual_dWinv, (dWi.evaluate(t) + Wit * At - fac.Lambda * Wit).norm());
  }
  return fac;
}

HarmonicSpectrum HarmonicSpectrum::from(const FloquetFactorization& fac) {
  return HarmonicSpectrum(fac.lambda, 2.0 * std::acos(-1.0) / fac.period);
}

std::vector<cdouble> HarmonicSpectrum::values(int window) const {
  std::vector<cdouble> out;
  for (Eigen::Index p = 0; p < base_.size(); ++p) {
    for (int k = -window; k <= window; ++k) out.push_back(base_(p) + cdouble(0.0, omega_ * k));
  }
  return out;
}

bool HarmonicSpectrum::is_hurwitz() const {
  for (Eigen::Index p = 0; p < base_.size(); ++p) {
    if (!(base_(p).real() < 0.0)) return false;
  }
  return true;
}

double HarmonicSpectrum::sigma_plus() const {
  double best = 0.0;
  for (Eigen::Index p = 0; p < base_.size(); ++p) {
    const double k0 = std::round(-base_(p).imag() / omega_);
    for (double k = k0 - 1; k <= k0 + 1; k += 1.0) {
      const double d = std::abs(base_(p) + cdouble(0.0, omega_ * k));
      if (d == 0.0) return std::numeric_limits<double>::infinity();
      best = std::max(best, 1.0 / d);
    }
  }
  return best;
}

bool HarmonicSpectrum::is_invertible(double tol) const {
  const double s = sigma_plus();
  return std::isfinite(s) && 1.0 / s > tol;
}

}  // namespace hltp
