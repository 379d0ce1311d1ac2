#include "hltp/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "hltp/errors.hpp"

namespace hltp {

TruncatedSpectrum truncated_spectrum(const FourierMatrix& A, int m, bool vectors) {
  HarmonicOperator H(A, m);
  Eigen::ComplexEigenSolver<MatrixXcd> es(H.dense(), vectors);
  if (es.info() != Eigen::Success) throw ConvergenceError("truncated_spectrum: eigensolver failed");
  TruncatedSpectrum out;
  out.m = m;
  out.eigs = es.eigenvalues();
  if (vectors) out.vecs = es.eigenvectors();
  return out;
}

namespace {

struct Pair {
  double d;
  int a, b;
};

// Greedy one-to-one assignment by increasing distance.
std::vector<int> greedy_assign(const std::vector<cdouble>& from, const std::vector<cdouble>& to,
                               std::vector<double>* dist) {
  std::vector<Pair> pairs;
  pairs.reserve(from.size() * to.size());
  for (int a = 0; a < static_cast<int>(from.size()); ++a) {
    for (int b = 0; b < static_cast<int>(to.size()); ++b) {
      pairs.push_back({std::abs(from[a] - to[b]), a, b});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return std::tie(x.d, x.a, x.b) < std::tie(y.d, y.a, y.b);
  });
  std::vector<int> assign(from.size(), -1);
  std::vector<bool> used(to.size(), false);
  if (dist) dist->assign(from.size(), std::numeric_limits<double>::infinity());
  for (const Pair& p : pairs) {
    if (assign[p.a] >= 0 || used[p.b]) continue;
    assign[p.a] = p.b;
    used[p.b] = true;
    if (dist) (*dist)[p.a] = p.d;
  }
  return assign;
}

}  // namespace

SpectrumClassification classify(const VectorXcd& eigs, int m, const HarmonicSpectrum& exact,
                                const ClassifyOptions& opts, const FourierMatrix* A,
                                const FloquetFactorization* fac) {
  const int n = static_cast<int>(exact.base().size());
  const int w = 2 * m + 1;
  SpectrumClassification out;
  out.m = m;
  out.eigs = eigs;
  std::vector<cdouble> computed(eigs.data(), eigs.data() + eigs.size());
  std::vector<cdouble> lattice = exact.values(m);  // index p*w + (k+m)
  std::vector<double> dist;
  std::vector<int> assign = greedy_assign(computed, lattice, &dist);

  const int N = static_cast<int>(computed.size());
  out.matched_p.assign(N, -1);
  out.matched_k.assign(N, 0);
  out.distance = dist;
  for (int i = 0; i < N; ++i) {
    if (assign[i] < 0) continue;
    out.matched_p[i] = assign[i] / w;
    out.matched_k[i] = assign[i] % w - m;
  }

  if (opts.tol > 0.0) {
    out.tol = opts.tol;
  } else {
    std::vector<double> inner;
    for (int i = 0; i < N; ++i) {
      if (assign[i] >= 0 && 2 * std::abs(out.matched_k[i]) <= m) inner.push_back(dist[i]);
    }
    double med = 0.0;
    if (!inner.empty()) {
      std::nth_element(inner.begin(), inner.begin() + inner.size() / 2, inner.end());
      med = inner[inner.size() / 2];
    }
    out.tol = std::max(opts.floor, 10.0 * med);
  }

  out.cls.resize(N);
  std::vector<bool> resolved(lattice.size(), false);
  for (int i = 0; i < N; ++i) {
    if (assign[i] >= 0 && dist[i] <= out.tol) {
      out.cls[i] = SpectrumClass::Lambda1;
      out.lambda1.push_back(computed[i]);
      resolved[assign[i]] = true;
      if (dist[i] > out.tol / 10.0) out.borderline.push_back(i);
    } else if (computed[i].imag() > 0.0) {
      out.cls[i] = SpectrumClass::Lambda2Plus;
      out.lambda2_plus.push_back(computed[i]);
    } else {
      out.cls[i] = SpectrumClass::Lambda2Minus;
      out.lambda2_minus.push_back(computed[i]);
    }
  }

  int kmax = -1;
  for (int k = 0; k <= m; ++k) {
    bool all = true;
    for (int p = 0; p < n && all; ++p) {
      all = resolved[p * w + k + m] && resolved[p * w - k + m];
    }
    if (!all) break;
    kmax = k;
  }
  out.j0 = m + 1 - kmax;

  out.truncation_is_hurwitz = true;
  for (const cdouble& e : computed) {
    if (!(e.real() < 0.0)) out.truncation_is_hurwitz = false;
  }
  out.exact_is_hurwitz = exact.is_hurwitz();

  out.residuals.assign(N, std::numeric_limits<double>::quiet_NaN());
  if (A && fac) {
    const MatrixXcd H = HarmonicOperator(*A, m).dense();
    for (int i = 0; i < N; ++i) {
      if (out.matched_p[i] < 0) continue;
      const int p = out.matched_p[i], k = out.matched_k[i];
      VectorXcd x(A->rows() * w);
      for (int r = 0; r < A->rows(); ++r) {
        for (int l = -m; l <= m; ++l) x(r * w + l + m) = fac->W.coeff(r, p, l + k);
      }
      const double nx = x.norm();
      if (nx == 0.0) continue;
      const cdouble lam = lattice[p * w + k + m];
      out.residuals[i] = (H * x - lam * x).norm() / nx;
    }
  }
  return out;
}

double shift_distance(const std::vector<cdouble>& at_m, const std::vector<cdouble>& at_m1,
                      double omega) {
  if (at_m.empty() || at_m1.empty()) {
    return at_m.size() == at_m1.size() ? 0.0 : std::numeric_limits<double>::infinity();
  }
  std::vector<cdouble> shifted;
  for (const cdouble& z : at_m) shifted.push_back(z + cdouble(0.0, omega));
  // The classification tolerance is chosen per m, so a few boundary values
  // can sit in Lambda1 at one m and in Lambda2+ at the next.
  std::vector<double> dist;
  if (shifted.size() <= at_m1.size()) {
    greedy_assign(shifted, at_m1, &dist);
  } else {
    greedy_assign(at_m1, shifted, &dist);
  }
  double worst = 0.0;
  for (double d : dist) worst = std::max(worst, d);
  return worst;
}

std::vector<InverseBound> uniform_inverse_bound(const FourierMatrix& A,
                                                const std::vector<int>& m_list) {
  std::vector<InverseBound> out;
  for (int m : m_list) {
    InverseBound b;
    b.m = m;
    const auto s = Eigen::BDCSVD<MatrixXcd>(HarmonicOperator(A, m).dense()).singularValues();
    const double smin = s(s.size() - 1);
    b.singular = smin <= 1e-14 * s(0);
    b.value = b.singular ? std::numeric_limits<double>::infinity() : 1.0 / smin;
    out.push_back(b);
  }
  return out;
}

}  // namespace hltp
