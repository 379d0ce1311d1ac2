#pragma once

#include <vector>

#include "hltp/floquet.hpp"
#include "hltp/toeplitz.hpp"

namespace hltp {

struct TruncatedSpectrum {
  int m = 0;
  VectorXcd eigs;
  MatrixXcd vecs;
};

// Full eigendecomposition of A_m - N_m.
TruncatedSpectrum truncated_spectrum(const FourierMatrix& A, int m, bool vectors = false);

enum class SpectrumClass { Lambda1, Lambda2Plus, Lambda2Minus };

struct SpectrumClassification {
  int m = 0;
  VectorXcd eigs;
  std::vector<SpectrumClass> cls;     // per eigenvalue
  std::vector<int> matched_p;         // exact base index, -1 if unmatched
  std::vector<int> matched_k;         // exact lattice shift
  std::vector<double> distance;       // |eig - (lambda_p + j omega k)| of the assigned point
  std::vector<double> residuals;      // finite-section residual of the assigned exact eigenvector (NaN if none)
  std::vector<cdouble> lambda1, lambda2_plus, lambda2_minus;
  std::vector<int> borderline;        // indices in Lambda1 at tol but not at tol/10
  double tol = 0.0;
  int j0 = 0;                         // m + 1 - largest k with every |k'| <= k resolved
  bool truncation_is_hurwitz = false;
  bool exact_is_hurwitz = false;
};

struct ClassifyOptions {
  double tol = -1.0;          // <0: 10 x median distance of the inner half, floor 1e-6
  double floor = 1e-6;
};

// Greedy nearest-neighbour matching of the truncated eigenvalues to the
// exact lattice {lambda_p + j omega k}; unmatched values split by sign of
// the imaginary part. When fac is given, residuals of the shifted exact
// eigenvectors are computed on the truncated operator.
SpectrumClassification classify(const VectorXcd& eigs, int m, const HarmonicSpectrum& exact,
                                const ClassifyOptions& opts = {},
                                const FourierMatrix* A = nullptr,
                                const FloquetFactorization* fac = nullptr);

// Matching of Lambda2+(m) shifted by j omega onto Lambda2+(m+1); returns the
// worst elementwise distance. When the sizes differ the smaller set is
// matched into the larger one; infinity if exactly one set is empty.
double shift_distance(const std::vector<cdouble>& at_m, const std::vector<cdouble>& at_m1,
                      double omega);

struct InverseBound {
  int m = 0;
  double value = 0.0;     // ||(A_m - N_m)^{-1}||_2, infinity if singular
  bool singular = false;
};

std::vector<InverseBound> uniform_inverse_bound(const FourierMatrix& A,
                                                const std::vector<int>& m_list);

}  // namespace hltp
