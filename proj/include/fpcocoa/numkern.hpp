#pragma once

// Dense linear-algebra kernels shared by every other module. All functions
// are pure; randomness only enters through an explicit SeedStream.

#include <Eigen/Dense>

#include "fpcocoa/rng.hpp"

namespace fpcocoa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace numkern {

/// Default relative cutoff for pseudoinverse / rank decisions.
inline constexpr double kDefaultRankTol = 1e-12;

/// Thin SVD M = U diag(s) V^T with s sorted descending; r = min(rows, cols).
struct SvdFactorization {
  Matrix leftVectors;   // rows x r
  Vector singularValues;
  Matrix rightVectors;  // cols x r
};

/// Throws InvalidInput if any entry is NaN or infinite.
void requireFinite(const Matrix& m, const char* what);

SvdFactorization svd(const Matrix& m);

/// Singular values only, descending.
Vector singularValues(const Matrix& m);

/// Moore-Penrose pseudoinverse. Singular values at or below
/// tol * sigma_max * max(rows, cols) are treated as zero.
Matrix pseudoinverse(const Matrix& m, double tol = kDefaultRankTol);

double spectralNorm(const Matrix& m);

/// Smallest singular value above the pseudoinverse cutoff (sigma_min+).
/// Throws NoNonzeroSingularValue for a numerically zero matrix.
double minNonzeroSingular(const Matrix& m, double tol = kDefaultRankTol);

/// p x p orthogonal matrix distributed by the Haar measure: QR of a standard
/// Gaussian matrix with the columns of Q sign-corrected by diag(R).
Matrix sampleHaarOrthogonal(int p, SeedStream& rng);

/// Symmetric square root of a symmetric positive semidefinite matrix.
Matrix symmetricSqrt(const Matrix& spd);

bool isSymmetric(const Matrix& m, double tol = 1e-10);

/// Standard normal matrix with entries drawn row by row.
Matrix gaussianMatrix(int rows, int cols, SeedStream& rng);

}  // namespace numkern
}  // namespace fpcocoa
