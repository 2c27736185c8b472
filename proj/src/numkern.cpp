#include "fpcocoa/numkern.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpcocoa/errors.hpp"

namespace fpcocoa::numkern {

void requireFinite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": matrix contains non-finite entries");
  }
}

SvdFactorization svd(const Matrix& m) {
  requireFinite(m, "svd");
  if (m.size() == 0) {
    return {Matrix(m.rows(), 0), Vector(0), Matrix(m.cols(), 0)};
  }
  // JacobiSVD: the divide-and-conquer solver in Eigen 3.4.0 returns wrong
  // values (and can assert) on matrices with clustered singular values.
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

Vector singularValues(const Matrix& m) {
  requireFinite(m, "singularValues");
  if (m.size() == 0) return Vector(0);
  return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

namespace {

double cutoff(const Vector& s, Eigen::Index rows, Eigen::Index cols, double tol) {
  const double smax = s.size() > 0 ? s(0) : 0.0;
  return tol * smax * static_cast<double>(std::max(rows, cols));
}

}  // namespace

Matrix pseudoinverse(const Matrix& m, double tol) {
  if (!(tol >= 0.0)) throw InvalidInput("pseudoinverse: tol must be >= 0");
  const SvdFactorization f = svd(m);
  const double cut = cutoff(f.singularValues, m.rows(), m.cols(), tol);
  Vector inv = Vector::Zero(f.singularValues.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    const double s = f.singularValues(i);
    if (s > cut && s > 0.0) inv(i) = 1.0 / s;
  }
  return f.rightVectors * inv.asDiagonal() * f.leftVectors.transpose();
}

double spectralNorm(const Matrix& m) {
  const Vector s = singularValues(m);
  return s.size() > 0 ? s(0) : 0.0;
}

double minNonzeroSingular(const Matrix& m, double tol) {
  const Vector s = singularValues(m);
  const double cut = cutoff(s, m.rows(), m.cols(), tol);
  for (Eigen::Index i = s.size() - 1; i >= 0; --i) {
    if (s(i) > cut && s(i) > 0.0) return s(i);
  }
  throw NoNonzeroSingularValue("minNonzeroSingular: matrix has no singular value above cutoff");
}

Matrix gaussianMatrix(int rows, int cols, SeedStream& rng) {
  Matrix z(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) z(i, j) = rng.normal();
  }
  return z;
}

Matrix sampleHaarOrthogonal(int p, SeedStream& rng) {
  if (p < 1) throw InvalidInput("sampleHaarOrthogonal: p must be >= 1");
  const Matrix z = gaussianMatrix(p, p, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

bool isSymmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

Matrix symmetricSqrt(const Matrix& spd) {
  requireFinite(spd, "symmetricSqrt");
  if (!isSymmetric(spd)) throw InvalidInput("symmetricSqrt: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spd);
  Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace fpcocoa::numkern
