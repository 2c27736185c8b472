#pragma once

// Training/test data synthesis for the regressor families studied here, plus
// column partitioning, random Fourier features and CSV export of datasets.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fpcocoa/numkern.hpp"
#include "fpcocoa/rng.hpp"

namespace fpcocoa {

/// Column split {p_1, ..., p_K} of the model over K nodes.
class PartitionSpec {
 public:
  PartitionSpec() = default;
  /// Throws InvalidPartition on an empty list or a non-positive size.
  explicit PartitionSpec(std::vector<int> sizes);

  /// p1 on the first node, the remaining p - p1 columns split as evenly as
  /// possible over the other K - 1 nodes (earlier nodes get the remainder).
  static PartitionSpec firstNodeSweep(int p, int K, int p1);
  static PartitionSpec even(int p, int K);

  const std::vector<int>& sizes() const { return sizes_; }
  int nodes() const { return static_cast<int>(sizes_.size()); }
  int total() const;
  int offset(int k) const;
  int size(int k) const { return sizes_.at(static_cast<std::size_t>(k)); }

  /// Throws InvalidPartition unless the sizes sum to `columns`.
  void requireTotal(int columns) const;

  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;

 private:
  std::vector<int> sizes_;
};

namespace datagen {

struct IsoGaussian {
  int dimension;
};
struct CorrGaussian {
  Matrix covariance;
  Matrix covarianceSqrt;  // symmetric square root
};
struct Bernoulli {
  int dimension;
};
struct Empirical {
  Matrix rows;
};

/// Distribution of one regressor row a_i.
class RegressorModel {
 public:
  static RegressorModel isoGaussian(int p);
  /// Throws InvalidInput unless `covariance` is symmetric positive definite.
  static RegressorModel corrGaussian(const Matrix& covariance);
  static RegressorModel bernoulli(int p);
  static RegressorModel empirical(Matrix rows);

  int dimension() const;
  /// Population covariance; for Empirical the second-moment matrix of the rows.
  Matrix covariance() const;
  std::string name() const;

  const std::variant<IsoGaussian, CorrGaussian, Bernoulli, Empirical>& variant() const {
    return model_;
  }

 private:
  explicit RegressorModel(std::variant<IsoGaussian, CorrGaussian, Bernoulli, Empirical> m)
      : model_(std::move(m)) {}
  std::variant<IsoGaussian, CorrGaussian, Bernoulli, Empirical> model_;
};

/// y = A x + w with Gaussian i.i.d. noise of the given variance.
struct TrainingSet {
  Matrix regressors;
  Vector observations;
  Vector groundTruth;
  Vector noise;
  double noiseVariance = 0.0;
};

/// Sigma = U diag(mu) U^T with U Haar, mu geometric with ratio `decayRatio`,
/// normalized so trace(Sigma) = p.
Matrix buildPaperCovariance(int p, double decayRatio, SeedStream& rng);

/// Eigenvalues used by buildPaperCovariance, descending.
Vector geometricSpectrum(int p, double decayRatio);

/// n i.i.d. rows. Empirical models subsample uniformly without replacement
/// (original row order kept); n equal to the row count returns the rows as-is.
Matrix sampleRegressors(const RegressorModel& model, int n, SeedStream& rng);

/// i.i.d. uniform entries on [-1, 1], scaled to unit Euclidean norm.
Vector sampleGroundTruth(int p, SeedStream& rng);

TrainingSet synthesize(const RegressorModel& model, const Vector& groundTruth, int n,
                       double noiseVariance, SeedStream& rng);

std::vector<Matrix> partitionColumns(const Matrix& a, const PartitionSpec& spec);

/// Per-node slices of a vector partitioned like the columns.
std::vector<Vector> partitionVector(const Vector& v, const PartitionSpec& spec);

/// Frequencies omega_j ~ N(0, zeta^2 I), one row per output feature.
Matrix sampleFrequencies(int features, int inputDim, double zeta, SeedStream& rng);

/// a_j = cos(z^T omega_j) where omega_j is row j of `frequencies`.
Vector randomFourierFeatures(const Vector& z, const Matrix& frequencies);

/// Row-wise feature map of every row of `inputs`.
Matrix randomFourierFeatureRows(const Matrix& inputs, const Matrix& frequencies);

/// CSV with header `row_index,col_index,value`, one line per entry.
void exportMatrixCsv(const Matrix& m, const std::string& path);
Matrix importMatrixCsv(const std::string& path);

}  // namespace datagen
}  // namespace fpcocoa
