#include "fpcocoa/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fpcocoa/csv.hpp"
#include "fpcocoa/errors.hpp"

namespace fpcocoa {

PartitionSpec::PartitionSpec(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw InvalidPartition("partition: at least one node required");
  for (int s : sizes_) {
    if (s < 1) throw InvalidPartition("partition: every node needs at least one column");
  }
}

PartitionSpec PartitionSpec::firstNodeSweep(int p, int K, int p1) {
  if (K < 1) throw InvalidPartition("partition: K must be >= 1");
  if (K == 1) {
    if (p1 != p) throw InvalidPartition("partition: with K=1, p1 must equal p");
    return PartitionSpec({p});
  }
  const int rest = p - p1;
  if (p1 < 1 || rest < K - 1) {
    throw InvalidPartition("partition: p1=" + std::to_string(p1) + " leaves too few columns");
  }
  std::vector<int> sizes{p1};
  const int others = K - 1;
  for (int k = 0; k < others; ++k) sizes.push_back(rest / others + (k < rest % others ? 1 : 0));
  return PartitionSpec(std::move(sizes));
}

PartitionSpec PartitionSpec::even(int p, int K) {
  if (K < 1 || p < K) throw InvalidPartition("partition: need 1 <= K <= p");
  std::vector<int> sizes;
  for (int k = 0; k < K; ++k) sizes.push_back(p / K + (k < p % K ? 1 : 0));
  return PartitionSpec(std::move(sizes));
}

int PartitionSpec::total() const { return std::accumulate(sizes_.begin(), sizes_.end(), 0); }

int PartitionSpec::offset(int k) const {
  return std::accumulate(sizes_.begin(), sizes_.begin() + k, 0);
}

void PartitionSpec::requireTotal(int columns) const {
  if (sizes_.empty()) throw InvalidPartition("partition: empty");
  if (total() != columns) {
    throw InvalidPartition("partition: sizes sum to " + std::to_string(total()) + " but there are " +
                           std::to_string(columns) + " columns");
  }
}

namespace datagen {

RegressorModel RegressorModel::isoGaussian(int p) {
  if (p < 1) throw InvalidInput("isoGaussian: p must be >= 1");
  return RegressorModel(IsoGaussian{p});
}

RegressorModel RegressorModel::corrGaussian(const Matrix& covariance) {
  numkern::requireFinite(covariance, "corrGaussian");
  if (!numkern::isSymmetric(covariance)) throw InvalidInput("corrGaussian: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance);
  if (eig.eigenvalues().minCoeff() <= 1e-10) {
    throw InvalidInput("corrGaussian: covariance not positive definite");
  }
  return RegressorModel(CorrGaussian{covariance, numkern::symmetricSqrt(covariance)});
}

RegressorModel RegressorModel::bernoulli(int p) {
  if (p < 1) throw InvalidInput("bernoulli: p must be >= 1");
  return RegressorModel(Bernoulli{p});
}

RegressorModel RegressorModel::empirical(Matrix rows) {
  numkern::requireFinite(rows, "empirical");
  if (rows.rows() < 1 || rows.cols() < 1) throw InvalidInput("empirical: no rows");
  return RegressorModel(Empirical{std::move(rows)});
}

int RegressorModel::dimension() const {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CorrGaussian>) {
          return static_cast<int>(m.covariance.rows());
        } else if constexpr (std::is_same_v<T, Empirical>) {
          return static_cast<int>(m.rows.cols());
        } else {
          return m.dimension;
        }
      },
      model_);
}

Matrix RegressorModel::covariance() const {
  if (const auto* c = std::get_if<CorrGaussian>(&model_)) return c->covariance;
  if (const auto* e = std::get_if<Empirical>(&model_)) {
    return e->rows.transpose() * e->rows / static_cast<double>(e->rows.rows());
  }
  return Matrix::Identity(dimension(), dimension());
}

std::string RegressorModel::name() const {
  switch (model_.index()) {
    case 0: return "iso-gaussian";
    case 1: return "corr-gaussian";
    case 2: return "bernoulli";
    default: return "empirical";
  }
}

Vector geometricSpectrum(int p, double decayRatio) {
  if (p < 1) throw InvalidInput("geometricSpectrum: p must be >= 1");
  if (!(decayRatio > 0.0 && decayRatio <= 1.0)) {
    throw InvalidInput("geometricSpectrum: decay ratio must be in (0, 1]");
  }
  Vector mu(p);
  double v = 1.0;
  for (int i = 0; i < p; ++i) {
    mu(i) = v;
    v *= decayRatio;
  }
  return mu * (static_cast<double>(p) / mu.sum());
}

Matrix buildPaperCovariance(int p, double decayRatio, SeedStream& rng) {
  const Vector mu = geometricSpectrum(p, decayRatio);
  const Matrix u = numkern::sampleHaarOrthogonal(p, rng);
  Matrix sigma = u * mu.asDiagonal() * u.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

Matrix sampleRegressors(const RegressorModel& model, int n, SeedStream& rng) {
  if (n < 1) throw InvalidInput("sampleRegressors: n must be >= 1");
  const int p = model.dimension();
  return std::visit(
      [&](const auto& m) -> Matrix {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsoGaussian>) {
          return numkern::gaussianMatrix(n, p, rng);
        } else if constexpr (std::is_same_v<T, CorrGaussian>) {
          return numkern::gaussianMatrix(n, p, rng) * m.covarianceSqrt;
        } else if constexpr (std::is_same_v<T, Bernoulli>) {
          Matrix a(n, p);
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) a(i, j) = rng.coin() ? 1.0 : -1.0;
          }
          return a;
        } else {
          const auto available = static_cast<int>(m.rows.rows());
          if (available < n) {
            throw InsufficientData("sampleRegressors: empirical model has " +
                                   std::to_string(available) + " rows, " + std::to_string(n) +
                                   " requested");
          }
          if (available == n) return m.rows;
          std::vector<int> idx(static_cast<std::size_t>(available));
          std::iota(idx.begin(), idx.end(), 0);
          // Partial Fisher-Yates with an explicit uniform draw so the subset
          // does not depend on the standard library's shuffle.
          for (int i = 0; i < n; ++i) {
            const auto span = static_cast<std::uint64_t>(available - i);
            const int j = i + static_cast<int>(rng.next() % span);
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
          }
          std::sort(idx.begin(), idx.begin() + n);
          Matrix a(n, p);
          for (int i = 0; i < n; ++i) a.row(i) = m.rows.row(idx[static_cast<std::size_t>(i)]);
          return a;
        }
      },
      model.variant());
}

Vector sampleGroundTruth(int p, SeedStream& rng) {
  if (p < 1) throw InvalidInput("sampleGroundTruth: p must be >= 1");
  Vector x(p);
  do {
    for (int i = 0; i < p; ++i) x(i) = rng.uniform(-1.0, 1.0);
  } while (x.norm() == 0.0);
  return x / x.norm();
}

TrainingSet synthesize(const RegressorModel& model, const Vector& groundTruth, int n,
                       double noiseVariance, SeedStream& rng) {
  if (groundTruth.size() != model.dimension()) {
    throw InvalidInput("synthesize: ground truth has length " + std::to_string(groundTruth.size()) +
                       ", model dimension is " + std::to_string(model.dimension()));
  }
  if (!(noiseVariance >= 0.0)) throw InvalidInput("synthesize: noise variance must be >= 0");
  TrainingSet set;
  set.regressors = sampleRegressors(model, n, rng);
  set.groundTruth = groundTruth;
  set.noiseVariance = noiseVariance;
  set.noise = Vector::Zero(n);
  if (noiseVariance > 0.0) {
    const double sd = std::sqrt(noiseVariance);
    for (int i = 0; i < n; ++i) set.noise(i) = sd * rng.normal();
  }
  set.observations = set.regressors * groundTruth + set.noise;
  return set;
}

std::vector<Matrix> partitionColumns(const Matrix& a, const PartitionSpec& spec) {
  spec.requireTotal(static_cast<int>(a.cols()));
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<std::size_t>(spec.nodes()));
  int offset = 0;
  for (int s : spec.sizes()) {
    blocks.emplace_back(a.middleCols(offset, s));
    offset += s;
  }
  return blocks;
}

std::vector<Vector> partitionVector(const Vector& v, const PartitionSpec& spec) {
  spec.requireTotal(static_cast<int>(v.size()));
  std::vector<Vector> parts;
  int offset = 0;
  for (int s : spec.sizes()) {
    parts.emplace_back(v.segment(offset, s));
    offset += s;
  }
  return parts;
}

Matrix sampleFrequencies(int features, int inputDim, double zeta, SeedStream& rng) {
  if (features < 1 || inputDim < 1) throw InvalidInput("sampleFrequencies: empty shape");
  if (!(zeta >= 0.0)) throw InvalidInput("sampleFrequencies: zeta must be >= 0");
  return zeta * numkern::gaussianMatrix(features, inputDim, rng);
}

Vector randomFourierFeatures(const Vector& z, const Matrix& frequencies) {
  if (frequencies.cols() != z.size()) {
    throw InvalidInput("randomFourierFeatures: frequencies have " +
                       std::to_string(frequencies.cols()) + " columns, input has length " +
                       std::to_string(z.size()));
  }
  return (frequencies * z).array().cos().matrix();
}

Matrix randomFourierFeatureRows(const Matrix& inputs, const Matrix& frequencies) {
  if (frequencies.cols() != inputs.cols()) {
    throw InvalidInput("randomFourierFeatureRows: dimension mismatch");
  }
  return (inputs * frequencies.transpose()).array().cos().matrix();
}

void exportMatrixCsv(const Matrix& m, const std::string& path) {
  std::string out = "row_index,col_index,value\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out += std::to_string(i) + ',' + std::to_string(j) + ',' + csv::formatNumber(m(i, j)) + '\n';
    }
  }
  csv::writeFile(path, out);
}

Matrix importMatrixCsv(const std::string& path) {
  const auto rows = csv::parse(csv::readFile(path));
  if (rows.empty() || rows[0] != std::vector<std::string>{"row_index", "col_index", "value"}) {
    throw FormatError(path + ": expected header row_index,col_index,value");
  }
  Eigen::Index nr = 0, nc = 0;
  std::vector<std::tuple<long, long, double>> entries;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() == 1 && rows[r][0].empty()) continue;
    if (rows[r].size() != 3) throw FormatError(path + ": line " + std::to_string(r + 1) + " needs 3 fields");
    long i = 0;
    long j = 0;
    try {
      i = std::stol(rows[r][0]);
      j = std::stol(rows[r][1]);
    } catch (const std::exception&) {
      throw FormatError(path + ": line " + std::to_string(r + 1) + " has a non-integer index");
    }
    if (i < 0 || j < 0) throw FormatError(path + ": negative index");
    entries.emplace_back(i, j, csv::parseNumber(rows[r][2]));
    nr = std::max<Eigen::Index>(nr, i + 1);
    nc = std::max<Eigen::Index>(nc, j + 1);
  }
  if (static_cast<Eigen::Index>(entries.size()) != nr * nc) {
    throw FormatError(path + ": matrix entries missing or duplicated");
  }
  Matrix m = Matrix::Constant(nr, nc, std::numeric_limits<double>::quiet_NaN());
  for (const auto& [i, j, v] : entries) m(i, j) = v;
  if (m.hasNaN()) throw FormatError(path + ": matrix entries missing or duplicated");
  return m;
}

}  // namespace datagen
}  // namespace fpcocoa
