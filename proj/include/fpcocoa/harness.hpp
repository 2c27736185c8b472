#pragma once

// Seeded Monte Carlo experiment engine: one entry point per study, trials
// run in parallel with per-trial child seeds and reduce in trial order, so a
// plan and its master seed always produce the same table.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fpcocoa/config.hpp"
#include "fpcocoa/datagen.hpp"
#include "fpcocoa/numkern.hpp"
#include "fpcocoa/parallel.hpp"
#include "fpcocoa/theory.hpp"

namespace fpcocoa::harness {

enum class Study {
  PartitionSweep,
  SpectralStudy,
  ConvergenceStudy,
  NoiseStudy,
  RegularizationStudy,
  HyperparamStudy,
  McAverageCheck,
  BoundCoverage,
};

enum class DataModel { IsoGaussian, CorrGaussian, Bernoulli, RandomFeatures };

enum class BoundKind {
  IsoGaussian,      // general isotropic Gaussian bound
  IsoGaussianTall,  // tall-only isotropic
  CorrGaussian,
  CorrGaussianTall,
  SubGaussian,
  SubGaussianTall,
  TracyWidom,  // single-matrix singular value interval
};

std::string toString(Study s);
std::string toString(DataModel m);
std::string toString(BoundKind b);
/// Throw InvalidInput on an unknown name.
Study parseStudy(const std::string& s);
DataModel parseDataModel(const std::string& s);
BoundKind parseBoundKind(const std::string& s);

struct ExperimentPlan {
  Study study = Study::PartitionSweep;
  DataModel model = DataModel::IsoGaussian;
  int n = 75;
  int p = 200;
  int K = 2;
  /// First-node sizes to sweep; empty means every admissible p1.
  std::vector<int> p1Values;
  /// Explicit partition for the fixed-partition studies (mc-average,
  /// bound-coverage, spectral); overrides p1Values there when set.
  std::vector<int> partition;
  std::vector<double> noiseVariances{0.0};
  std::vector<double> lambdas{0.0};
  /// Local penalties; empty means {aggregation * K}.
  std::vector<double> subproblems;
  double aggregation = 1.0;
  int iterations = 1000;  // T
  int trials = 100;       // N
  int testRows = 0;       // n-bar; 0 means 100 n
  std::uint64_t masterSeed = 0;
  int workers = 1;  // 1 serial, 0 OpenMP default
  /// Record every iteration (convergence, hyperparameter, regularization traces).
  bool trace = false;
  /// Eigenvalue decay ratio of the correlated covariance.
  double covarianceDecay = 0.9631;
  /// Relative distance to the fixed point that counts as converged.
  double tolerance = 1e-6;
  int mcBlocks = 50;  // median-of-means blocks
  /// Rescale the ground truth so every block has ||x_k||^2 = 1/K (mc-average).
  bool equalBlockNorms = false;

  // Bound coverage.
  BoundKind bound = BoundKind::IsoGaussian;
  std::vector<double> q;
  std::vector<double> qBar;
  double C = 1.0;
  std::vector<double> L;
  theory::EllForm ellForm = theory::EllForm::Scaled;

  // Random features.
  int rfInputDim = 784;
  double rfZeta = 0.2;
  /// IDX image file; when missing the inputs are synthetic uniform [0,1] pixels.
  std::string mnistImages;

  int resolvedTestRows() const { return testRows > 0 ? testRows : 100 * n; }
  std::vector<double> resolvedSubproblems() const;

  /// Throws InvalidInput for an unusable plan, before any computation.
  void validate() const;

  /// Keys accepted by fromConfig / written by toConfig.
  static const std::vector<std::string>& configKeys();
  /// Overlays the keys present in `kv` onto `base`. Unknown keys are errors.
  static ExperimentPlan fromConfig(const config::KeyValues& kv, ExperimentPlan base);
  static ExperimentPlan fromConfig(const config::KeyValues& kv);
  config::KeyValues toConfig() const;
};

using Cell = std::variant<double, long long, std::string>;

struct ReportTable {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
  /// Plan echo, seed and notes; written next to the CSV, never inside it.
  std::vector<std::pair<std::string, std::string>> provenance;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  std::string text(std::size_t row, const std::string& name) const;
  void addRow(std::vector<Cell> row);
};

/// (1/n-bar) ||A_test (x - estimate)||^2.
double empiricalMse(const Matrix& testRegressors, const Vector& x, const Vector& estimate);

/// Median of the means of `blocks` contiguous blocks (index order).
double medianOfMeans(const std::vector<double>& values, int blocks);
double median(std::vector<double> values);

/// Regressor rows for a plan: the data model plus its fixed covariance.
class DataSource {
 public:
  /// Builds the fixed pieces (covariance, random-feature frequencies, corpus).
  explicit DataSource(const ExperimentPlan& plan);

  Matrix sample(int rows, SeedStream& rng) const;
  /// Known population covariance; empty for random features.
  const std::optional<Matrix>& covariance() const { return covariance_; }
  const std::string& label() const { return label_; }

 private:
  DataModel model_;
  int p_;
  std::optional<Matrix> covariance_;
  std::optional<datagen::RegressorModel> regressors_;
  Matrix frequencies_;
  Matrix corpus_;  // raw inputs z when loaded from disk
  int inputDim_ = 0;
  std::string label_;
};

/// Ground truth fixed for the whole plan: uniform [-1,1], unit norm.
Vector planGroundTruth(const ExperimentPlan& plan);

/// Dispatches on plan.study. Validates first.
ReportTable runExperiment(const ExperimentPlan& plan);

ReportTable partitionSweep(const ExperimentPlan& plan);
ReportTable spectralStudy(const ExperimentPlan& plan);
ReportTable convergenceStudy(const ExperimentPlan& plan);
ReportTable noiseStudy(const ExperimentPlan& plan);
ReportTable regularizationStudy(const ExperimentPlan& plan);
ReportTable hyperparamStudy(const ExperimentPlan& plan);

/// Per (p1, subproblem, trial): iterations until ||x^t - x*|| <= tol ||x*||,
/// with x* the fixed point of the fastest admissible setting, and the final
/// distance to x*. -1 when the tolerance is never reached.
ReportTable hyperparamSummary(const ExperimentPlan& plan);

/// One-round average-error check: median-of-means Monte Carlo estimate of
/// E kappa(x^1) against the closed form. Refuses (PreconditionError) when any
/// |p_k - n| < 10 or the model is not isotropic Gaussian.
ReportTable mcAverageCheck(const ExperimentPlan& plan);

/// Fraction of draws where ||B|| <= beta (or, for TracyWidom, both singular
/// value inequalities hold). Refuses when rho = 0.
ReportTable boundCoverageCheck(const ExperimentPlan& plan, BoundKind kind);

/// Evaluates the bound for the plan's partition without sampling.
theory::BoundResult evaluateBound(const ExperimentPlan& plan, BoundKind kind,
                                  const std::vector<int>& sizes);

/// Header + rows, LF line ends, 17 significant digits. IoError on failure.
void emitCsv(const ReportTable& table, const std::string& path);
std::string toCsv(const ReportTable& table);
/// `key = value` lines of table.provenance.
void emitProvenance(const ReportTable& table, const std::string& path);

}  // namespace fpcocoa::harness
