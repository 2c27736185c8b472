#include "fpcocoa/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "fpcocoa/cocoa.hpp"
#include "fpcocoa/csv.hpp"
#include "fpcocoa/errors.hpp"
#include "fpcocoa/idx.hpp"

namespace fpcocoa::harness {

namespace {

template <class E>
struct NameTable {
  E value;
  const char* name;
};

constexpr NameTable<Study> kStudies[] = {
    {Study::PartitionSweep, "partition-sweep"}, {Study::SpectralStudy, "spectral"},
    {Study::ConvergenceStudy, "convergence"},   {Study::NoiseStudy, "noise"},
    {Study::RegularizationStudy, "regularization"}, {Study::HyperparamStudy, "hyperparam"},
    {Study::McAverageCheck, "mc-average"},      {Study::BoundCoverage, "bound-coverage"},
};
constexpr NameTable<DataModel> kModels[] = {
    {DataModel::IsoGaussian, "iso-gaussian"},
    {DataModel::CorrGaussian, "corr-gaussian"},
    {DataModel::Bernoulli, "bernoulli"},
    {DataModel::RandomFeatures, "random-features"},
};
constexpr NameTable<BoundKind> kBounds[] = {
    {BoundKind::IsoGaussian, "iso-gaussian"},
    {BoundKind::IsoGaussianTall, "iso-gaussian-tall"},
    {BoundKind::CorrGaussian, "corr-gaussian"},
    {BoundKind::CorrGaussianTall, "corr-gaussian-tall"},
    {BoundKind::SubGaussian, "sub-gaussian"},
    {BoundKind::SubGaussianTall, "sub-gaussian-tall"},
    {BoundKind::TracyWidom, "tracy-widom"},
};

template <class E, std::size_t N>
std::string nameOf(const NameTable<E> (&table)[N], E value) {
  for (const auto& entry : table) {
    if (entry.value == value) return entry.name;
  }
  return "unknown";
}

template <class E, std::size_t N>
E valueOf(const NameTable<E> (&table)[N], const std::string& name, const char* what) {
  for (const auto& entry : table) {
    if (name == entry.name) return entry.value;
  }
  std::string choices;
  for (const auto& entry : table) choices += std::string(choices.empty() ? "" : ", ") + entry.name;
  throw InvalidInput(std::string("unknown ") + what + " '" + name + "' (expected one of " + choices + ")");
}

SeedStream masterStream(const ExperimentPlan& plan) { return SeedStream(plan.masterSeed); }

SeedStream trialStream(const ExperimentPlan& plan, std::size_t trial) {
  return masterStream(plan).child("trials").child(static_cast<std::uint64_t>(trial));
}

ExecutionPolicy trialPolicy(const ExperimentPlan& plan) { return ExecutionPolicy{plan.workers}; }

std::optional<Matrix> planCovariance(const ExperimentPlan& plan) {
  switch (plan.model) {
    case DataModel::CorrGaussian: {
      SeedStream rng = masterStream(plan).child("covariance");
      return datagen::buildPaperCovariance(plan.p, plan.covarianceDecay, rng);
    }
    case DataModel::IsoGaussian:
    case DataModel::Bernoulli:
      return Matrix::Identity(plan.p, plan.p);
    case DataModel::RandomFeatures:
      break;
  }
  return std::nullopt;
}

/// Partitions a study iterates over: the explicit partition if given, else
/// one first-node sweep partition per p1.
std::vector<PartitionSpec> studyPartitions(const ExperimentPlan& plan) {
  if (!plan.partition.empty()) return {PartitionSpec(plan.partition)};
  std::vector<int> p1s = plan.p1Values;
  if (p1s.empty()) {
    if (plan.K == 1) {
      p1s.push_back(plan.p);
    } else {
      for (int p1 = 1; p1 <= plan.p - (plan.K - 1); ++p1) p1s.push_back(p1);
    }
  }
  std::vector<PartitionSpec> out;
  for (int p1 : p1s) out.push_back(PartitionSpec::firstNodeSweep(plan.p, plan.K, p1));
  return out;
}

PartitionSpec fixedPartition(const ExperimentPlan& plan) {
  const auto specs = studyPartitions(plan);
  if (specs.size() != 1) {
    throw InvalidInput("this study needs one partition: set `partition` or a single p1 value");
  }
  return specs.front();
}

/// Training matrix, standard-normal noise direction and test matrix of one
/// trial. Shared by every partition / noise level / lambda of that trial.
struct TrialDraw {
  Matrix train;
  Vector noiseDirection;
  Matrix test;
  std::optional<Matrix> testGram;

  Vector observations(const Vector& x, double noiseVariance) const {
    Vector y = train * x;
    if (noiseVariance > 0.0) y += std::sqrt(noiseVariance) * noiseDirection;
    return y;
  }

  double mse(const Vector& x, const Vector& estimate) const {
    if (testGram) {
      const Vector d = x - estimate;
      return std::max(0.0, d.dot(*testGram * d));
    }
    return empiricalMse(test, x, estimate);
  }
};

TrialDraw drawTrial(const DataSource& source, const ExperimentPlan& plan, std::size_t trial,
                    bool withTest, bool gram) {
  SeedStream rng = trialStream(plan, trial);
  SeedStream trainRng = rng.child("train");
  SeedStream noiseRng = rng.child("noise");
  TrialDraw draw;
  draw.train = source.sample(plan.n, trainRng);
  draw.noiseDirection.resize(plan.n);
  for (int i = 0; i < plan.n; ++i) draw.noiseDirection(i) = noiseRng.normal();
  if (withTest) {
    SeedStream testRng = rng.child("test");
    draw.test = source.sample(plan.resolvedTestRows(), testRng);
    if (gram) {
      Matrix g = Matrix::Zero(plan.p, plan.p);
      g.selfadjointView<Eigen::Lower>().rankUpdate(draw.test.transpose(), 1.0 / draw.test.rows());
      g = g.selfadjointView<Eigen::Lower>();
      draw.testGram = std::move(g);
      draw.test.resize(0, 0);
    }
  }
  return draw;
}

cocoa::CocoaConfig solverConfig(const ExperimentPlan& plan, double lambda, double subproblem,
                                int iterations) {
  cocoa::CocoaConfig cfg;
  cfg.lambda = lambda;
  cfg.aggregation = plan.aggregation;
  cfg.subproblem = subproblem;
  cfg.iterations = iterations;
  return cfg;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

ReportTable newTable(const ExperimentPlan& plan, std::vector<std::string> header,
                     const DataSource* source) {
  ReportTable t;
  t.header = std::move(header);
  const auto echo = plan.toConfig();
  for (const auto& [key, value] : echo.entries()) t.provenance.emplace_back(key, value);
  if (source != nullptr) t.provenance.emplace_back("data_source", source->label());
  return t;
}

/// Per-trial matrix of results [trial][slot] computed in parallel, reduced by
/// the caller in trial order.
template <class Fn>
std::vector<std::vector<double>> runTrials(const ExperimentPlan& plan, Fn&& fn) {
  return mapIndexed<std::vector<double>>(static_cast<std::size_t>(plan.trials), trialPolicy(plan),
                                         fn);
}

std::vector<double> column(const std::vector<std::vector<double>>& perTrial, std::size_t slot) {
  std::vector<double> out;
  out.reserve(perTrial.size());
  for (const auto& row : perTrial) out.push_back(row[slot]);
  return out;
}

double relativeGap(const Vector& a, const Vector& ref) {
  const double scale = ref.norm();
  return (a - ref).norm() / (scale > 0.0 ? scale : 1.0);
}

}  // namespace

std::string toString(Study s) { return nameOf(kStudies, s); }
std::string toString(DataModel m) { return nameOf(kModels, m); }
std::string toString(BoundKind b) { return nameOf(kBounds, b); }
Study parseStudy(const std::string& s) { return valueOf(kStudies, s, "study"); }
DataModel parseDataModel(const std::string& s) { return valueOf(kModels, s, "data model"); }
BoundKind parseBoundKind(const std::string& s) { return valueOf(kBounds, s, "bound"); }

std::vector<double> ExperimentPlan::resolvedSubproblems() const {
  if (!subproblems.empty()) return subproblems;
  return {aggregation * K};
}

void ExperimentPlan::validate() const {
  auto fail = [](const std::string& what) { throw InvalidInput("plan: " + what); };
  if (n < 1) fail("n must be >= 1");
  if (p < 1) fail("p must be >= 1");
  if (K < 1 || K > p) fail("K must satisfy 1 <= K <= p");
  if (trials < 1) fail("trials must be >= 1");
  if (iterations < 0) fail("iterations must be >= 0");
  if (testRows < 0) fail("test_rows must be >= 0");
  if (workers < 0) fail("workers must be >= 0");
  if (!(aggregation > 0.0 && aggregation <= 1.0)) fail("aggregation must lie in (0, 1]");
  if (!(tolerance > 0.0)) fail("tolerance must be > 0");
  if (mcBlocks < 1) fail("mc_blocks must be >= 1");
  if (!(covarianceDecay > 0.0 && covarianceDecay <= 1.0)) fail("covariance_decay must lie in (0, 1]");
  if (rfInputDim < 1) fail("rf_input_dim must be >= 1");
  if (!(rfZeta > 0.0)) fail("rf_zeta must be > 0");
  if (!(C > 0.0)) fail("C must be > 0");
  for (double v : noiseVariances) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail("noise variances must be finite and >= 0");
  }
  if (noiseVariances.empty()) fail("noise_variances must not be empty");
  for (double v : lambdas) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail("lambdas must be finite and >= 0");
  }
  if (lambdas.empty()) fail("lambdas must not be empty");
  for (double v : subproblems) {
    if (!(v > 0.0) || !std::isfinite(v)) fail("subproblems must be finite and > 0");
  }
  for (double v : q) {
    if (!(v >= 0.0)) fail("q must be >= 0");
  }
  for (double v : qBar) {
    if (!(v >= 0.0)) fail("q_bar must be >= 0");
  }
  for (double v : L) {
    if (!(v >= 1.0)) fail("L must be >= 1");
  }
  if (!partition.empty()) {
    PartitionSpec spec(partition);
    spec.requireTotal(p);
    if (spec.nodes() != K) fail("partition has " + std::to_string(spec.nodes()) + " nodes but K = " + std::to_string(K));
  }
  for (int p1 : p1Values) {
    if (K == 1 ? p1 != p : (p1 < 1 || p1 > p - (K - 1))) {
      fail("p1 = " + std::to_string(p1) + " is not admissible for p = " + std::to_string(p) +
           ", K = " + std::to_string(K));
    }
  }
  if (study == Study::McAverageCheck && model != DataModel::IsoGaussian) {
    fail("mc-average requires the iso-gaussian model");
  }
  if (study == Study::BoundCoverage && model == DataModel::RandomFeatures &&
      bound != BoundKind::TracyWidom) {
    fail("bound coverage needs a model with a known covariance");
  }
}

const std::vector<std::string>& ExperimentPlan::configKeys() {
  static const std::vector<std::string> keys{
      "study", "model", "n", "p", "K", "p1", "partition", "noise_variances", "lambdas",
      "subproblems", "aggregation", "iterations", "trials", "test_rows", "seed", "workers",
      "trace", "covariance_decay", "tolerance", "mc_blocks", "bound", "q", "q_bar", "C", "L",
      "ell_form", "rf_input_dim", "rf_zeta", "mnist_images", "equal_block_norms"};
  return keys;
}

ExperimentPlan ExperimentPlan::fromConfig(const config::KeyValues& kv, ExperimentPlan base) {
  const auto unknown = kv.unknownKeys(configKeys());
  if (!unknown.empty()) throw InvalidInput("config: unknown key '" + unknown.front() + "'");
  ExperimentPlan plan = std::move(base);
  auto asInt = [](long long v, const char* key) {
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw InvalidInput(std::string("config key '") + key + "' out of range");
    }
    return static_cast<int>(v);
  };
  if (auto v = kv.string("study")) plan.study = parseStudy(*v);
  if (auto v = kv.string("model")) plan.model = parseDataModel(*v);
  if (auto v = kv.integer("n")) plan.n = asInt(*v, "n");
  if (auto v = kv.integer("p")) plan.p = asInt(*v, "p");
  if (auto v = kv.integer("K")) plan.K = asInt(*v, "K");
  if (auto v = kv.integerList("p1")) plan.p1Values = *v;
  if (auto v = kv.integerList("partition")) plan.partition = *v;
  if (auto v = kv.numberList("noise_variances")) plan.noiseVariances = *v;
  if (auto v = kv.numberList("lambdas")) plan.lambdas = *v;
  if (auto v = kv.numberList("subproblems")) plan.subproblems = *v;
  if (auto v = kv.number("aggregation")) plan.aggregation = *v;
  if (auto v = kv.integer("iterations")) plan.iterations = asInt(*v, "iterations");
  if (auto v = kv.integer("trials")) plan.trials = asInt(*v, "trials");
  if (auto v = kv.integer("test_rows")) plan.testRows = asInt(*v, "test_rows");
  if (auto v = kv.unsignedInteger("seed")) plan.masterSeed = *v;
  if (auto v = kv.integer("workers")) plan.workers = asInt(*v, "workers");
  if (auto v = kv.boolean("trace")) plan.trace = *v;
  if (auto v = kv.number("covariance_decay")) plan.covarianceDecay = *v;
  if (auto v = kv.number("tolerance")) plan.tolerance = *v;
  if (auto v = kv.integer("mc_blocks")) plan.mcBlocks = asInt(*v, "mc_blocks");
  if (auto v = kv.string("bound")) plan.bound = parseBoundKind(*v);
  if (auto v = kv.numberList("q")) plan.q = *v;
  if (auto v = kv.numberList("q_bar")) plan.qBar = *v;
  if (auto v = kv.number("C")) plan.C = *v;
  if (auto v = kv.numberList("L")) plan.L = *v;
  if (auto v = kv.string("ell_form")) {
    if (*v == "scaled") {
      plan.ellForm = theory::EllForm::Scaled;
    } else if (*v == "literal") {
      plan.ellForm = theory::EllForm::Literal;
    } else {
      throw InvalidInput("config key 'ell_form': expected scaled or literal");
    }
  }
  if (auto v = kv.integer("rf_input_dim")) plan.rfInputDim = asInt(*v, "rf_input_dim");
  if (auto v = kv.number("rf_zeta")) plan.rfZeta = *v;
  if (auto v = kv.string("mnist_images")) plan.mnistImages = *v;
  if (auto v = kv.boolean("equal_block_norms")) plan.equalBlockNorms = *v;
  return plan;
}

ExperimentPlan ExperimentPlan::fromConfig(const config::KeyValues& kv) {
  return fromConfig(kv, ExperimentPlan{});
}

config::KeyValues ExperimentPlan::toConfig() const {
  config::KeyValues kv;
  kv.set("study", toString(study));
  kv.set("model", toString(model));
  kv.set("n", std::to_string(n));
  kv.set("p", std::to_string(p));
  kv.set("K", std::to_string(K));
  kv.set("p1", config::joinList(p1Values));
  kv.set("partition", config::joinList(partition));
  kv.set("noise_variances", config::joinList(noiseVariances));
  kv.set("lambdas", config::joinList(lambdas));
  kv.set("subproblems", config::joinList(resolvedSubproblems()));
  kv.set("aggregation", csv::formatNumber(aggregation));
  kv.set("iterations", std::to_string(iterations));
  kv.set("trials", std::to_string(trials));
  kv.set("test_rows", std::to_string(resolvedTestRows()));
  kv.set("seed", std::to_string(masterSeed));
  kv.set("workers", std::to_string(workers));
  kv.set("trace", trace ? "true" : "false");
  kv.set("covariance_decay", csv::formatNumber(covarianceDecay));
  kv.set("tolerance", csv::formatNumber(tolerance));
  kv.set("mc_blocks", std::to_string(mcBlocks));
  kv.set("bound", toString(bound));
  kv.set("q", config::joinList(q));
  kv.set("q_bar", config::joinList(qBar));
  kv.set("C", csv::formatNumber(C));
  kv.set("L", config::joinList(L));
  kv.set("ell_form", ellForm == theory::EllForm::Scaled ? "scaled" : "literal");
  kv.set("rf_input_dim", std::to_string(rfInputDim));
  kv.set("rf_zeta", csv::formatNumber(rfZeta));
  kv.set("mnist_images", mnistImages);
  kv.set("equal_block_norms", equalBlockNorms ? "true" : "false");
  return kv;
}

std::size_t ReportTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidInput("report: no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double ReportTable::number(std::size_t row, const std::string& name) const {
  const Cell& c = rows.at(row).at(column(name));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
  throw InvalidInput("report: column '" + name + "' is not numeric");
}

std::string ReportTable::text(std::size_t row, const std::string& name) const {
  const Cell& c = rows.at(row).at(column(name));
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return csv::formatNumber(std::get<double>(c));
}

void ReportTable::addRow(std::vector<Cell> row) {
  if (row.size() != header.size()) throw InvalidInput("report: row width does not match header");
  rows.push_back(std::move(row));
}

double empiricalMse(const Matrix& testRegressors, const Vector& x, const Vector& estimate) {
  if (x.size() != testRegressors.cols() || estimate.size() != x.size() || testRegressors.rows() < 1) {
    throw InvalidInput("empiricalMse: dimension mismatch");
  }
  return (testRegressors * (x - estimate)).squaredNorm() / static_cast<double>(testRegressors.rows());
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median: no values");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

double medianOfMeans(const std::vector<double>& values, int blocks) {
  if (blocks < 1 || values.size() < static_cast<std::size_t>(blocks)) {
    throw InvalidInput("medianOfMeans: need at least one value per block");
  }
  const std::size_t n = values.size();
  const auto b = static_cast<std::size_t>(blocks);
  std::vector<double> means;
  for (std::size_t j = 0; j < b; ++j) {
    const std::size_t lo = j * n / b;
    const std::size_t hi = (j + 1) * n / b;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += values[i];
    means.push_back(s / static_cast<double>(hi - lo));
  }
  return median(std::move(means));
}

DataSource::DataSource(const ExperimentPlan& plan) : model_(plan.model), p_(plan.p) {
  covariance_ = planCovariance(plan);
  switch (model_) {
    case DataModel::IsoGaussian:
      regressors_ = datagen::RegressorModel::isoGaussian(p_);
      label_ = "iso-gaussian";
      break;
    case DataModel::CorrGaussian:
      regressors_ = datagen::RegressorModel::corrGaussian(*covariance_);
      label_ = "corr-gaussian";
      break;
    case DataModel::Bernoulli:
      regressors_ = datagen::RegressorModel::bernoulli(p_);
      label_ = "bernoulli";
      break;
    case DataModel::RandomFeatures: {
      inputDim_ = plan.rfInputDim;
      label_ = "random-features (synthetic uniform inputs)";
      if (!plan.mnistImages.empty() && std::filesystem::exists(plan.mnistImages)) {
        corpus_ = idx::loadIdx(plan.mnistImages).images;
        if (corpus_.rows() == 0) throw FormatError(plan.mnistImages + ": not an image file");
        inputDim_ = static_cast<int>(corpus_.cols());
        label_ = "random-features (images: " + plan.mnistImages + ")";
      }
      SeedStream rng = masterStream(plan).child("frequencies");
      frequencies_ = datagen::sampleFrequencies(p_, inputDim_, plan.rfZeta, rng);
      break;
    }
  }
}

Matrix DataSource::sample(int rows, SeedStream& rng) const {
  if (regressors_) return datagen::sampleRegressors(*regressors_, rows, rng);
  Matrix inputs;
  if (corpus_.size() > 0) {
    inputs = datagen::sampleRegressors(datagen::RegressorModel::empirical(corpus_), rows, rng);
  } else {
    inputs.resize(rows, inputDim_);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < inputDim_; ++j) inputs(i, j) = rng.uniform(0.0, 1.0);
    }
  }
  return datagen::randomFourierFeatureRows(inputs, frequencies_);
}

Vector planGroundTruth(const ExperimentPlan& plan) {
  SeedStream rng = masterStream(plan).child("ground-truth");
  return datagen::sampleGroundTruth(plan.p, rng);
}

namespace {

Vector studyGroundTruth(const ExperimentPlan& plan, const PartitionSpec* equalBlocks) {
  Vector x = planGroundTruth(plan);
  if (plan.equalBlockNorms && equalBlocks != nullptr) {
    const double target = std::sqrt(1.0 / equalBlocks->nodes());
    for (int k = 0; k < equalBlocks->nodes(); ++k) {
      auto seg = x.segment(equalBlocks->offset(k), equalBlocks->size(k));
      seg *= target / seg.norm();
    }
  }
  return x;
}

std::vector<double> blockNormsSquared(const Vector& x, const PartitionSpec& spec) {
  std::vector<double> out;
  for (const auto& part : datagen::partitionVector(x, spec)) out.push_back(part.squaredNorm());
  return out;
}

}  // namespace

ReportTable partitionSweep(const ExperimentPlan& plan) {
  plan.validate();
  const DataSource source(plan);
  const auto specs = studyPartitions(plan);
  const Vector x = planGroundTruth(plan);
  const double noise = plan.noiseVariances.front();
  const double lambda = plan.lambdas.front();
  const auto cfg = solverConfig(plan, lambda, plan.resolvedSubproblems().front(), plan.iterations);
  const auto perTrial = runTrials(plan, [&](std::size_t trial) {
    const TrialDraw draw = drawTrial(source, plan, trial, true, false);
    const Vector y = draw.observations(x, noise);
    std::vector<double> mse;
    for (const auto& spec : specs) {
      const auto traj = cocoa::runCocoa(draw.train, y, spec, cfg, {cocoa::Record::Endpoints, {}});
      mse.push_back(draw.mse(x, traj.final()));
    }
    return mse;
  });
  ReportTable t = newTable(plan, {"p1", "mean_mse", "median_mse", "analytic_one_round"}, &source);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto values = column(perTrial, s);
    double analytic = std::numeric_limits<double>::quiet_NaN();
    if (plan.model == DataModel::IsoGaussian && lambda == 0.0) {
      const theory::PartitionDims dims(plan.n, specs[s].sizes());
      analytic = theory::avgGenError(dims, blockNormsSquared(x, specs[s]), plan.n * noise).total;
    }
    t.addRow({static_cast<long long>(specs[s].size(0)), mean(values), median(values), analytic});
  }
  return t;
}

ReportTable spectralStudy(const ExperimentPlan& plan) {
  plan.validate();
  const DataSource source(plan);
  const auto specs = studyPartitions(plan);
  const Vector x = planGroundTruth(plan);
  const double noise = plan.noiseVariances.front();
  const auto cfg = solverConfig(plan, plan.lambdas.front(), plan.resolvedSubproblems().front(),
                                plan.iterations);
  // Slots: [2s] = ||B||, [2s+1] = MSE for partition s.
  const auto perTrial = runTrials(plan, [&](std::size_t trial) {
    const TrialDraw draw = drawTrial(source, plan, trial, true, false);
    const Vector y = draw.observations(x, noise);
    std::vector<double> out;
    for (const auto& spec : specs) {
      const auto op = cocoa::iterationMatrix(draw.train, spec);
      out.push_back(numkern::spectralNorm(op.B));
      const auto traj = cocoa::runCocoa(draw.train, y, spec, cfg, {cocoa::Record::Endpoints, {}});
      out.push_back(draw.mse(x, traj.final()));
    }
    return out;
  });
  ReportTable t = newTable(plan, {"p1", "rank", "trial", "norm_B", "mse"}, &source);
  t.provenance.emplace_back("order", "descending norm_B, ties by trial index");
  for (std::size_t s = 0; s < specs.size(); ++s) {
    std::vector<std::size_t> order(perTrial.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return perTrial[a][2 * s] > perTrial[b][2 * s];
    });
    for (std::size_t r = 0; r < order.size(); ++r) {
      const auto i = order[r];
      t.addRow({static_cast<long long>(specs[s].size(0)), static_cast<long long>(r),
                static_cast<long long>(i), perTrial[i][2 * s], perTrial[i][2 * s + 1]});
    }
  }
  return t;
}

ReportTable convergenceStudy(const ExperimentPlan& plan) {
  plan.validate();
  const DataSource source(plan);
  const auto specs = studyPartitions(plan);
  const Vector x = planGroundTruth(plan);
  const double noise = plan.noiseVariances.front();
  const auto cfg = solverConfig(plan, plan.lambdas.front(), plan.resolvedSubproblems().front(),
                                plan.iterations);
  const std::size_t steps = static_cast<std::size_t>(plan.iterations) + 1;
  const auto perTrial = runTrials(plan, [&](std::size_t trial) {
    const TrialDraw draw = drawTrial(source, plan, trial, true, true);
    const Vector y = draw.observations(x, noise);
    std::vector<double> out;
    for (const auto& spec : specs) {
      const auto traj = cocoa::runCocoa(draw.train, y, spec, cfg, {cocoa::Record::All, {}});
      for (const auto& est : traj.estimates) out.push_back(draw.mse(x, est));
    }
    return out;
  });
  ReportTable t = newTable(plan, {"p1", "t", "mean_mse"}, &source);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (std::size_t it = 0; it < steps; ++it) {
      t.addRow({static_cast<long long>(specs[s].size(0)), static_cast<long long>(it),
                mean(column(perTrial, s * steps + it))});
    }
  }
  return t;
}

ReportTable noiseStudy(const ExperimentPlan& plan) {
  plan.validate();
  const DataSource source(plan);
  const auto specs = studyPartitions(plan);
  const Vector x = planGroundTruth(plan);
  const auto cfg = solverConfig(plan, plan.lambdas.front(), plan.resolvedSubproblems().front(),
                                plan.iterations);
  const auto& levels = plan.noiseVariances;
  const auto perTrial = runTrials(plan, [&](std::size_t trial) {
    const TrialDraw draw = drawTrial(source, plan, trial, true, false);
    std::vector<double> out;
    for (const auto& spec : specs) {
      for (double level : levels) {
        const auto traj = cocoa::runCocoa(draw.train, draw.observations(x, level), spec, cfg,
                                          {cocoa::Record::Endpoints, {}});
        out.push_back(draw.mse(x, traj.final()));
      }
    }
    return out;
  });
  ReportTable t = newTable(plan, {"p1", "noise_variance", "mean_mse"}, &source);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      t.addRow({static_cast<long long>(specs[s].size(0)), levels[l],
                mean(column(perTrial, s * levels.size() + l))});
    }
  }
  return t;
}

ReportTable regularizationStudy(const ExperimentPlan& plan) {
  plan.validate();
  const DataSource source(plan);
  const auto specs = studyPartitions(plan);
  const Vector x = planGroundTruth(plan);
  const double noise = plan.noiseVariances.front();
  const auto& lambdas = plan.lambdas;
  const std::size_t steps = plan.trace ? static_cast<std::size_t>(plan.iterations) + 1 : 1;
  // Per (spec, lambda): `steps` CoCoA values then one centralized value.
  const std::size_t block = steps + 1;
  const auto perTrial = runTrials(plan, [&](std::size_t trial) {
    const TrialDraw draw = drawTrial(source, plan, trial, true, plan.trace);
    const Vector y = draw.observations(x, noise);
    std::vector<double> out;
    for (const auto& spec : specs) {
      for (double lambda : lambdas) {
        const auto cfg =
            solverConfig(plan, lambda, plan.resolvedSubproblems().front(), plan.iterations);
        const auto traj = cocoa::runCocoa(
            draw.train, y, spec, cfg,
            {plan.trace ? cocoa::Record::All : cocoa::Record::Endpoints, {}});
        if (plan.trace) {
          for (const auto& est : traj.estimates) out.push_back(draw.mse(x, est));
        } else {
          out.push_back(draw.mse(x, traj.final()));
        }
        out.push_back(draw.mse(x, cocoa::centralizedSolve(draw.train, y, lambda)));
      }
    }
    return out;
  });
  ReportTable t = newTable(plan, {"p1", "lambda", "t", "mean_mse", "centralized_mse"}, &source);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      const std::size_t base = (s * lambdas.size() + l) * block;
      const double central = mean(column(perTrial, base + steps));
      for (std::size_t it = 0; it < steps; ++it) {
        const auto tLabel = plan.trace ? static_cast<long long>(it) : plan.iterations;
        t.addRow({static_cast<long long>(specs[s].size(0)), lambdas[l], static_cast<long long>(tLabel),
                  mean(column(perTrial, base + it)), central});
      }
    }
  }
  return t;
}

ReportTable hyperparamStudy(const ExperimentPlan& plan) {
  plan.validate();
  const DataSource source(plan);
  const auto specs = studyPartitions(plan);
  const Vector x = planGroundTruth(plan);
  const double noise = plan.noiseVariances.front();
  const auto sigmas = plan.resolvedSubproblems();
  const std::size_t steps = plan.trace ? static_cast<std::size_t>(plan.iterations) + 1 : 1;
  const auto perTrial = runTrials(plan, [&](std::size_t trial) {
    const TrialDraw draw = drawTrial(source, plan, trial, true, plan.trace);
    const Vector y = draw.observations(x, noise);
    std::vector<double> out;
    for (const auto& spec : specs) {
      for (double sigma : sigmas) {
        const auto cfg = solverConfig(plan, plan.lambdas.front(), sigma, plan.iterations);
        const auto traj = cocoa::runCocoa(
            draw.train, y, spec, cfg,
            {plan.trace ? cocoa::Record::All : cocoa::Record::Endpoints, {}});
        if (plan.trace) {
          for (const auto& est : traj.estimates) out.push_back(draw.mse(x, est));
        } else {
          out.push_back(draw.mse(x, traj.final()));
        }
      }
    }
    return out;
  });
  ReportTable t = newTable(plan, {"p1", "subproblem", "t", "mean_mse"}, &source);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (std::size_t g = 0; g < sigmas.size(); ++g) {
      const std::size_t base = (s * sigmas.size() + g) * steps;
      for (std::size_t it = 0; it < steps; ++it) {
        const auto tLabel = plan.trace ? static_cast<long long>(it) : plan.iterations;
        t.addRow({static_cast<long long>(specs[s].size(0)), sigmas[g],
                  static_cast<long long>(tLabel), mean(column(perTrial, base + it))});
      }
    }
  }
  return t;
}

ReportTable hyperparamSummary(const ExperimentPlan& plan) {
  plan.validate();
  const DataSource source(plan);
  const auto specs = studyPartitions(plan);
  const Vector x = planGroundTruth(plan);
  const double noise = plan.noiseVariances.front();
  const double lambda = plan.lambdas.front();
  const auto sigmas = plan.resolvedSubproblems();
  const auto perTrial = runTrials(plan, [&](std::size_t trial) {
    const TrialDraw draw = drawTrial(source, plan, trial, false, false);
    const Vector y = draw.observations(x, noise);
    std::vector<double> out;
    for (const auto& spec : specs) {
      // Reference fixed point from the undamped admissible setting.
      auto refCfg = solverConfig(plan, lambda, plan.aggregation * plan.K,
                                 std::max(plan.iterations, 20000));
      refCfg.earlyStopTol = 1e-15;
      const Vector ref =
          cocoa::runCocoa(draw.train, y, spec, refCfg, {cocoa::Record::Endpoints, {}}).final();
      for (double sigma : sigmas) {
        const auto cfg = solverConfig(plan, lambda, sigma, plan.iterations);
        const auto traj = cocoa::runCocoa(draw.train, y, spec, cfg, {cocoa::Record::All, {}});
        double reached = -1.0;
        for (std::size_t it = 0; it < traj.estimates.size(); ++it) {
          if (relativeGap(traj.estimates[it], ref) <= plan.tolerance) {
            reached = static_cast<double>(traj.iterationsRecorded[it]);
            break;
          }
        }
        out.push_back(reached);
        out.push_back(relativeGap(traj.final(), ref));
      }
    }
    return out;
  });
  ReportTable t = newTable(plan, {"p1", "subproblem", "trial", "iterations_to_tol", "final_gap"}, &source);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (std::size_t g = 0; g < sigmas.size(); ++g) {
      const std::size_t base = 2 * (s * sigmas.size() + g);
      for (std::size_t i = 0; i < perTrial.size(); ++i) {
        t.addRow({static_cast<long long>(specs[s].size(0)), sigmas[g], static_cast<long long>(i),
                  static_cast<long long>(perTrial[i][base]), perTrial[i][base + 1]});
      }
    }
  }
  return t;
}

ReportTable mcAverageCheck(const ExperimentPlan& plan) {
  plan.validate();
  if (plan.model != DataModel::IsoGaussian) {
    throw PreconditionError("mc-average: the closed form holds for iso-gaussian regressors only");
  }
  const auto specs = studyPartitions(plan);
  for (const auto& spec : specs) {
    for (int pk : spec.sizes()) {
      if (std::abs(pk - plan.n) < 10) {
        throw PreconditionError(
            "mc-average: p_k = " + std::to_string(pk) + " is within 10 of n = " +
            std::to_string(plan.n) +
            "; the error has infinite or huge variance there and Monte Carlo cannot confirm the closed form");
      }
    }
  }
  if (plan.trials < plan.mcBlocks) throw InvalidInput("mc-average: trials must be >= mc_blocks");
  const DataSource source(plan);
  const double noise = plan.noiseVariances.front();
  std::vector<Vector> truths;
  for (const auto& spec : specs) truths.push_back(studyGroundTruth(plan, &spec));
  // One round with the undamped subproblem, no regularization.
  const auto cfg = solverConfig(plan, 0.0, plan.aggregation * plan.K, 1);
  const auto perTrial = runTrials(plan, [&](std::size_t trial) {
    const TrialDraw draw = drawTrial(source, plan, trial, false, false);
    std::vector<double> out;
    for (std::size_t s = 0; s < specs.size(); ++s) {
      const Vector y = draw.observations(truths[s], noise);
      const auto traj = cocoa::runCocoa(draw.train, y, specs[s], cfg, {cocoa::Record::Endpoints, {}});
      out.push_back((truths[s] - traj.final()).squaredNorm());
    }
    return out;
  });
  ReportTable t = newTable(plan, {"p1", "mc_estimate", "analytic_value", "rel_error"}, &source);
  t.provenance.emplace_back("estimator", "median of " + std::to_string(plan.mcBlocks) + " block means");
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const double mc = medianOfMeans(column(perTrial, s), plan.mcBlocks);
    const theory::PartitionDims dims(plan.n, specs[s].sizes());
    const double analytic =
        theory::avgGenError(dims, blockNormsSquared(truths[s], specs[s]), plan.n * noise).total;
    const double rel = analytic > 0.0 ? std::abs(mc - analytic) / analytic : std::abs(mc);
    t.addRow({static_cast<long long>(specs[s].size(0)), mc, analytic, rel});
  }
  return t;
}

theory::BoundResult evaluateBound(const ExperimentPlan& plan, BoundKind kind,
                                  const std::vector<int>& sizes) {
  if (kind == BoundKind::TracyWidom) {
    if (plan.q.empty()) throw InvalidInput("tracy-widom bound: q is required");
    const auto iv = theory::tracyWidomInterval(plan.n, plan.p, plan.q.front());
    return {iv.upper, iv.probability};
  }
  const theory::PartitionDims dims(plan.n, sizes);
  if (kind == BoundKind::IsoGaussian) return theory::betaIsoGaussian(dims, plan.q);
  if (kind == BoundKind::IsoGaussianTall) return theory::betaIsoGaussianTall(dims, plan.q);
  theory::BoundInputs in(dims);
  in.q = plan.q;
  in.qBar = plan.qBar;
  in.C = plan.C;
  in.L = plan.L;
  in.ellForm = plan.ellForm;
  const auto cov = planCovariance(plan);
  if (!cov) throw InvalidInput("bound: the data model has no known covariance");
  in.spectra = theory::blockSpectra(*cov, PartitionSpec(sizes));
  switch (kind) {
    case BoundKind::CorrGaussian: return theory::betaCorrGaussian(in);
    case BoundKind::CorrGaussianTall: return theory::betaCorrGaussianTall(in);
    case BoundKind::SubGaussian: return theory::betaSubGaussian(in);
    case BoundKind::SubGaussianTall: return theory::betaSubGaussianTall(in);
    default: break;
  }
  throw InvalidInput("bound: unsupported kind");
}

ReportTable boundCoverageCheck(const ExperimentPlan& plan, BoundKind kind) {
  plan.validate();
  ReportTable t = newTable(plan, {"bound", "beta", "rho", "empirical_coverage", "trials", "vacuous"},
                           nullptr);
  if (kind == BoundKind::TracyWidom) {
    if (plan.q.size() != 1) throw InvalidInput("tracy-widom coverage: give exactly one q");
    const auto iv = theory::tracyWidomInterval(plan.n, plan.p, plan.q.front());
    if (iv.probability <= 0.0) {
      throw PreconditionError("bound-coverage: success probability is 0, the check would be vacuous");
    }
    const auto hits = runTrials(plan, [&](std::size_t trial) {
      SeedStream rng = trialStream(plan, trial).child("train");
      const Vector s = numkern::singularValues(numkern::gaussianMatrix(plan.n, plan.p, rng));
      const bool ok = s.minCoeff() >= iv.lower && s.maxCoeff() <= iv.upper;
      return std::vector<double>{ok ? 1.0 : 0.0};
    });
    t.addRow({toString(kind), iv.upper, iv.probability, mean(column(hits, 0)),
              static_cast<long long>(plan.trials), static_cast<long long>(0)});
    t.provenance.emplace_back("interval_lower", csv::formatNumber(iv.lower));
    return t;
  }
  const PartitionSpec spec = fixedPartition(plan);
  const auto bound = evaluateBound(plan, kind, spec.sizes());
  if (bound.successProbability <= 0.0) {
    throw PreconditionError("bound-coverage: success probability is 0, the check would be vacuous");
  }
  const bool vacuous = !bound.finite();
  double coverage = 1.0;
  if (!vacuous) {
    const DataSource source(plan);
    const auto hits = runTrials(plan, [&](std::size_t trial) {
      SeedStream rng = trialStream(plan, trial).child("train");
      const Matrix a = source.sample(plan.n, rng);
      const double normB = numkern::spectralNorm(cocoa::iterationMatrix(a, spec).B);
      return std::vector<double>{normB <= bound.beta ? 1.0 : 0.0};
    });
    coverage = mean(column(hits, 0));
  }
  t.addRow({toString(kind), bound.beta, bound.successProbability, coverage,
            static_cast<long long>(plan.trials), static_cast<long long>(vacuous ? 1 : 0)});
  return t;
}

ReportTable runExperiment(const ExperimentPlan& plan) {
  plan.validate();
  switch (plan.study) {
    case Study::PartitionSweep: return partitionSweep(plan);
    case Study::SpectralStudy: return spectralStudy(plan);
    case Study::ConvergenceStudy: return convergenceStudy(plan);
    case Study::NoiseStudy: return noiseStudy(plan);
    case Study::RegularizationStudy: return regularizationStudy(plan);
    case Study::HyperparamStudy: return hyperparamStudy(plan);
    case Study::McAverageCheck: return mcAverageCheck(plan);
    case Study::BoundCoverage: return boundCoverageCheck(plan, plan.bound);
  }
  throw InvalidInput("unknown study");
}

std::string toCsv(const ReportTable& table) {
  std::string out = csv::joinRow(table.header) + '\n';
  for (const auto& row : table.rows) {
    std::vector<std::string> fields;
    fields.reserve(row.size());
    for (const auto& cell : row) {
      if (const auto* d = std::get_if<double>(&cell)) {
        fields.push_back(csv::formatNumber(*d));
      } else if (const auto* i = std::get_if<long long>(&cell)) {
        fields.push_back(std::to_string(*i));
      } else {
        fields.push_back(std::get<std::string>(cell));
      }
    }
    out += csv::joinRow(fields) + '\n';
  }
  return out;
}

void emitCsv(const ReportTable& table, const std::string& path) { csv::writeFile(path, toCsv(table)); }

void emitProvenance(const ReportTable& table, const std::string& path) {
  std::string out;
  for (const auto& [key, value] : table.provenance) out += key + " = " + value + '\n';
  csv::writeFile(path, out);
}

}  // namespace fpcocoa::harness
