// Command-line front end: data generation, a single solve, the experiment
// studies, and a bound calculator.

#include <CLI11.hpp>

#include <cmath>
#include <memory>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "fpcocoa/cocoa.hpp"
#include "fpcocoa/config.hpp"
#include "fpcocoa/csv.hpp"
#include "fpcocoa/datagen.hpp"
#include "fpcocoa/errors.hpp"
#include "fpcocoa/harness.hpp"
#include "fpcocoa/theory.hpp"

namespace {

using namespace fpcocoa;

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

// CLI flags that map one-to-one onto plan config keys.
struct PlanFlag {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr PlanFlag kPlanFlags[] = {
    {"--seed", "seed", "master seed"},
    {"--trials", "trials", "number of Monte Carlo trials"},
    {"--workers", "workers", "OpenMP workers for the trial loop (1 = serial, 0 = all)"},
    {"--model", "model", "iso-gaussian | corr-gaussian | bernoulli | random-features"},
    {"--n", "n", "training rows"},
    {"--p", "p", "model dimension"},
    {"--K", "K", "number of nodes"},
    {"--p1", "p1", "first-node sizes, comma separated"},
    {"--partition", "partition", "explicit node sizes, comma separated"},
    {"--iterations", "iterations", "CoCoA rounds T"},
    {"--test-rows", "test_rows", "test rows per trial (default 100 n)"},
    {"--noise", "noise_variances", "training noise variances, comma separated"},
    {"--lambda", "lambdas", "regularization values, comma separated"},
    {"--subproblem", "subproblems", "local penalties sigma, comma separated"},
    {"--aggregation", "aggregation", "aggregation gamma in (0, 1]"},
    {"--tolerance", "tolerance", "relative convergence tolerance"},
    {"--trace", "trace", "record every iteration (true/false)"},
    {"--bound", "bound", "bound kind for bound-coverage"},
    {"--q", "q", "q_k values, comma separated"},
    {"--q-bar", "q_bar", "q-bar_k values, comma separated"},
    {"--C", "C", "absolute constant"},
    {"--L", "L", "sub-gaussian constants L_k, comma separated"},
    {"--mc-blocks", "mc_blocks", "median-of-means blocks"},
    {"--mnist-images", "mnist_images", "IDX image file for the random-features model"},
    {"--equal-block-norms", "equal_block_norms", "rescale x so ||x_k||^2 = 1/K (true/false)"},
};

struct PlanCommand {
  CLI::App* app = nullptr;
  harness::ExperimentPlan defaults;
  std::map<std::string, std::string> overrides;
  std::string configPath;
  std::string outPath;
  bool summary = false;
};

void addPlanFlags(PlanCommand& cmd) {
  cmd.app->add_option("--config", cmd.configPath, "plan config file (key = value)");
  cmd.app->add_option("--out", cmd.outPath, "CSV output path (default stdout)");
  for (const auto& f : kPlanFlags) {
    const std::string key = f.key;
    cmd.app->add_option_function<std::string>(
        f.flag, [&cmd, key](const std::string& v) { cmd.overrides[key] = v; }, f.help);
  }
}

harness::ExperimentPlan resolvePlan(const PlanCommand& cmd) {
  config::KeyValues kv;
  if (!cmd.configPath.empty()) kv = config::KeyValues::load(cmd.configPath);
  for (const auto& [key, value] : cmd.overrides) kv.set(key, value);
  return harness::ExperimentPlan::fromConfig(kv, cmd.defaults);
}

void writeTable(const harness::ReportTable& table, const std::string& outPath) {
  if (outPath.empty()) {
    std::cout << harness::toCsv(table);
    return;
  }
  harness::emitCsv(table, outPath);
  harness::emitProvenance(table, outPath + ".provenance");
}

struct GenDataArgs {
  std::string model = "iso-gaussian";
  int n = 75;
  int p = 200;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string prefix = "data";
};

int runGenData(const GenDataArgs& args) {
  if (!(args.noise >= 0.0)) throw InvalidInput("noise variance must be >= 0");
  harness::ExperimentPlan plan;
  plan.model = harness::parseDataModel(args.model);
  plan.n = args.n;
  plan.p = args.p;
  plan.masterSeed = args.seed;
  plan.validate();
  const harness::DataSource source(plan);
  const Vector x = harness::planGroundTruth(plan);
  SeedStream rng = SeedStream(args.seed).child("gen-data");
  const Matrix a = source.sample(args.n, rng);
  Vector y = a * x;
  if (args.noise > 0.0) {
    const double sd = std::sqrt(args.noise);
    for (int i = 0; i < args.n; ++i) y(i) += sd * rng.normal();
  }
  datagen::exportMatrixCsv(a, args.prefix + "_A.csv");
  datagen::exportMatrixCsv(y, args.prefix + "_y.csv");
  datagen::exportMatrixCsv(x, args.prefix + "_x.csv");
  std::cerr << "wrote " << args.prefix << "_{A,y,x}.csv (" << source.label() << ")\n";
  return 0;
}

struct SolveArgs {
  std::string aPath;
  std::string yPath;
  std::vector<int> partition;
  double lambda = 0.0;
  double aggregation = 1.0;
  double subproblem = 0.0;  // 0 means aggregation * K
  int iterations = 1000;
  bool all = false;
  std::string outPath;
  std::string configPath;
};

int runSolve(SolveArgs args) {
  if (!args.configPath.empty()) {
    const auto kv = config::KeyValues::load(args.configPath);
    const auto unknown = kv.unknownKeys({"lambda", "aggregation", "subproblem", "iterations", "partition"});
    if (!unknown.empty()) throw InvalidInput("config: unknown key '" + unknown.front() + "'");
    if (auto v = kv.number("lambda")) args.lambda = *v;
    if (auto v = kv.number("aggregation")) args.aggregation = *v;
    if (auto v = kv.number("subproblem")) args.subproblem = *v;
    if (auto v = kv.integer("iterations")) args.iterations = static_cast<int>(*v);
    if (auto v = kv.integerList("partition"); v && args.partition.empty()) args.partition = *v;
  }
  const Matrix a = datagen::importMatrixCsv(args.aPath);
  const Matrix yCol = datagen::importMatrixCsv(args.yPath);
  if (yCol.cols() != 1) throw InvalidInput("y must be a single column");
  const Vector y = yCol.col(0);
  const PartitionSpec spec = args.partition.empty()
                                 ? PartitionSpec::even(static_cast<int>(a.cols()), 1)
                                 : PartitionSpec(args.partition);
  cocoa::CocoaConfig cfg;
  cfg.lambda = args.lambda;
  cfg.aggregation = args.aggregation;
  if (args.subproblem > 0.0) cfg.subproblem = args.subproblem;
  cfg.iterations = args.iterations;
  const auto traj = cocoa::runCocoa(a, y, spec, cfg,
                                    {args.all ? cocoa::Record::All : cocoa::Record::Endpoints, {}});
  for (const auto& w : traj.warnings) std::cerr << "warning: " << w << '\n';
  const std::string out = cocoa::trajectoryCsv(traj);
  if (args.outPath.empty()) {
    std::cout << out;
  } else {
    csv::writeFile(args.outPath, out);
  }
  std::cerr << "training error " << csv::formatNumber((a * traj.final() - y).squaredNorm() / a.rows())
            << " after " << traj.roundsRun << " rounds\n";
  return 0;
}

struct BoundsArgs {
  std::string kind = "iso-gaussian";
  int n = 75;
  std::vector<int> partition{100, 100};
  std::vector<double> q;
  std::vector<double> qBar;
  double C = 1.0;
  std::vector<double> L;
  std::string ellForm = "scaled";
  std::string model = "iso-gaussian";
  std::uint64_t seed = 0;
};

int runBounds(const BoundsArgs& args) {
  harness::ExperimentPlan plan;
  plan.n = args.n;
  plan.partition = args.partition;
  plan.K = static_cast<int>(args.partition.size());
  plan.p = 0;
  for (int pk : args.partition) plan.p += pk;
  plan.q = args.q.empty() ? std::vector<double>(args.partition.size(), 0.0) : args.q;
  plan.qBar = args.qBar;
  plan.C = args.C;
  plan.L = args.L;
  plan.model = harness::parseDataModel(args.model);
  plan.masterSeed = args.seed;
  if (args.ellForm == "literal") {
    plan.ellForm = theory::EllForm::Literal;
  } else if (args.ellForm != "scaled") {
    throw InvalidInput("--ell-form must be scaled or literal");
  }
  plan.validate();
  const auto kind = harness::parseBoundKind(args.kind);
  const auto result = harness::evaluateBound(plan, kind, args.partition);
  std::cout << theory::boundCsvHeader() << '\n'
            << theory::boundCsvRow(args.kind, theory::PartitionDims(args.n, args.partition), plan.q,
                                   args.C, result)
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-partitioned CoCoA: solver, experiments and generalization bounds"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* genCmd = app.add_subcommand("gen-data", "sample A, y = A x + w and x; write CSV");
  genCmd->add_option("--model", gen.model, "regressor model");
  genCmd->add_option("--n", gen.n, "rows");
  genCmd->add_option("--p", gen.p, "columns");
  genCmd->add_option("--noise", gen.noise, "noise variance");
  genCmd->add_option("--seed", gen.seed, "master seed");
  genCmd->add_option("--out", gen.prefix, "output prefix: <prefix>_A.csv, _y.csv, _x.csv");

  SolveArgs solve;
  auto* solveCmd = app.add_subcommand("solve", "run CoCoA on CSV data");
  solveCmd->add_option("--a", solve.aPath, "regressor matrix CSV")->required();
  solveCmd->add_option("--y", solve.yPath, "observation CSV (one column)")->required();
  solveCmd->add_option("--partition", solve.partition, "node sizes")->delimiter(',');
  solveCmd->add_option("--lambda", solve.lambda, "regularization");
  solveCmd->add_option("--aggregation", solve.aggregation, "aggregation gamma");
  solveCmd->add_option("--subproblem", solve.subproblem, "local penalty sigma");
  solveCmd->add_option("--iterations", solve.iterations, "rounds T");
  solveCmd->add_flag("--all", solve.all, "write every iterate, not just x^0 and x^T");
  solveCmd->add_option("--out", solve.outPath, "trajectory CSV (default stdout)");
  solveCmd->add_option("--config", solve.configPath, "solver config file");

  std::vector<std::unique_ptr<PlanCommand>> planCommands;
  auto planCommand = [&](const char* name, const char* help, harness::Study study) {
    auto cmd = std::make_unique<PlanCommand>();
    cmd->app = app.add_subcommand(name, help);
    cmd->defaults.study = study;
    addPlanFlags(*cmd);
    planCommands.push_back(std::move(cmd));
    return planCommands.back().get();
  };
  planCommand("sweep", "MSE versus the first node's size", harness::Study::PartitionSweep);
  planCommand("spectral", "per-trial ||B|| and MSE, ordered by ||B||", harness::Study::SpectralStudy);
  auto* converge = planCommand("converge", "mean MSE at every iteration", harness::Study::ConvergenceStudy);
  converge->defaults.iterations = 30;
  converge->defaults.p1Values = {25, 50, 75, 100};
  auto* noise = planCommand("noise", "MSE versus p1 at several noise levels", harness::Study::NoiseStudy);
  noise->defaults.noiseVariances = {0.0, 1.0, 2.0, 4.0};
  auto* reg = planCommand("regularize", "MSE versus p1 for several lambda", harness::Study::RegularizationStudy);
  reg->defaults.lambdas = {0.0, 1e-3, 1e-2, 1e-1};
  reg->defaults.noiseVariances = {1.0};
  auto* hyper = planCommand("hyperparam", "convergence for several subproblem values", harness::Study::HyperparamStudy);
  hyper->defaults.p1Values = {25, 50};
  hyper->defaults.trace = true;
  hyper->defaults.iterations = 200;
  hyper->app->add_flag("--summary", hyper->summary, "per-trial iterations to tolerance instead of traces");
  auto* mc = planCommand("mc-average", "Monte Carlo check of the average-error closed form", harness::Study::McAverageCheck);
  mc->defaults.n = 20;
  mc->defaults.p = 140;
  mc->defaults.partition = {60, 80};
  mc->defaults.trials = 5000;
  mc->defaults.equalBlockNorms = true;
  auto* cov = planCommand("bound-coverage", "empirical coverage of a ||B|| bound", harness::Study::BoundCoverage);
  cov->defaults.trials = 2000;

  BoundsArgs bounds;
  auto* boundsCmd = app.add_subcommand("bounds", "evaluate a bound on ||B|| without sampling");
  boundsCmd->add_option("--kind", bounds.kind, "bound kind");
  boundsCmd->add_option("--n", bounds.n, "rows");
  boundsCmd->add_option("--partition", bounds.partition, "node sizes")->delimiter(',');
  boundsCmd->add_option("--q", bounds.q, "q_k")->delimiter(',');
  boundsCmd->add_option("--q-bar", bounds.qBar, "q-bar_k")->delimiter(',');
  boundsCmd->add_option("--C", bounds.C, "absolute constant");
  boundsCmd->add_option("--L", bounds.L, "L_k")->delimiter(',');
  boundsCmd->add_option("--ell-form", bounds.ellForm, "scaled | literal");
  boundsCmd->add_option("--model", bounds.model, "model providing the block spectra");
  boundsCmd->add_option("--seed", bounds.seed, "seed of the correlated covariance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (genCmd->parsed()) return runGenData(gen);
    if (solveCmd->parsed()) return runSolve(solve);
    if (boundsCmd->parsed()) return runBounds(bounds);
    for (const auto& cmd : planCommands) {
      if (!cmd->app->parsed()) continue;
      const auto plan = resolvePlan(*cmd);
      const auto table = cmd->summary ? harness::hyperparamSummary(plan) : harness::runExperiment(plan);
      writeTable(table, cmd->outPath);
      return 0;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
