#include "fpcocoa/cocoa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpcocoa/csv.hpp"
#include "fpcocoa/errors.hpp"

namespace fpcocoa::cocoa {

std::vector<std::string> CocoaConfig::validate(int K) const {
  if (K < 1) throw InvalidInput("cocoa: K must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("cocoa: lambda must be >= 0");
  if (!(aggregation > 0.0 && aggregation <= 1.0)) {
    throw InvalidInput("cocoa: aggregation must lie in (0, 1]");
  }
  const double sigma = subproblemFor(K);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("cocoa: subproblem must be > 0");
  if (iterations < 0) throw InvalidInput("cocoa: iterations must be >= 0");
  if (earlyStopTol && !(*earlyStopTol > 0.0)) throw InvalidInput("cocoa: early-stop tolerance must be > 0");
  std::vector<std::string> warnings;
  if (sigma < aggregation * K) {
    warnings.push_back("subproblem " + csv::formatNumber(sigma) + " is below aggregation*K = " +
                       csv::formatNumber(aggregation * K) + "; convergence is not guaranteed");
  }
  return warnings;
}

LocalOperator makeLocalOperator(const Matrix& blockA, const CocoaConfig& config, int K) {
  // With A_k = U S V^T: (sigma A_k^T A_k + lambda I)^+ = V diag(1 / (sigma s^2 + lambda)) V^T
  // plus (I - V V^T) / lambda when lambda > 0. Working from the SVD of A_k keeps
  // the rank decision identical to pinv(A_k) and avoids squaring its condition number.
  const double sigma = config.subproblemFor(K);
  const auto f = numkern::svd(blockA);
  const auto pk = blockA.cols();
  const double smax = f.singularValues.size() > 0 ? f.singularValues(0) : 0.0;
  const double cut = numkern::kDefaultRankTol * smax * static_cast<double>(std::max(blockA.rows(), pk));
  Eigen::Index rank = 0;
  while (rank < f.singularValues.size() && f.singularValues(rank) > cut && f.singularValues(rank) > 0.0) {
    ++rank;
  }
  const Matrix v = f.rightVectors.leftCols(rank);
  const Vector s = f.singularValues.head(rank);
  const Vector inv = (sigma * s.array().square() + config.lambda).inverse().matrix();
  Matrix solve = v * inv.asDiagonal() * v.transpose();
  if (config.lambda > 0.0) {
    solve += (Matrix::Identity(pk, pk) - v * v.transpose()) / config.lambda;
  }
  return {solve};
}

NodeState localUpdate(const NodeState& node, const Vector& meanShare, const Vector& y,
                      const Matrix& blockA, const LocalOperator& op, const CocoaConfig& config,
                      int K, double* stepNorm) {
  const auto n = blockA.rows();
  const auto pk = blockA.cols();
  if (y.size() != n || meanShare.size() != n || node.localEstimate.size() != pk ||
      node.localShare.size() != n || op.solve.rows() != pk || op.solve.cols() != pk) {
    throw InvalidInput("localUpdate: dimension mismatch on node " + std::to_string(node.nodeId));
  }
  const Vector c = config.lambda * node.localEstimate - blockA.transpose() * (y - meanShare);
  const Vector dx = -(op.solve * c);
  NodeState next = node;
  next.localEstimate = node.localEstimate + config.aggregation * dx;
  next.localShare = meanShare + (config.aggregation * K) * (blockA * dx);
  if (stepNorm != nullptr) *stepNorm = dx.norm();
  return next;
}

NodeState localUpdate(const NodeState& node, const Vector& meanShare, const Vector& y,
                      const Matrix& blockA, const CocoaConfig& config, int K) {
  return localUpdate(node, meanShare, y, blockA, makeLocalOperator(blockA, config, K), config, K);
}

Vector aggregate(const std::vector<Vector>& shares) {
  if (shares.empty()) throw InvalidInput("aggregate: no shares");
  Vector sum = Vector::Zero(shares.front().size());
  for (const auto& s : shares) {
    if (s.size() != sum.size()) throw InvalidInput("aggregate: shares have unequal lengths");
    sum += s;
  }
  return sum / static_cast<double>(shares.size());
}

namespace {

/// One node worker: owns its column block, its cached local solve and its state.
class NodeWorker {
 public:
  NodeWorker(int id, Matrix block, const CocoaConfig& config, int K)
      : block_(std::move(block)), op_(makeLocalOperator(block_, config, K)) {
    state_.nodeId = id;
    state_.localEstimate = Vector::Zero(block_.cols());
    state_.localShare = Vector::Zero(block_.rows());
  }

  ShareUpdate handle(const ShareBroadcast& msg, const Vector& y, const CocoaConfig& config, int K) {
    double step = 0.0;
    state_ = localUpdate(state_, msg.meanShare, y, block_, op_, config, K, &step);
    return {state_.nodeId, state_.localShare, step};
  }

  const NodeState& state() const { return state_; }

 private:
  Matrix block_;
  LocalOperator op_;
  NodeState state_;
};

Vector concatenateEstimates(const std::vector<NodeWorker>& nodes, int p) {
  Vector x(p);
  Eigen::Index offset = 0;
  for (const auto& node : nodes) {
    const auto& xk = node.state().localEstimate;
    x.segment(offset, xk.size()) = xk;
    offset += xk.size();
  }
  return x;
}

}  // namespace

SolveTrajectory runCocoa(const Matrix& a, const Vector& y, const PartitionSpec& spec,
                         const CocoaConfig& config, const RunOptions& options) {
  numkern::requireFinite(a, "runCocoa");
  if (y.size() != a.rows()) throw InvalidInput("runCocoa: y length does not match rows of A");
  const int K = spec.nodes();
  const int p = static_cast<int>(a.cols());
  SolveTrajectory out;
  out.warnings = config.validate(K);
  out.config = config;
  out.partition = spec;

  const auto blocks = datagen::partitionColumns(a, spec);
  std::vector<NodeWorker> nodes;
  nodes.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) nodes.emplace_back(k, blocks[static_cast<std::size_t>(k)], config, K);

  CoordinatorState coordinator{Vector::Zero(a.rows()), 0};
  std::vector<ShareUpdate> inbox(static_cast<std::size_t>(K));
  for (auto& u : inbox) u.share = Vector::Zero(a.rows());

  out.estimates.push_back(Vector::Zero(p));
  out.iterationsRecorded.push_back(0);
  for (int t = 0; t < config.iterations; ++t) {
    std::vector<Vector> shares;
    shares.reserve(inbox.size());
    for (const auto& u : inbox) shares.push_back(u.share);
    coordinator.meanShare = aggregate(shares);
    coordinator.iteration = t;
    const ShareBroadcast msg{t, coordinator.meanShare};

    forEach(static_cast<std::size_t>(K), options.nodes, [&](std::size_t k) {
      inbox[k] = nodes[k].handle(msg, y, config, K);
    });

    out.roundsRun = t + 1;
    bool stalled = false;
    if (config.earlyStopTol) {
      stalled = true;
      for (const auto& u : inbox) stalled = stalled && u.stepNorm < *config.earlyStopTol;
    }
    const bool last = t + 1 == config.iterations || stalled;
    if (options.record == Record::All || last) {
      out.estimates.push_back(concatenateEstimates(nodes, p));
      out.iterationsRecorded.push_back(t + 1);
    }
    if (stalled) break;
  }
  return out;
}

SolveTrajectory runCocoa(const datagen::TrainingSet& data, const PartitionSpec& spec,
                         const CocoaConfig& config, const RunOptions& options) {
  return runCocoa(data.regressors, data.observations, spec, config, options);
}

IterationOperator iterationMatrix(const Matrix& a, const PartitionSpec& spec, double tol) {
  const auto blocks = datagen::partitionColumns(a, spec);
  const int K = spec.nodes();
  IterationOperator op;
  op.K = K;
  op.Abar.resize(a.cols(), a.rows());
  Eigen::Index offset = 0;
  for (const auto& block : blocks) {
    op.Abar.middleRows(offset, block.cols()) = numkern::pseudoinverse(block, tol);
    offset += block.cols();
  }
  op.B = Matrix::Identity(a.cols(), a.cols()) - (op.Abar * a) / static_cast<double>(K);
  return op;
}

Vector stepRecursion(const Vector& current, const IterationOperator& op, const Vector& y, int K) {
  if (current.size() != op.B.cols() || y.size() != op.Abar.cols() || K < 1) {
    throw InvalidInput("stepRecursion: dimension mismatch");
  }
  return op.B * current + (op.Abar * y) / static_cast<double>(K);
}

Vector errorDecomposition(const IterationOperator& op, int t, const Vector& x, const Vector& w,
                          int K) {
  if (t < 0) throw InvalidInput("errorDecomposition: t must be >= 0");
  if (x.size() != op.B.cols() || w.size() != op.Abar.cols() || K < 1) {
    throw InvalidInput("errorDecomposition: dimension mismatch");
  }
  // B^t x and R_t w accumulated together: R_t w = (1/K) sum_{i<t} B^i (Abar w).
  Vector btx = x;
  const Vector abarW = op.Abar * w / static_cast<double>(K);
  Vector power = abarW;  // B^i Abar w / K
  Vector rtw = Vector::Zero(x.size());
  for (int i = 0; i < t; ++i) {
    btx = op.B * btx;
    rtw += power;
    power = op.B * power;
  }
  return btx - rtw;
}

Vector centralizedSolve(const Matrix& a, const Vector& y, double lambda) {
  if (y.size() != a.rows()) throw InvalidInput("centralizedSolve: dimension mismatch");
  if (!(lambda >= 0.0)) throw InvalidInput("centralizedSolve: lambda must be >= 0");
  if (lambda == 0.0) {
    // (A^T A)^+ A^T = A^+, computed directly to avoid squaring the condition number.
    return numkern::pseudoinverse(a) * y;
  }
  Matrix gram = a.transpose() * a;
  gram.diagonal().array() += lambda;
  return numkern::pseudoinverse(gram) * (a.transpose() * y);
}

double trainingError(const Matrix& a, const Vector& x, const Vector& estimate) {
  if (x.size() != a.cols() || estimate.size() != a.cols()) {
    throw InvalidInput("trainingError: dimension mismatch");
  }
  return (a * (x - estimate)).squaredNorm() / static_cast<double>(a.rows());
}

bool isProjection(const Matrix& b, double tol) {
  if (b.rows() != b.cols()) throw InvalidInput("isProjection: matrix is not square");
  return (b * b - b).norm() <= tol * std::max(1.0, b.norm());
}

std::string trajectoryCsv(const SolveTrajectory& trajectory) {
  std::string out = "iteration,node,component_index,value\n";
  const auto& spec = trajectory.partition;
  for (std::size_t r = 0; r < trajectory.estimates.size(); ++r) {
    const auto& x = trajectory.estimates[r];
    const std::string it = std::to_string(trajectory.iterationsRecorded[r]);
    for (int k = 0; k < spec.nodes(); ++k) {
      const int off = spec.offset(k);
      for (int j = 0; j < spec.size(k); ++j) {
        out += it + ',' + std::to_string(k) + ',' + std::to_string(j) + ',' +
               csv::formatNumber(x(off + j)) + '\n';
      }
    }
  }
  return out;
}

}  // namespace fpcocoa::cocoa
