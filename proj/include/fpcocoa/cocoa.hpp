#pragma once

// Feature-partitioned CoCoA for ridge / least-squares regression, organized
// as a coordinator and K node workers exchanging share messages, together
// with the closed-form iteration operator that governs its error.

#include <optional>
#include <string>
#include <vector>

#include "fpcocoa/datagen.hpp"
#include "fpcocoa/numkern.hpp"
#include "fpcocoa/parallel.hpp"

namespace fpcocoa::cocoa {

struct CocoaConfig {
  double lambda = 0.0;       // regularization
  double aggregation = 1.0;  // in (0, 1]
  /// Local penalty; unset means aggregation * K.
  std::optional<double> subproblem;
  int iterations = 1000;
  /// Stop once every node's ||dx_k|| falls below this; off when unset.
  std::optional<double> earlyStopTol;

  double subproblemFor(int K) const { return subproblem.value_or(aggregation * K); }
  /// smoothness of f(v) = 0.5 ||y - v||^2, fixed.
  static constexpr double smoothness = 1.0;

  /// Throws InvalidInput for out-of-range values; returns advisory warnings
  /// (e.g. subproblem below aggregation * K) for valid ones.
  std::vector<std::string> validate(int K) const;
};

struct NodeState {
  int nodeId = 0;
  Vector localEstimate;  // length p_k
  Vector localShare;     // length n
};

struct CoordinatorState {
  Vector meanShare;  // length n
  int iteration = 0;
};

/// Coordinator -> node message for round t.
struct ShareBroadcast {
  int iteration = 0;
  Vector meanShare;
};

/// Node -> coordinator message for round t.
struct ShareUpdate {
  int nodeId = 0;
  Vector share;
  double stepNorm = 0.0;  // ||dx_k||
};

/// The fixed local solve (sigma A_k^T A_k + lambda I)^+ for one node.
struct LocalOperator {
  Matrix solve;
};

LocalOperator makeLocalOperator(const Matrix& blockA, const CocoaConfig& config, int K);

/// One local step: c = lambda x_k - A_k^T (y - vbar); dx = -(sigma A_k^T A_k + lambda I)^+ c;
/// x_k += gamma dx; v_k = vbar + gamma K A_k dx.
NodeState localUpdate(const NodeState& node, const Vector& meanShare, const Vector& y,
                      const Matrix& blockA, const LocalOperator& op, const CocoaConfig& config,
                      int K, double* stepNorm = nullptr);
NodeState localUpdate(const NodeState& node, const Vector& meanShare, const Vector& y,
                      const Matrix& blockA, const CocoaConfig& config, int K);

/// Arithmetic mean of the node shares. Throws InvalidInput for an empty list
/// or unequal lengths.
Vector aggregate(const std::vector<Vector>& shares);

struct SolveTrajectory {
  std::vector<Vector> estimates;  // x^0 ... x^T (or the recorded subset)
  std::vector<int> iterationsRecorded;
  CocoaConfig config;
  PartitionSpec partition;
  int roundsRun = 0;
  std::vector<std::string> warnings;

  const Vector& final() const { return estimates.back(); }
};

enum class Record { All, Endpoints };

struct RunOptions {
  Record record = Record::All;
  /// Node updates inside a round; the aggregate is the barrier.
  ExecutionPolicy nodes = ExecutionPolicy::serial();
};

/// Coordinator/worker state machine: T rounds of broadcast, local updates,
/// and aggregation. estimates[0] is the zero vector.
SolveTrajectory runCocoa(const Matrix& a, const Vector& y, const PartitionSpec& spec,
                         const CocoaConfig& config, const RunOptions& options = {});
SolveTrajectory runCocoa(const datagen::TrainingSet& data, const PartitionSpec& spec,
                         const CocoaConfig& config, const RunOptions& options = {});

/// B = I - (1/K) Abar A, with Abar the vertical stack of the block pseudoinverses.
struct IterationOperator {
  Matrix B;
  Matrix Abar;
  int K = 1;
};

IterationOperator iterationMatrix(const Matrix& a, const PartitionSpec& spec,
                                  double tol = numkern::kDefaultRankTol);

/// x^{t+1} = B x^t + (1/K) Abar y.
Vector stepRecursion(const Vector& current, const IterationOperator& op, const Vector& y, int K);

/// Error vector x - x^t = B^t x - R_t w, R_t = (1/K) sum_{i<t} B^i Abar.
Vector errorDecomposition(const IterationOperator& op, int t, const Vector& x, const Vector& w,
                          int K);

/// (A^T A + lambda I)^+ A^T y; minimum-norm least squares when lambda = 0.
Vector centralizedSolve(const Matrix& a, const Vector& y, double lambda);

/// (1/n) ||A (x - estimate)||^2.
double trainingError(const Matrix& a, const Vector& x, const Vector& estimate);

/// ||B^2 - B||_F <= tol * max(1, ||B||_F). Throws InvalidInput if B is not square.
bool isProjection(const Matrix& b, double tol);

/// CSV `iteration,node,component_index,value`; component_index is the
/// position inside the node's block.
std::string trajectoryCsv(const SolveTrajectory& trajectory);

}  // namespace fpcocoa::cocoa
