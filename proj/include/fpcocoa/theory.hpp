#pragma once

// Analytical side of the solver: generalization / prediction error, the
// high-probability bounds on ||B|| with their success probabilities, the
// singular-value concentration intervals they are built from, and the exact
// average error after one round.
//
// Extended reals are plain doubles where +infinity is an explicit value
// (std::numeric_limits<double>::infinity()), never an overflow artifact.

#include <limits>
#include <string>
#include <vector>

#include "fpcocoa/datagen.hpp"
#include "fpcocoa/numkern.hpp"

namespace fpcocoa::theory {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sample count n and node sizes p_k.
class PartitionDims {
 public:
  /// Throws InvalidInput unless n >= 1 and every p_k >= 1.
  PartitionDims(int n, std::vector<int> sizes);

  int n() const { return n_; }
  const std::vector<int>& sizes() const { return sizes_; }
  int nodes() const { return static_cast<int>(sizes_.size()); }
  int rMin(int k) const;
  int rMax(int k) const;
  /// n < p_k.
  bool broad(int k) const;
  bool allTall() const;

 private:
  int n_;
  std::vector<int> sizes_;
};

/// Extreme eigenvalues of the principal submatrix Sigma_k.
struct BlockSpectrum {
  double max = 1.0;
  double min = 1.0;
};

/// Which l_k(q) the sub-gaussian bounds use. Scaled carries the n * sigma_max
/// factor of the concentration lemma; Literal drops it, as printed in the
/// block-diagonal theorem statement.
enum class EllForm { Scaled, Literal };

struct BoundInputs {
  PartitionDims dims;
  std::vector<double> q;     // q_k >= 0
  std::vector<double> qBar;  // q-bar_k >= 0; empty means all zero
  double C = 1.0;            // absolute constant
  std::vector<double> L;     // L_k >= 1; only the sub-gaussian bounds read it
  std::vector<BlockSpectrum> spectra;  // empty means Sigma = I
  EllForm ellForm = EllForm::Scaled;

  explicit BoundInputs(PartitionDims d) : dims(std::move(d)) {}
};

struct BoundResult {
  double beta = kInf;
  double successProbability = 0.0;

  bool finite() const { return beta < kInf; }
};

struct AverageErrorTerms {
  std::vector<double> alphas;
  std::vector<double> gammas;
  double total = 0.0;
};

/// (x - estimate)^T Sigma (x - estimate). Throws InvalidInput for an
/// asymmetric covariance or mismatched shapes.
double generalizationError(const Vector& x, const Vector& estimate, const Matrix& covariance);

/// kappa plus the irreducible test-noise variance.
double predictionError(double kappa, double testNoiseVariance);

struct SingularInterval {
  double lower;
  double upper;
  double probability;
  /// False when lower <= 0, i.e. the lower bound says nothing.
  bool informative;
};

/// Fluctuation interval for the extreme singular values of an n x p standard
/// Gaussian matrix: sqrt(rmax) -/+ sqrt(rmin) -/+ q with probability
/// (1 - 2 exp(-q^2 / 2))_+.
SingularInterval tracyWidomInterval(int n, int p, double q);

/// Isotropic Gaussian bound beta_G with rho_G = prod_k (1 - 2 exp(-q_k^2/2))_+.
/// Any used denominator sqrt(rmax_i) - sqrt(rmin_i) - q_i <= 0 gives +inf.
BoundResult betaIsoGaussian(const PartitionDims& dims, const std::vector<double>& q);

/// Tall-only variant sqrt((K-1)^2/K + (1/K^2) sum gamma_ki). Throws
/// PreconditionError if some p_k > n.
BoundResult betaIsoGaussianTall(const PartitionDims& dims, const std::vector<double>& q);

/// Correlated Gaussian rows.
BoundResult betaCorrGaussian(const BoundInputs& in);
/// Tall-only correlated Gaussian; throws PreconditionError on a broad block.
BoundResult betaCorrGaussianTall(const BoundInputs& in);

/// Sub-gaussian rows with constants L_k.
BoundResult betaSubGaussian(const BoundInputs& in);
/// Tall-only sub-gaussian; throws PreconditionError on a broad block.
BoundResult betaSubGaussianTall(const BoundInputs& in);

struct TailBound {
  double ell;
  double lower;  // n sigma_min - ell, on sigma_min^2(M)
  double upper;  // n sigma_max + ell, on sigma_max^2(M)
  double probability;
};

/// Concentration of the squared extreme singular values of an n x p matrix
/// with sub-gaussian rows.
TailBound subgaussianTail(int n, int p, double spectrumMax, double spectrumMin, double L, double C,
                          double q, EllForm form = EllForm::Scaled);

/// l(q) alone.
double ell(int n, int p, double spectrumMax, double L2, double C, double q,
           EllForm form = EllForm::Scaled);

struct LowerBound {
  double lower;  // on sigma_min^2(M)
  double probability;
};

/// Lower bound on sigma_min^2 of a broad (n < p) matrix. The sub-gaussian form
/// uses C L^2 (sqrt(n) + qBar) with probability (1 - 2 exp(-qBar^2))_+; the
/// Gaussian form uses sqrt(n) + qBar with probability (1 - 2 exp(-qBar^2/2))_+.
/// Throws PreconditionError unless n < p.
LowerBound broadMinSingularBound(int n, int p, double spectrumMin, double L, double C, double qBar,
                                 bool gaussian = false);

/// Exact E[kappa(x^1)] for i.i.d. N(0,1) regressors. noiseTrace is tr(Sigma_w).
/// A zero weight times an infinite gamma contributes zero.
AverageErrorTerms avgGenError(const PartitionDims& dims, const std::vector<double>& blockNormsSquared,
                              double noiseTrace);

/// K + sum_{k != i} sigma_max^2(A_k) / sigma_min+^2(A_i).
double abarABoundRHS(const std::vector<double>& blockMaxSingulars,
                     const std::vector<double>& blockMinNonzeroSingulars);

/// ||Sigma|| beta^(2t) ||x||^2, with beta^0 = 1 and 0 * inf = 0.
double genErrBoundFromBeta(double beta, int t, double xNormSquared, double covSpectralNorm);

/// Extreme eigenvalues of each diagonal block of Sigma.
std::vector<BlockSpectrum> blockSpectra(const Matrix& covariance, const PartitionSpec& spec);

/// Smallest L >= 1 such that, over `directions` random unit directions h, the
/// empirical psi_2 norm of samples * h stays below L sqrt(h^T Sigma h). Uses a
/// bisection on E exp(z^2 / s^2) <= 2 per direction.
double estimateSubgaussianConstant(const Matrix& samples, const Matrix& covariance, int directions,
                                   SeedStream& rng);

/// CSV report `bound_name,K,n,p_list,q_list,C,beta,rho`; lists are
/// semicolon-separated inside one field.
std::string boundCsvHeader();
std::string boundCsvRow(const std::string& name, const PartitionDims& dims,
                        const std::vector<double>& q, double C, const BoundResult& result);

}  // namespace fpcocoa::theory
