#include "fpcocoa/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpcocoa/csv.hpp"
#include "fpcocoa/errors.hpp"

namespace fpcocoa::theory {

PartitionDims::PartitionDims(int n, std::vector<int> sizes) : n_(n), sizes_(std::move(sizes)) {
  if (n_ < 1) throw InvalidInput("PartitionDims: n must be >= 1");
  if (sizes_.empty()) throw InvalidInput("PartitionDims: no nodes");
  for (int p : sizes_) {
    if (p < 1) throw InvalidInput("PartitionDims: block sizes must be >= 1");
  }
}

int PartitionDims::rMin(int k) const { return std::min(sizes_.at(static_cast<std::size_t>(k)), n_); }
int PartitionDims::rMax(int k) const { return std::max(sizes_.at(static_cast<std::size_t>(k)), n_); }
bool PartitionDims::broad(int k) const { return n_ < sizes_.at(static_cast<std::size_t>(k)); }
bool PartitionDims::allTall() const {
  return std::all_of(sizes_.begin(), sizes_.end(), [&](int p) { return p <= n_; });
}

namespace {

double positivePart(double v) { return v > 0.0 ? v : 0.0; }
double clampProbability(double v) { return std::clamp(v, 0.0, 1.0); }

void requireNonnegative(const std::vector<double>& v, std::size_t K, const char* what,
                        bool allowEmpty) {
  if (allowEmpty && v.empty()) return;
  if (v.size() != K) {
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(K) + " values, got " +
                       std::to_string(v.size()));
  }
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw InvalidInput(std::string(what) + ": values must be finite and >= 0");
    }
  }
}

// sum_k sum_{i != k} num_k / den_i; any used den_i <= 0 makes the sum +inf.
double crossSum(const std::vector<double>& num, const std::vector<double>& den) {
  const std::size_t K = num.size();
  if (K < 2) return 0.0;
  for (double d : den) {
    if (!(d > 0.0)) return kInf;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < K; ++i) {
      if (i != k) total += num[k] / den[i];
    }
  }
  return total;
}

double betaGeneral(double cross, int K) {
  if (cross == kInf) return kInf;
  return 1.0 + std::sqrt(static_cast<double>(K) + cross) / K;
}

double betaTall(double cross, int K) {
  if (cross == kInf) return kInf;
  const double k = K;
  return std::sqrt((k - 1.0) * (k - 1.0) / k + cross / (k * k));
}

BoundResult isoGaussianCore(const PartitionDims& dims, const std::vector<double>& q, bool tall) {
  const int K = dims.nodes();
  requireNonnegative(q, static_cast<std::size_t>(K), "isotropic bound q", false);
  std::vector<double> num(static_cast<std::size_t>(K));
  std::vector<double> den(static_cast<std::size_t>(K));
  double rho = 1.0;
  for (int k = 0; k < K; ++k) {
    const double sMax = std::sqrt(static_cast<double>(dims.rMax(k)));
    const double sMin = std::sqrt(static_cast<double>(dims.rMin(k)));
    const double qk = q[static_cast<std::size_t>(k)];
    const double gap = sMax - sMin - qk;
    num[static_cast<std::size_t>(k)] = (sMax + sMin + qk) * (sMax + sMin + qk);
    den[static_cast<std::size_t>(k)] = gap > 0.0 ? gap * gap : 0.0;
    rho *= positivePart(1.0 - 2.0 * std::exp(-qk * qk / 2.0));
  }
  const double cross = crossSum(num, den);
  return {tall ? betaTall(cross, K) : betaGeneral(cross, K), clampProbability(rho)};
}

struct BlockSetup {
  std::vector<double> qBar;
  std::vector<BlockSpectrum> spectra;
};

BlockSetup validateInputs(const BoundInputs& in) {
  const auto K = static_cast<std::size_t>(in.dims.nodes());
  requireNonnegative(in.q, K, "bound q", false);
  requireNonnegative(in.qBar, K, "bound qBar", true);
  if (!(in.C > 0.0) || !std::isfinite(in.C)) throw InvalidInput("bound: C must be > 0");
  if (!in.spectra.empty() && in.spectra.size() != K) {
    throw InvalidInput("bound: need one block spectrum per node");
  }
  for (const auto& s : in.spectra) {
    if (!(s.min > 0.0) || !(s.max >= s.min) || !std::isfinite(s.max)) {
      throw InvalidInput("bound: block spectra need max >= min > 0");
    }
  }
  BlockSetup out;
  out.qBar = in.qBar.empty() ? std::vector<double>(K, 0.0) : in.qBar;
  out.spectra = in.spectra.empty() ? std::vector<BlockSpectrum>(K) : in.spectra;
  return out;
}

std::vector<double> subgaussianL2(const BoundInputs& in) {
  const auto K = static_cast<std::size_t>(in.dims.nodes());
  if (!in.L.empty() && in.L.size() != K) throw InvalidInput("bound: need one L per node");
  std::vector<double> l2(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double L = in.L.empty() ? std::sqrt(8.0 / 3.0) : in.L[k];
    if (!(L >= 1.0) || !std::isfinite(L)) throw InvalidInput("bound: L must be >= 1");
    l2[k] = L * L;
  }
  return l2;
}

void requireTall(const PartitionDims& dims, const char* what) {
  if (!dims.allTall()) throw PreconditionError(std::string(what) + ": requires n >= p_k for every node");
}

// Shared core of the correlated Gaussian and sub-gaussian bounds. The two
// differ only in L^2, the broad-block eta, and the broad-block tail exponent.
BoundResult correlatedCore(const BoundInputs& in, const std::vector<double>& l2, bool gaussianBroad,
                           EllForm form, bool tallForm) {
  const BlockSetup setup = validateInputs(in);
  const int K = in.dims.nodes();
  const double n = in.dims.n();
  std::vector<double> num(static_cast<std::size_t>(K));
  std::vector<double> eta(static_cast<std::size_t>(K));
  double failure = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const int p = in.dims.sizes()[kk];
    const auto& s = setup.spectra[kk];
    const double qk = in.q[kk];
    const double lk = ell(in.dims.n(), p, s.max, l2[kk], in.C, qk, form);
    num[kk] = n * s.max + lk;
    failure += 2.0 * std::exp(-qk);
    if (!in.dims.broad(k)) {
      eta[kk] = positivePart(n * s.min - lk);
    } else {
      const double qb = setup.qBar[kk];
      const double shift = gaussianBroad ? std::sqrt(n) + qb : in.C * l2[kk] * (std::sqrt(n) + qb);
      const double gap = positivePart(std::sqrt(static_cast<double>(p)) - shift);
      eta[kk] = s.min * gap * gap;
      failure += 2.0 * std::exp(gaussianBroad ? -qb * qb / 2.0 : -qb * qb);
    }
  }
  const double cross = crossSum(num, eta);
  return {tallForm ? betaTall(cross, K) : betaGeneral(cross, K), clampProbability(1.0 - failure)};
}

}  // namespace

double generalizationError(const Vector& x, const Vector& estimate, const Matrix& covariance) {
  if (x.size() != estimate.size() || covariance.rows() != x.size() ||
      covariance.cols() != x.size()) {
    throw InvalidInput("generalizationError: dimension mismatch");
  }
  if (!numkern::isSymmetric(covariance)) {
    throw InvalidInput("generalizationError: covariance is not symmetric");
  }
  const Vector d = x - estimate;
  return std::max(0.0, d.dot(covariance * d));
}

double predictionError(double kappa, double testNoiseVariance) {
  if (!(kappa >= 0.0) || !(testNoiseVariance >= 0.0)) {
    throw InvalidInput("predictionError: arguments must be >= 0");
  }
  return kappa + testNoiseVariance;
}

SingularInterval tracyWidomInterval(int n, int p, double q) {
  if (n < 1 || p < 1) throw InvalidInput("tracyWidomInterval: n and p must be >= 1");
  if (!(q >= 0.0)) throw InvalidInput("tracyWidomInterval: q must be >= 0");
  const double sMax = std::sqrt(static_cast<double>(std::max(n, p)));
  const double sMin = std::sqrt(static_cast<double>(std::min(n, p)));
  const double lower = sMax - sMin - q;
  return {lower, sMax + sMin + q, clampProbability(1.0 - 2.0 * std::exp(-q * q / 2.0)), lower > 0.0};
}

BoundResult betaIsoGaussian(const PartitionDims& dims, const std::vector<double>& q) {
  return isoGaussianCore(dims, q, false);
}

BoundResult betaIsoGaussianTall(const PartitionDims& dims, const std::vector<double>& q) {
  requireTall(dims, "betaIsoGaussianTall");
  return isoGaussianCore(dims, q, true);
}

BoundResult betaCorrGaussian(const BoundInputs& in) {
  const std::vector<double> l2(static_cast<std::size_t>(in.dims.nodes()), 8.0 / 3.0);
  return correlatedCore(in, l2, true, EllForm::Scaled, false);
}

BoundResult betaCorrGaussianTall(const BoundInputs& in) {
  requireTall(in.dims, "betaCorrGaussianTall");
  const std::vector<double> l2(static_cast<std::size_t>(in.dims.nodes()), 8.0 / 3.0);
  return correlatedCore(in, l2, true, EllForm::Scaled, true);
}

BoundResult betaSubGaussian(const BoundInputs& in) {
  return correlatedCore(in, subgaussianL2(in), false, in.ellForm, false);
}

BoundResult betaSubGaussianTall(const BoundInputs& in) {
  requireTall(in.dims, "betaSubGaussianTall");
  return correlatedCore(in, subgaussianL2(in), false, in.ellForm, false);
}

double ell(int n, int p, double spectrumMax, double L2, double C, double q, EllForm form) {
  if (n < 1 || p < 1) throw InvalidInput("ell: n and p must be >= 1");
  if (!(q >= 0.0) || !(C > 0.0) || !(L2 > 0.0) || !(spectrumMax > 0.0)) {
    throw InvalidInput("ell: constants must be positive and q >= 0");
  }
  const double r = (p + q) / n;
  const double g = std::sqrt(r) + r;
  if (form == EllForm::Literal) return L2 * C * g;
  return L2 * C * g * (n * spectrumMax);
}

TailBound subgaussianTail(int n, int p, double spectrumMax, double spectrumMin, double L, double C,
                          double q, EllForm form) {
  if (!(L >= 1.0)) throw InvalidInput("subgaussianTail: L must be >= 1");
  if (!(spectrumMin > 0.0) || !(spectrumMax >= spectrumMin)) {
    throw InvalidInput("subgaussianTail: need spectrumMax >= spectrumMin > 0");
  }
  const double l = ell(n, p, spectrumMax, L * L, C, q, form);
  return {l, n * spectrumMin - l, n * spectrumMax + l,
          clampProbability(1.0 - 2.0 * std::exp(-q))};
}

LowerBound broadMinSingularBound(int n, int p, double spectrumMin, double L, double C, double qBar,
                                 bool gaussian) {
  if (n < 1 || !(n < p)) throw PreconditionError("broadMinSingularBound: requires 1 <= n < p");
  if (!(spectrumMin > 0.0) || !(C > 0.0) || !(L >= 1.0) || !(qBar >= 0.0)) {
    throw InvalidInput("broadMinSingularBound: constants must be positive and qBar >= 0");
  }
  const double shift = gaussian ? std::sqrt(static_cast<double>(n)) + qBar
                                : C * L * L * (std::sqrt(static_cast<double>(n)) + qBar);
  const double gap = positivePart(std::sqrt(static_cast<double>(p)) - shift);
  const double exponent = gaussian ? -qBar * qBar / 2.0 : -qBar * qBar;
  return {spectrumMin * gap * gap, clampProbability(1.0 - 2.0 * std::exp(exponent))};
}

AverageErrorTerms avgGenError(const PartitionDims& dims, const std::vector<double>& blockNormsSquared,
                              double noiseTrace) {
  const int K = dims.nodes();
  requireNonnegative(blockNormsSquared, static_cast<std::size_t>(K), "avgGenError norms", false);
  if (!(noiseTrace >= 0.0)) throw InvalidInput("avgGenError: noiseTrace must be >= 0");
  AverageErrorTerms out;
  out.gammas.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const int lo = dims.rMin(k);
    const int hi = dims.rMax(k);
    out.gammas[static_cast<std::size_t>(k)] =
        hi - lo <= 1 ? kInf : static_cast<double>(lo) / (hi - lo - 1);
  }
  const double k2 = static_cast<double>(K) * K;
  double gammaSum = 0.0;
  for (double g : out.gammas) gammaSum += g;
  out.alphas.resize(static_cast<std::size_t>(K));
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    double others = 0.0;
    for (int i = 0; i < K; ++i) {
      if (i != k) others += out.gammas[static_cast<std::size_t>(i)];
    }
    const double ratio = static_cast<double>(dims.rMin(k)) / dims.sizes()[kk];
    out.alphas[kk] = (k2 + (1.0 - 2.0 * K) * ratio + others) / k2;
    if (blockNormsSquared[kk] > 0.0) total += blockNormsSquared[kk] * out.alphas[kk];
  }
  // With white noise, E tr(A_k^+ Sigma_w A_k^+T) = tr(Sigma_w) gamma_k / n.
  if (noiseTrace > 0.0) total += noiseTrace / (dims.n() * k2) * gammaSum;
  out.total = total;
  return out;
}

double abarABoundRHS(const std::vector<double>& blockMaxSingulars,
                     const std::vector<double>& blockMinNonzeroSingulars) {
  if (blockMaxSingulars.size() != blockMinNonzeroSingulars.size() || blockMaxSingulars.empty()) {
    throw InvalidInput("abarABoundRHS: need equal-length, nonempty lists");
  }
  const std::size_t K = blockMaxSingulars.size();
  for (double s : blockMinNonzeroSingulars) {
    if (!(s > 0.0)) throw InvalidInput("abarABoundRHS: minimum singular values must be positive");
  }
  double total = static_cast<double>(K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < K; ++i) {
      if (i == k) continue;
      const double r = blockMaxSingulars[k] / blockMinNonzeroSingulars[i];
      total += r * r;
    }
  }
  return total;
}

double genErrBoundFromBeta(double beta, int t, double xNormSquared, double covSpectralNorm) {
  if (!(beta >= 0.0) || t < 0 || !(xNormSquared >= 0.0) || !(covSpectralNorm >= 0.0)) {
    throw InvalidInput("genErrBoundFromBeta: arguments must be >= 0");
  }
  const double scale = covSpectralNorm * xNormSquared;
  if (t == 0 || scale == 0.0) return scale;
  if (beta == kInf) return kInf;
  return scale * std::pow(beta, 2.0 * t);
}

std::vector<BlockSpectrum> blockSpectra(const Matrix& covariance, const PartitionSpec& spec) {
  if (covariance.rows() != covariance.cols()) throw InvalidInput("blockSpectra: covariance not square");
  spec.requireTotal(static_cast<int>(covariance.rows()));
  if (!numkern::isSymmetric(covariance)) throw InvalidInput("blockSpectra: covariance not symmetric");
  std::vector<BlockSpectrum> out;
  for (int k = 0; k < spec.nodes(); ++k) {
    const Matrix block = covariance.block(spec.offset(k), spec.offset(k), spec.size(k), spec.size(k));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(block, Eigen::EigenvaluesOnly);
    const Vector& ev = eig.eigenvalues();
    out.push_back({ev.maxCoeff(), ev.minCoeff()});
  }
  return out;
}

double estimateSubgaussianConstant(const Matrix& samples, const Matrix& covariance, int directions,
                                   SeedStream& rng) {
  const auto p = samples.cols();
  if (samples.rows() < 1 || covariance.rows() != p || covariance.cols() != p || directions < 1) {
    throw InvalidInput("estimateSubgaussianConstant: dimension mismatch");
  }
  double worst = 1.0;
  for (int d = 0; d < directions; ++d) {
    Vector h(p);
    for (Eigen::Index j = 0; j < p; ++j) h(j) = rng.normal();
    h.normalize();
    const double variance = h.dot(covariance * h);
    if (!(variance > 0.0)) continue;
    const Vector z = samples * h;
    const double zMax = z.cwiseAbs().maxCoeff();
    if (zMax == 0.0) continue;
    auto moment = [&](double s) { return (z.array().square() / (s * s)).exp().mean(); };
    // exp(z^2/s^2) <= 2 pointwise once s >= zMax / sqrt(ln 2).
    double lo = 0.0;
    double hi = zMax / std::sqrt(std::log(2.0)) * (1.0 + 1e-12);
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (moment(mid) <= 2.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    worst = std::max(worst, hi / std::sqrt(variance));
  }
  return worst;
}

std::string boundCsvHeader() { return "bound_name,K,n,p_list,q_list,C,beta,rho"; }

std::string boundCsvRow(const std::string& name, const PartitionDims& dims,
                        const std::vector<double>& q, double C, const BoundResult& result) {
  std::string pList;
  for (std::size_t k = 0; k < dims.sizes().size(); ++k) {
    if (k) pList += ';';
    pList += std::to_string(dims.sizes()[k]);
  }
  std::string qList;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (k) qList += ';';
    qList += csv::formatNumber(q[k]);
  }
  return csv::joinRow({name, std::to_string(dims.nodes()), std::to_string(dims.n()), pList, qList,
                       csv::formatNumber(C), csv::formatNumber(result.beta),
                       csv::formatNumber(result.successProbability)});
}

}  // namespace fpcocoa::theory
