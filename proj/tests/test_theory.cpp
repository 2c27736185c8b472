#include <gtest/gtest.h>

#include <cmath>

#include "fpcocoa/cocoa.hpp"
#include "fpcocoa/csv.hpp"
#include "fpcocoa/errors.hpp"
#include "fpcocoa/theory.hpp"
#include "oracles.hpp"

using namespace fpcocoa;
using namespace fpcocoa::theory;

namespace {

Matrix codPinv(const Matrix& m) { return m.completeOrthogonalDecomposition().pseudoInverse(); }

// Independent transcription of the two-node isotropic bound.
double isoBetaTwoNodes(int n, int p1, int p2, double q1, double q2) {
  auto parts = [n](int p, double q, double& num, double& den) {
    const double a = std::sqrt(double(std::max(n, p)));
    const double b = std::sqrt(double(std::min(n, p)));
    num = std::pow(a + b + q, 2);
    den = std::pow(std::max(0.0, a - b - q), 2);
  };
  double n1, d1, n2, d2;
  parts(p1, q1, n1, d1);
  parts(p2, q2, n2, d2);
  if (d1 == 0.0 || d2 == 0.0) return kInf;
  return 1.0 + std::sqrt(2.0 + n1 / d2 + n2 / d1) / 2.0;
}

double ellOracle(int n, int p, double smax, double L2, double C, double q) {
  const double r = (p + q) / double(n);
  return L2 * n * smax * C * (std::sqrt(r) + r);
}

}  // namespace

TEST(GeneralizationError, Definition) {
  Vector x(2), e(2);
  x << 1, 2;
  e << 0, 0;
  EXPECT_DOUBLE_EQ(generalizationError(x, x, Matrix::Identity(2, 2)), 0.0);
  EXPECT_DOUBLE_EQ(generalizationError(x, e, Matrix::Identity(2, 2)), 5.0);
  Matrix s(2, 2);
  s << 2, 1, 1, 3;
  EXPECT_DOUBLE_EQ(generalizationError(x, e, s), 2 + 4 + 12);
  s(0, 1) = 0;
  EXPECT_THROW(generalizationError(x, e, s), InvalidInput);
  EXPECT_THROW(generalizationError(x, Vector::Zero(3), Matrix::Identity(2, 2)), InvalidInput);
}

TEST(PredictionError, AddsNoise) {
  EXPECT_EQ(predictionError(0, 0), 0.0);
  EXPECT_EQ(predictionError(0.5, 1), 1.5);
  EXPECT_THROW(predictionError(-1, 0), InvalidInput);
}

TEST(TracyWidom, HandValues) {
  const auto iv = tracyWidomInterval(75, 25, 2.0);
  EXPECT_NEAR(iv.lower, std::sqrt(75.0) - 5 - 2, 1e-12);
  EXPECT_NEAR(iv.lower, 1.6603, 1e-4);
  EXPECT_NEAR(iv.upper, 15.6603, 1e-4);
  EXPECT_NEAR(iv.probability, 1 - 2 * std::exp(-2.0), 1e-12);
  EXPECT_NEAR(iv.probability, 0.7293, 1e-4);
  EXPECT_TRUE(iv.informative);
  EXPECT_EQ(tracyWidomInterval(10, 30, 0.0).probability, 0.0);
  const auto eq = tracyWidomInterval(40, 40, 1.5);
  EXPECT_DOUBLE_EQ(eq.lower, -1.5);
  EXPECT_FALSE(eq.informative);
  EXPECT_EQ(tracyWidomInterval(30, 10, 1.0).upper, tracyWidomInterval(10, 30, 1.0).upper);
}

TEST(IsoGaussian, SingleNodeIsTwo) {
  for (double q : {0.0, 1.0, 3.0}) {
    const auto r = betaIsoGaussian(PartitionDims(50, {20}), {q});
    EXPECT_EQ(r.beta, 2.0);
    EXPECT_DOUBLE_EQ(r.successProbability, std::max(0.0, 1 - 2 * std::exp(-q * q / 2)));
  }
}

TEST(IsoGaussian, TwoBroadNodesHandValue) {
  const auto r = betaIsoGaussian(PartitionDims(75, {100, 100}), {0, 0});
  const double gbar = std::pow(10 + std::sqrt(75.0), 2) / std::pow(10 - std::sqrt(75.0), 2);
  EXPECT_NEAR(gbar, 194.0, 0.1);
  EXPECT_NEAR(r.beta, 1 + std::sqrt(2 + 2 * gbar) / 2, 1e-12);
  EXPECT_NEAR(r.beta, 10.875, 1e-3);
  EXPECT_EQ(r.successProbability, 0.0);
}

TEST(IsoGaussian, MatchesOracleOverGrid) {
  for (int n : {20, 40, 75})
    for (int p1 : {5, 15, 60, 120})
      for (int p2 : {8, 30, 100})
        for (double q : {0.0, 0.5, 1.5}) {
          const auto r = betaIsoGaussian(PartitionDims(n, {p1, p2}), {q, q + 0.25});
          const double o = isoBetaTwoNodes(n, p1, p2, q, q + 0.25);
          if (o == kInf) {
            EXPECT_EQ(r.beta, kInf);
          } else {
            EXPECT_NEAR(r.beta, o, 1e-12 * o);
          }
        }
}

TEST(IsoGaussian, EqualDimensionsGiveInfinity) {
  EXPECT_EQ(betaIsoGaussian(PartitionDims(30, {30, 10}), {0, 0}).beta, kInf);
  EXPECT_FALSE(betaIsoGaussian(PartitionDims(30, {30, 10}), {0, 0}).finite());
  EXPECT_THROW(betaIsoGaussian(PartitionDims(30, {3, 10}), {0}), InvalidInput);
  EXPECT_THROW(betaIsoGaussian(PartitionDims(30, {3, 10}), {0, -1}), InvalidInput);
}

TEST(IsoGaussian, ProbabilityIsProductAndMonotone) {
  const PartitionDims dims(60, {10, 15, 20});
  const std::vector<double> q{1.0, 2.0, 2.5};
  double expected = 1.0;
  for (double v : q) expected *= std::max(0.0, 1 - 2 * std::exp(-v * v / 2));
  EXPECT_NEAR(betaIsoGaussian(dims, q).successProbability, expected, 1e-15);
  double prevBeta = 0.0, prevRho = -1.0;
  for (double s = 0.0; s < 2.0; s += 0.1) {
    const auto r = betaIsoGaussian(dims, {s, s, s});
    EXPECT_GE(r.beta, prevBeta);
    EXPECT_GE(r.successProbability, prevRho);
    EXPECT_GE(r.successProbability, 0.0);
    EXPECT_LE(r.successProbability, 1.0);
    prevBeta = r.beta;
    prevRho = r.successProbability;
  }
}

TEST(IsoGaussianTall, HandValues) {
  EXPECT_EQ(betaIsoGaussianTall(PartitionDims(50, {20}), {1.0}).beta, 0.0);
  const auto r = betaIsoGaussianTall(PartitionDims(75, {25, 25}), {0, 0});
  const double g = std::pow(std::sqrt(75.0) + 5, 2) / std::pow(std::sqrt(75.0) - 5, 2);
  EXPECT_NEAR(r.beta, std::sqrt(0.5 + 2 * g / 4), 1e-12);
  EXPECT_EQ(betaIsoGaussianTall(PartitionDims(75, {75, 25}), {0, 0}).beta, kInf);
  EXPECT_THROW(betaIsoGaussianTall(PartitionDims(75, {76, 25}), {0, 0}), PreconditionError);
}

TEST(IsoGaussianTall, NeverExceedsGeneralForm) {
  for (int p1 : {5, 20, 40})
    for (int p2 : {3, 30}) {
      const PartitionDims dims(50, {p1, p2});
      const auto tall = betaIsoGaussianTall(dims, {0.5, 0.5});
      const auto gen = betaIsoGaussian(dims, {0.5, 0.5});
      EXPECT_LE(tall.beta, gen.beta);
      EXPECT_EQ(tall.successProbability, gen.successProbability);
    }
}

TEST(Ell, FormulaAndMonotonicity) {
  EXPECT_NEAR(ell(100, 10, 1.0, 8.0 / 3.0, 1.0, 1.0), ellOracle(100, 10, 1.0, 8.0 / 3.0, 1.0, 1.0),
              1e-12);
  EXPECT_NEAR(ell(100, 10, 1.0, 8.0 / 3.0, 1.0, 1.0), 117.776, 1e-3);
  EXPECT_NEAR(ell(100, 10, 2.0, 1.0, 1.0, 1.0, EllForm::Literal), std::sqrt(0.11) + 0.11, 1e-15);
  double prev = 0.0;
  for (double q = 0; q < 10; q += 0.5) {
    const double v = ell(40, 12, 1.3, 2.0, 0.7, q);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_THROW(ell(0, 10, 1, 1, 1, 1), InvalidInput);
  EXPECT_THROW(ell(10, 10, 1, 1, 1, -1), InvalidInput);
}

TEST(SubgaussianTail, HandValue) {
  const double L = std::sqrt(8.0 / 3.0);
  const auto t = subgaussianTail(100, 10, 1.0, 1.0, L, 1.0, 1.0);
  const double l = ellOracle(100, 10, 1.0, 8.0 / 3.0, 1.0, 1.0);
  EXPECT_NEAR(t.ell, l, 1e-12);
  EXPECT_NEAR(t.lower, 100 - l, 1e-12);
  EXPECT_NEAR(t.upper, 100 + l, 1e-12);
  EXPECT_NEAR(t.probability, 1 - 2 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(subgaussianTail(100, 10, 1.0, 1.0, L, 1.0, 0.0).probability, 0.0);
  EXPECT_THROW(subgaussianTail(100, 10, 1.0, 1.0, 0.5, 1.0, 1.0), InvalidInput);
  EXPECT_THROW(subgaussianTail(100, 10, 1.0, 2.0, L, 1.0, 1.0), InvalidInput);
}

TEST(BroadMinSingular, HandValues) {
  const auto b = broadMinSingularBound(30, 31, 0.7, 1.0, 1.0, 0.0);
  EXPECT_NEAR(b.lower, 0.7 * std::pow(std::sqrt(31.0) - std::sqrt(30.0), 2), 1e-15);
  EXPECT_EQ(b.probability, 0.0);
  EXPECT_EQ(broadMinSingularBound(30, 40, 1.0, 1.0, 1.0, 100.0).lower, 0.0);
  const auto g = broadMinSingularBound(20, 200, 2.0, 5.0, 9.0, 2.0, true);
  EXPECT_NEAR(g.lower, 2.0 * std::pow(std::sqrt(200.0) - std::sqrt(20.0) - 2, 2), 1e-12);
  EXPECT_NEAR(g.probability, 1 - 2 * std::exp(-2.0), 1e-15);
  const auto s = broadMinSingularBound(20, 200, 1.0, 1.2, 0.5, 1.0);
  EXPECT_NEAR(s.lower, std::pow(std::sqrt(200.0) - 0.5 * 1.44 * (std::sqrt(20.0) + 1), 2), 1e-12);
  EXPECT_NEAR(s.probability, 1 - 2 * std::exp(-1.0), 1e-15);
  EXPECT_THROW(broadMinSingularBound(30, 30, 1, 1, 1, 0), PreconditionError);
}

TEST(BroadMinSingular, GaussianFormHoldsEmpirically) {
  SeedStream rng(31);
  const int n = 10, p = 60;
  const double qBar = 2.0;
  const auto bound = broadMinSingularBound(n, p, 1.0, 1.0, 1.0, qBar, true);
  int hits = 0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    const Matrix m = numkern::gaussianMatrix(n, p, rng);
    const Vector s = m.jacobiSvd().singularValues();
    if (s(n - 1) * s(n - 1) >= bound.lower) ++hits;
  }
  EXPECT_GE(double(hits) / trials, bound.probability - 0.05);
}

TEST(CorrGaussian, TinyConstantLimit) {
  for (int K : {2, 3, 4}) {
    BoundInputs in(PartitionDims(100, std::vector<int>(K, 10)));
    in.q.assign(K, 0.0);
    in.C = 1e-12;
    const auto r = betaCorrGaussian(in);
    EXPECT_NEAR(r.beta, 1 + std::sqrt(double(K) + K * (K - 1)) / K, 1e-8);
    const auto t = betaCorrGaussianTall(in);
    EXPECT_NEAR(t.beta, std::sqrt(K - 1.0), 1e-8);
  }
}

TEST(CorrGaussian, UnitConstantSpecExampleIsVacuous) {
  // With C = 1, l_k exceeds n sigma_min for p_k/n = 0.4, so every tall eta_k
  // is clamped to zero and the bound is infinite.
  SeedStream rng(3);
  const Matrix sigma = datagen::buildPaperCovariance(40, 0.9631, rng);
  BoundInputs in(PartitionDims(50, {20, 20}));
  in.q = {1, 1};
  in.C = 1.0;
  in.spectra = blockSpectra(sigma, PartitionSpec({20, 20}));
  const double l0 = ellOracle(50, 20, in.spectra[0].max, 8.0 / 3.0, 1.0, 1.0);
  EXPECT_GT(l0, 50 * in.spectra[0].max);
  const auto r = betaCorrGaussian(in);
  EXPECT_EQ(r.beta, kInf);
  EXPECT_NEAR(r.successProbability, std::max(0.0, 1 - 4 * std::exp(-1.0)), 1e-15);
}

TEST(CorrGaussian, FiniteInstanceMatchesOracle) {
  SeedStream rng(3);
  const Matrix sigma = datagen::buildPaperCovariance(40, 0.9631, rng);
  BoundInputs in(PartitionDims(50, {20, 20}));
  in.q = {1, 1};
  in.C = 1e-3;
  in.spectra = blockSpectra(sigma, PartitionSpec({20, 20}));
  const auto& s = in.spectra;
  const double l0 = ellOracle(50, 20, s[0].max, 8.0 / 3.0, 1e-3, 1.0);
  const double l1 = ellOracle(50, 20, s[1].max, 8.0 / 3.0, 1e-3, 1.0);
  const double g01 = (50 * s[0].max + l0) / (50 * s[1].min - l1);
  const double g10 = (50 * s[1].max + l1) / (50 * s[0].min - l0);
  const auto r = betaCorrGaussian(in);
  EXPECT_TRUE(r.finite());
  EXPECT_NEAR(r.beta, 1 + std::sqrt(2 + g01 + g10) / 2, 1e-12 * r.beta);
  EXPECT_EQ(r.successProbability, 0.0);  // 1 - 4/e < 0
  const auto t = betaCorrGaussianTall(in);
  EXPECT_NEAR(t.beta, std::sqrt(0.5 + (g01 + g10) / 4), 1e-12 * t.beta);
}

TEST(CorrGaussian, BroadBlockBranch) {
  BoundInputs in(PartitionDims(20, {10, 200}));
  in.q = {2, 2};
  in.qBar = {0, 1.5};
  in.C = 1e-3;
  const double l0 = ellOracle(20, 10, 1, 8.0 / 3.0, 1e-3, 2);
  const double l1 = ellOracle(20, 200, 1, 8.0 / 3.0, 1e-3, 2);
  const double eta1 = std::pow(std::sqrt(200.0) - std::sqrt(20.0) - 1.5, 2);
  const double g01 = (20 + l0) / eta1;
  const double g10 = (20 + l1) / (20 - l0);
  const auto r = betaCorrGaussian(in);
  EXPECT_NEAR(r.beta, 1 + std::sqrt(2 + g01 + g10) / 2, 1e-12 * r.beta);
  EXPECT_EQ(r.successProbability, 0.0);  // clamped
  in.q = {4, 4};
  in.qBar = {0, 3};
  EXPECT_NEAR(betaCorrGaussian(in).successProbability,
              1 - 4 * std::exp(-4.0) - 2 * std::exp(-4.5), 1e-15);
  in.qBar = {0, std::sqrt(200.0) - std::sqrt(20.0)};
  EXPECT_EQ(betaCorrGaussian(in).beta, kInf);
  EXPECT_THROW(betaCorrGaussianTall(in), PreconditionError);
}

TEST(SubGaussian, GaussianSpecializationIsExact) {
  SeedStream rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 10 + int(rng.next() % 60);
    const int K = 1 + int(rng.next() % 3);
    std::vector<int> sizes;
    for (int k = 0; k < K; ++k) sizes.push_back(1 + int(rng.next() % n));
    BoundInputs in(PartitionDims(n, sizes));
    for (int k = 0; k < K; ++k) {
      in.q.push_back(rng.uniform(0, 4));
      in.qBar.push_back(rng.uniform(0, 3));
      const double lo = rng.uniform(0.2, 1.0);
      in.spectra.push_back({lo + rng.uniform(0, 2), lo});
    }
    in.C = std::pow(10.0, rng.uniform(-5, 0));
    in.L.assign(K, std::sqrt(8.0 / 3.0));
    // Broad blocks use different tail constants, so identity holds on tall partitions.
    if (!in.dims.allTall()) continue;
    const auto g = betaCorrGaussian(in);
    const auto s = betaSubGaussian(in);
    EXPECT_EQ(g.beta, s.beta);
    EXPECT_EQ(g.successProbability, s.successProbability);
    EXPECT_EQ(betaSubGaussianTall(in).beta, g.beta);
  }
}

TEST(SubGaussian, MixedInstanceMatchesOracle) {
  BoundInputs in(PartitionDims(20, {10, 400}));
  in.q = {3, 3};
  in.qBar = {0, 2};
  in.C = 1e-2;
  in.L = {1.2, 1.5};
  const double l0 = ellOracle(20, 10, 1, 1.44, 1e-2, 3);
  const double l1 = ellOracle(20, 400, 1, 2.25, 1e-2, 3);
  const double eta1 = std::pow(std::sqrt(400.0) - 1e-2 * 2.25 * (std::sqrt(20.0) + 2), 2);
  const double g01 = (20 + l0) / eta1;
  const double g10 = (20 + l1) / (20 - l0);
  const auto r = betaSubGaussian(in);
  EXPECT_NEAR(r.beta, 1 + std::sqrt(2 + g01 + g10) / 2, 1e-12 * r.beta);
  EXPECT_NEAR(r.successProbability, 1 - 4 * std::exp(-3.0) - 2 * std::exp(-4.0), 1e-15);
  in.ellForm = EllForm::Literal;
  EXPECT_LT(betaSubGaussian(in).beta, r.beta);
}

TEST(SubGaussian, VacuousAndPreconditions) {
  BoundInputs in(PartitionDims(10, {50, 60}));
  in.q = {1, 1};
  in.qBar = {100, 100};
  EXPECT_EQ(betaSubGaussian(in).beta, kInf);
  EXPECT_THROW(betaSubGaussianTall(in), PreconditionError);
  BoundInputs one(PartitionDims(40, {10}));
  one.q = {1};
  one.C = 1e-3;
  EXPECT_EQ(betaSubGaussianTall(one).beta, 2.0);
  one.L = {0.5};
  EXPECT_THROW(betaSubGaussian(one), InvalidInput);
  one.L = {};
  one.C = 0;
  EXPECT_THROW(betaSubGaussian(one), InvalidInput);
}

TEST(AvgGenError, HandValues) {
  const auto a = avgGenError(PartitionDims(75, {25, 40}), {0.3, 0.7}, 0.0);
  EXPECT_NEAR(a.gammas[0], 25.0 / 49.0, 1e-15);
  EXPECT_NEAR(a.gammas[0], 0.51020, 1e-5);
  EXPECT_EQ(avgGenError(PartitionDims(75, {75, 40}), {0.5, 0.5}, 0).gammas[0], kInf);
  EXPECT_EQ(avgGenError(PartitionDims(75, {76, 40}), {0.5, 0.5}, 0).gammas[0], kInf);
  const auto b = avgGenError(PartitionDims(75, {100, 100}), {0.5, 0.5}, 0.0);
  EXPECT_NEAR(b.gammas[0], 75.0 / 24.0, 1e-15);
  EXPECT_NEAR(b.alphas[0], (4 - 2.25 + 3.125) / 4, 1e-15);
  EXPECT_NEAR(b.total, 1.21875, 1e-12);
  const auto c = avgGenError(PartitionDims(20, {60, 80}), {0.5, 0.5}, 0.0);
  EXPECT_NEAR(c.gammas[0], 20.0 / 39.0, 1e-15);
  EXPECT_NEAR(c.alphas[0], 0.83475, 1e-5);
  EXPECT_NEAR(c.alphas[1], 0.94070, 1e-5);
  EXPECT_NEAR(c.total, 0.8877, 1e-4);
  EXPECT_EQ(avgGenError(PartitionDims(20, {60, 80}), {0, 0}, 0).total, 0.0);
  EXPECT_TRUE(std::isinf(avgGenError(PartitionDims(20, {20, 80}), {0.5, 0.5}, 0).total));
  // A zero block norm removes an infinite alpha from the total.
  EXPECT_TRUE(std::isfinite(avgGenError(PartitionDims(20, {80, 20}), {0.0, 0.5}, 0).total));
}

TEST(AvgGenError, NoiseTermMatchesMonteCarlo) {
  // x = 0, so kappa(x^1) = ||Abar w||^2 / K^2 with w ~ N(0, s2 I_n).
  const int n = 20;
  const std::vector<int> sizes{60, 80};
  const double s2 = 1.5;
  SeedStream rng(77);
  double acc = 0.0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    double err = 0.0;
    const Vector w = std::sqrt(s2) * numkern::gaussianMatrix(n, 1, rng).col(0);
    for (int p : sizes) err += (codPinv(numkern::gaussianMatrix(n, p, rng)) * w).squaredNorm();
    acc += err / 4.0;
  }
  const double mc = acc / trials;
  const double analytic = avgGenError(PartitionDims(n, sizes), {0, 0}, n * s2).total;
  EXPECT_NEAR(analytic, s2 * (20.0 / 39 + 20.0 / 59) / 4, 1e-12);
  EXPECT_NEAR(mc, analytic, 0.05 * analytic);
}

TEST(AbarABound, HandAndRandomInstances) {
  EXPECT_EQ(abarABoundRHS({3.0}, {0.5}), 1.0);
  const Matrix eye = Matrix::Identity(6, 6);
  Matrix a(6, 12);
  a << eye, eye;
  const auto op = cocoa::iterationMatrix(a, PartitionSpec({6, 6}));
  EXPECT_NEAR(oracle::powerNorm(op.Abar * a) * oracle::powerNorm(op.Abar * a), 4.0, 1e-9);
  EXPECT_EQ(abarABoundRHS({1, 1}, {1, 1}), 4.0);
  EXPECT_THROW(abarABoundRHS({1, 1}, {1, 0}), InvalidInput);
  EXPECT_THROW(abarABoundRHS({1}, {1, 1}), InvalidInput);

  SeedStream rng(5);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + int(rng.next() % 20);
    const int K = 1 + int(rng.next() % 4);
    std::vector<int> sizes;
    for (int k = 0; k < K; ++k) sizes.push_back(1 + int(rng.next() % 30));
    const PartitionSpec spec(sizes);
    const Matrix m = numkern::gaussianMatrix(n, spec.total(), rng);
    std::vector<double> smax, smin;
    for (const auto& block : datagen::partitionColumns(m, spec)) {
      const Vector s = block.jacobiSvd().singularValues();
      smax.push_back(s(0));
      smin.push_back(s(s.size() - 1));
    }
    const auto iop = cocoa::iterationMatrix(m, spec);
    const double lhs = std::pow(oracle::powerNorm(iop.Abar * m, 500), 2);
    if (lhs > abarABoundRHS(smax, smin) * (1 + 1e-9)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(GenErrBound, Cases) {
  EXPECT_EQ(genErrBoundFromBeta(1.0, 17, 2.0, 3.0), 6.0);
  EXPECT_EQ(genErrBoundFromBeta(5.0, 0, 2.0, 3.0), 6.0);
  EXPECT_EQ(genErrBoundFromBeta(kInf, 0, 2.0, 3.0), 6.0);
  EXPECT_EQ(genErrBoundFromBeta(kInf, 2, 2.0, 3.0), kInf);
  EXPECT_EQ(genErrBoundFromBeta(kInf, 2, 0.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(genErrBoundFromBeta(0.5, 2, 1.0, 1.0), 0.0625);
  EXPECT_THROW(genErrBoundFromBeta(1.0, -1, 1.0, 1.0), InvalidInput);
}

TEST(BlockSpectra, DiagonalBlocks) {
  Matrix s = Matrix::Zero(4, 4);
  s.diagonal() << 4, 1, 3, 2;
  s(0, 1) = s(1, 0) = 0.5;
  s(0, 3) = s(3, 0) = 0.9;  // off-block entries ignored
  const auto spec = blockSpectra(s, PartitionSpec({2, 2}));
  const double mid = 2.5, rad = std::sqrt(1.5 * 1.5 + 0.25);
  EXPECT_NEAR(spec[0].max, mid + rad, 1e-12);
  EXPECT_NEAR(spec[0].min, mid - rad, 1e-12);
  EXPECT_NEAR(spec[1].max, 3, 1e-12);
  EXPECT_NEAR(spec[1].min, 2, 1e-12);
  EXPECT_THROW(blockSpectra(s, PartitionSpec({2, 1})), InvalidPartition);
}

TEST(SubgaussianConstant, GaussianNearKnownValue) {
  SeedStream rng(6);
  const Matrix samples = numkern::gaussianMatrix(200000, 3, rng);
  const double L = estimateSubgaussianConstant(samples, Matrix::Identity(3, 3), 4, rng);
  EXPECT_GE(L, 1.0);
  EXPECT_NEAR(L, std::sqrt(8.0 / 3.0), 0.15);
  Matrix signs = samples.array().sign().matrix();
  const double Lb = estimateSubgaussianConstant(signs, Matrix::Identity(3, 3), 4, rng);
  EXPECT_LT(Lb, L);
}

TEST(BoundCsv, RowLayout) {
  const PartitionDims dims(75, {100, 100});
  const auto r = betaIsoGaussian(dims, {0, 0});
  EXPECT_EQ(boundCsvHeader(), "bound_name,K,n,p_list,q_list,C,beta,rho");
  const auto rows = csv::parse(boundCsvRow("iso-gaussian", dims, {0, 0.5}, 1.0, r));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0][3], "100;100");
  EXPECT_EQ(rows[0][4], "0;0.5");
  EXPECT_EQ(csv::parseNumber(rows[0][6]), r.beta);
  EXPECT_EQ(rows[0][7], "0");
}

TEST(PartitionDimsTest, Accessors) {
  const PartitionDims d(30, {10, 30, 40});
  EXPECT_EQ(d.rMin(2), 30);
  EXPECT_EQ(d.rMax(0), 30);
  EXPECT_TRUE(d.broad(2));
  EXPECT_FALSE(d.broad(1));
  EXPECT_FALSE(d.allTall());
  EXPECT_TRUE(PartitionDims(30, {10, 30}).allTall());
  EXPECT_THROW(PartitionDims(0, {1}), InvalidInput);
  EXPECT_THROW(PartitionDims(3, {}), InvalidInput);
}
