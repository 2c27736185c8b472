#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <stdexcept>

#include "fpcocoa/parallel.hpp"
#include "fpcocoa/rng.hpp"

using namespace fpcocoa;

TEST(SeedStream, SameSeedSameSequence) {
  SeedStream a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(SeedStream, ChildrenDependOnlyOnParentSeedAndKey) {
  SeedStream parent(7);
  SeedStream first = parent.child(3);
  parent.next();  // advancing the parent does not change its children
  SeedStream second = parent.child(3);
  EXPECT_EQ(first.next(), second.next());
  EXPECT_EQ(parent.child("train").next(), SeedStream(7).child("train").next());
}

TEST(SeedStream, ChildrenAreDistinct) {
  SeedStream parent(1);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 1000; ++i) firsts.insert(parent.child(i).next());
  EXPECT_EQ(firsts.size(), 1000u);
  EXPECT_NE(parent.child("train").next(), parent.child("test").next());
  EXPECT_NE(SeedStream(1).child(std::uint64_t{0}).next(), SeedStream(2).child(std::uint64_t{0}).next());
}

TEST(SeedStream, DrawsHaveExpectedRanges) {
  SeedStream rng(5);
  int heads = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform(-1.0, 1.0);
    EXPECT_GE(u, -1.0);
    EXPECT_LT(u, 1.0);
    heads += rng.coin() ? 1 : 0;
  }
  EXPECT_NEAR(heads / 10000.0, 0.5, 0.03);
}

TEST(Parallel, SerialAndParallelGiveIdenticalResults) {
  auto work = [](std::size_t i) {
    SeedStream rng = SeedStream(11).child(i);
    double s = 0.0;
    for (int k = 0; k < 100; ++k) s += rng.normal();
    return s;
  };
  const auto serial = mapIndexed<double>(64, ExecutionPolicy::serial(), work);
  const auto parallel = mapIndexed<double>(64, ExecutionPolicy::parallel(4), work);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(serial[i], parallel[i]);
}

TEST(Parallel, EveryIndexVisitedOnce) {
  std::vector<std::atomic<int>> hits(100);
  forEach(hits.size(), ExecutionPolicy::parallel(3), [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, ExceptionsPropagate) {
  auto body = [](std::size_t i) {
    if (i == 17) throw std::runtime_error("boom");
  };
  EXPECT_THROW(forEach(40, ExecutionPolicy::parallel(4), body), std::runtime_error);
  EXPECT_THROW(forEach(40, ExecutionPolicy::serial(), body), std::runtime_error);
}

TEST(Parallel, ResolvedWorkers) {
  EXPECT_EQ(resolvedWorkers(ExecutionPolicy::serial()), 1);
  EXPECT_GE(resolvedWorkers(ExecutionPolicy::parallel()), 1);
  EXPECT_TRUE(ExecutionPolicy::serial().isSerial());
}
