// Copyright 2026 The lmmeter Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lmmeter/sampler.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "test_support.h"

namespace lmmeter {
namespace {

using test_support::CodeOf;

std::vector<std::int64_t> Lognormal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> d(5.0, 0.8);
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = std::max<std::int64_t>(1, std::llround(d(rng)));
  return out;
}

TEST(HistogramTest, TwoEvenBins) {
  const std::vector<std::int64_t> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const TokenLengthHistogram h = Histogram(v, 2, 0.5);
  EXPECT_EQ(h.counts, (std::vector<std::int64_t>{5, 5}));
  EXPECT_EQ(h.bin_edges.front(), 1.0);
  EXPECT_EQ(h.bin_edges.back(), 10.0);
}

TEST(HistogramTest, AllEqualLengthsOccupyOneBin) {
  const std::vector<std::int64_t> v(50, 42);
  for (int bins : {2, 7, 30}) {
    const TokenLengthHistogram h = Histogram(v, bins);
    int occupied = 0;
    for (auto c : h.counts) occupied += c > 0;
    EXPECT_EQ(occupied, 1);
    for (std::size_t i = 1; i < h.bin_edges.size(); ++i) {
      EXPECT_LT(h.bin_edges[i - 1], h.bin_edges[i]);
    }
  }
}

TEST(HistogramTest, EdgeValueGoesToLowerBin) {
  // Edges at 1, 6, 11; 6 sits on the interior edge.
  const LengthBinning b(1, 11, 2);
  EXPECT_EQ(b.BinOf(1), 0);
  EXPECT_EQ(b.BinOf(6), 0);
  EXPECT_EQ(b.BinOf(7), 1);
  EXPECT_EQ(b.BinOf(11), 1);
  EXPECT_EQ(CodeOf([&] { b.BinOf(12); }), ErrorCode::kInvalidArgument);
}

TEST(HistogramTest, ProbabilitiesSumToOne) {
  const auto v = Lognormal(10000, 1);
  const TokenLengthHistogram h = Histogram(v, 30);
  EXPECT_EQ(h.total(), 10000);
  EXPECT_NEAR(h.Probabilities().sum(), 1.0, 1e-12);
}

TEST(HistogramTest, Errors) {
  EXPECT_EQ(CodeOf([] { Histogram(std::vector<std::int64_t>{}, 30); }),
            ErrorCode::kEmptyDataset);
  EXPECT_EQ(CodeOf([] { Histogram(std::vector<std::int64_t>{1, 0}, 30); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { Histogram(std::vector<std::int64_t>{1, 2}, 1); }),
            ErrorCode::kInvalidArgument);
}

TEST(KlTest, ClosedForm) {
  Eigen::ArrayXd p(2), q(2);
  p << 0.5, 0.5;
  q << 0.25, 0.75;
  EXPECT_NEAR(KlDivergence(p, q), 0.1438, 1e-4);
  EXPECT_EQ(KlDivergence(p, p), 0.0);
}

TEST(KlTest, IdenticalHistogramsAreZero) {
  const auto v = Lognormal(1000, 2);
  const TokenLengthHistogram h = Histogram(v, 30);
  EXPECT_EQ(KlDivergence(h, h), 0.0);
}

TEST(KlTest, Errors) {
  const std::vector<std::int64_t> a = {1, 2, 3, 4};
  const std::vector<std::int64_t> b = {1, 2, 3, 5};
  EXPECT_EQ(CodeOf([&] { KlDivergence(Histogram(a, 2), Histogram(b, 2)); }),
            ErrorCode::kBinMismatch);
  Eigen::ArrayXd p(2), q(2);
  p << 0.5, 0.5;
  q << 1.0, 0.0;
  EXPECT_EQ(CodeOf([&] { KlDivergence(p, q); }), ErrorCode::kUnsupportedZero);
}

TEST(KlTest, NonNegativeOnRandomPairs) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::ArrayXd p(8), q(8);
    for (int b = 0; b < 8; ++b) {
      p(b) = u(rng);
      q(b) = u(rng);
    }
    p /= p.sum();
    q /= q.sum();
    EXPECT_GE(KlDivergence(p, q), -1e-15);
  }
}

TEST(SampleSubsetTest, FullFractionIsEverything) {
  const auto v = Lognormal(500, 3);
  const SubsetPlan plan = SampleSubset(v, 1.0, 30, 7);
  EXPECT_EQ(plan.indices.size(), 500u);
  EXPECT_EQ(plan.achieved_kl_nats, 0.0);
}

TEST(SampleSubsetTest, SizeIsRoundedFraction) {
  const auto v = Lognormal(2380, 5);
  EXPECT_EQ(SampleSubset(v, 0.1, 30, 1).indices.size(), 238u);
  EXPECT_EQ(SampleSubset(v, 0.0471, 30, 1).indices.size(), 112u);
  EXPECT_EQ(SampleSubset(v, 0.055, 30, 1).indices.size(), 131u);
}

TEST(SampleSubsetTest, LognormalKlAndMonotoneSwaps) {
  const auto v = Lognormal(10000, 6);
  const SubsetPlan plan = SampleSubset(v, 0.1, 30, 11);
  EXPECT_EQ(plan.indices.size(), 1000u);
  EXPECT_LE(plan.achieved_kl_nats, 0.05);
  ASSERT_FALSE(plan.kl_trajectory.empty());
  for (std::size_t i = 1; i < plan.kl_trajectory.size(); ++i) {
    EXPECT_LE(plan.kl_trajectory[i], plan.kl_trajectory[i - 1]);
  }
  const std::set<std::int64_t> unique(plan.indices.begin(), plan.indices.end());
  EXPECT_EQ(unique.size(), plan.indices.size());
  EXPECT_TRUE(std::is_sorted(plan.indices.begin(), plan.indices.end()));
  EXPECT_LT(plan.indices.back(), 10000);
}

TEST(SampleSubsetTest, SwapsRepairAPoorDraw) {
  // Two distant clusters: stratification alone already matches; a skewed
  // fraction leaves remainders for the swaps to fix.
  std::vector<std::int64_t> v;
  for (int i = 0; i < 7; ++i) v.push_back(10);
  for (int i = 0; i < 3; ++i) v.push_back(1000);
  const SubsetPlan plan = SampleSubset(v, 0.5, 2, 1);
  EXPECT_EQ(plan.indices.size(), 5u);
  for (std::size_t i = 1; i < plan.kl_trajectory.size(); ++i) {
    EXPECT_LE(plan.kl_trajectory[i], plan.kl_trajectory[i - 1]);
  }
}

TEST(SampleSubsetTest, Deterministic) {
  const auto v = Lognormal(3000, 8);
  const SubsetPlan a = SampleSubset(v, 0.2, 30, 99);
  const SubsetPlan b = SampleSubset(v, 0.2, 30, 99);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.achieved_kl_nats, b.achieved_kl_nats);
  EXPECT_NE(a.indices, SampleSubset(v, 0.2, 30, 100).indices);
}

TEST(SampleSubsetTest, FractionOutOfRange) {
  const auto v = Lognormal(100, 1);
  for (double f : {0.0, -0.1, 1.5, 0.001}) {
    EXPECT_EQ(CodeOf([&] { SampleSubset(v, f, 30, 1); }),
              ErrorCode::kFractionOutOfRange)
        << f;
  }
}

TEST(LengthsIoTest, ReadAndWrite) {
  std::istringstream in("# lengths\n12\n\n  7 \n300\n");
  EXPECT_EQ(ReadLengths(in), (std::vector<std::int64_t>{12, 7, 300}));
  std::istringstream bad("12\nabc\n");
  try {
    ReadLengths(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_EQ(e.line(), 2);
  }
  SubsetPlan plan;
  plan.indices = {1, 4};
  plan.fraction = 0.5;
  plan.achieved_kl_nats = 0.25;
  std::ostringstream out;
  WriteSubsetPlan(plan, 30, 7, out);
  EXPECT_EQ(out.str(),
            "{\"fraction\":0.5,\"bins\":30,\"seed\":7,\"count\":2,"
            "\"achieved_kl_nats\":0.25}\n1\n4\n");
}

}  // namespace
}  // namespace lmmeter
