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

#include "lmmeter/metrics.h"

#include <gtest/gtest.h>

#include <random>

#include "lmmeter/sim_engine.h"
#include "test_support.h"

namespace lmmeter {
namespace {

using test_support::CodeOf;

TEST(AccuracyTest, PublishedRows) {
  EXPECT_NEAR(Accuracy({0.8038, 0.7763}), 96.46, 0.01);
  EXPECT_NEAR(Accuracy({62.5669, 62.5303}), 99.94, 0.01);
  EXPECT_NEAR(ScaledError({3433.8628, 3433.8142}), 0.014, 0.001);
  EXPECT_NEAR(ScaledError({142.6166, 142.6542}), 0.264, 0.002);
}

TEST(AccuracyTest, IdentityAndZeroError) {
  EXPECT_EQ(Accuracy({7.25, 7.25}), 100.0);
  EXPECT_EQ(ScaledError({7.25, 7.25}), 0.0);
  EXPECT_LT(Accuracy({7.26, 7.25}), 100.0);
}

TEST(AccuracyTest, NegativeWhenErrorExceedsTruth) {
  EXPECT_LT(Accuracy({30.0, 10.0}), 0.0);
}

TEST(AccuracyTest, NonPositiveTruthRejected) {
  EXPECT_EQ(CodeOf([] { Accuracy({1.0, 0.0}); }),
            ErrorCode::kNonPositiveGroundTruth);
  EXPECT_EQ(CodeOf([] { ScaledError({1.0, -2.0}); }),
            ErrorCode::kNonPositiveGroundTruth);
}

TEST(AccuracyTest, PublishedPhaseRowsWithinTolerance) {
  const auto rows = test_support::ReadLatencyFixture("published_phase_latency.csv");
  ASSERT_EQ(rows.size(), 35u);
  for (const auto& r : rows) {
    const AccuracyResult e = Evaluate({r.lm_ms, r.gt_ms});
    EXPECT_NEAR(e.alpha_pct, r.alpha_pct, 0.15) << r.label << " " << r.phase;
    EXPECT_NEAR(e.eps_star_us_per_ms, r.eps_star, 1.5)
        << r.label << " " << r.phase;
  }
}

TEST(AccuracyTest, AlphaEpsIdentity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> gt(0.01, 5000.0);
  std::uniform_real_distribution<double> rel(-0.5, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const double g = gt(rng);
    const AccuracyResult e = Evaluate({g * (1.0 + rel(rng)), g});
    EXPECT_NEAR(e.alpha_pct + e.eps_star_us_per_ms / 10.0, 100.0, 1e-7);
  }
}

TEST(HqTest, HandValues) {
  EXPECT_EQ(Hq(1, 1, 1), 1.0);
  EXPECT_DOUBLE_EQ(Hq(0.5, 2.0, 2.0), 1.0);
  EXPECT_NEAR(Hq(0.9, 1.2, 1.1), 1.0513, 1e-4);
}

TEST(HqTest, Properties) {
  EXPECT_DOUBLE_EQ(Hq(0.3, 1.7, 2.2), Hq(2.2, 0.3, 1.7));
  EXPECT_DOUBLE_EQ(Hq(0.3 * 4, 1.7 * 4, 2.2 * 4), 4 * Hq(0.3, 1.7, 2.2));
  const double h = Hq(0.3, 1.7, 2.2);
  EXPECT_GE(h, 0.3);
  EXPECT_LE(h, 2.2);
}

TEST(HqTest, RejectsNonPositive) {
  EXPECT_EQ(CodeOf([] { Hq(0.0, 1, 1); }), ErrorCode::kNonPositiveComponent);
  EXPECT_EQ(CodeOf([] { Hq(1, -1, 1); }), ErrorCode::kNonPositiveComponent);
}

TEST(HqTest, FromMeasurements) {
  HqInputs same{"task", 0.6, 0.6, 100, 100, 20, 20};
  EXPECT_DOUBLE_EQ(HqFromMeasurements(same), 1.0);
  HqInputs faster{"task", 0.6, 0.6, 50, 100, 10, 20};
  EXPECT_DOUBLE_EQ(HqFromMeasurements(faster), 1.5);
  HqInputs collapsed{"gsm8k", 0.6e-6, 0.6, 50, 100, 10, 20};
  EXPECT_NEAR(HqFromMeasurements(collapsed), 3e-6, 3e-8);
  const HqComponents m = ComputeHqComponents(faster);
  EXPECT_DOUBLE_EQ(m.m_prefill, 2.0);
  HqInputs zero_latency{"task", 0.6, 0.6, 0, 100, 10, 20};
  EXPECT_EQ(CodeOf([&] { HqFromMeasurements(zero_latency); }),
            ErrorCode::kNonPositiveComponent);
}

TEST(DuplicationTest, Arithmetic) {
  EXPECT_DOUBLE_EQ(DuplicationEstimate(100.0, 150.0, 50), 1.0);
  EXPECT_EQ(DuplicationEstimate(10.0, 10.0, 1000), 0.0);
  EXPECT_EQ(CodeOf([] { DuplicationEstimate(10.0, 9.0, 50); }),
            ErrorCode::kNegativeDelta);
  EXPECT_EQ(CodeOf([] { DuplicationEstimate(10.0, 11.0, 0); }),
            ErrorCode::kInvalidArgument);
}

TEST(DuplicationTest, CountRule) {
  EXPECT_EQ(ChooseDuplicationCount(1.3601), 50);
  EXPECT_EQ(ChooseDuplicationCount(0.2006), 1000);
  EXPECT_EQ(ChooseDuplicationCount(1.0), 1000);
  const auto rows = test_support::ReadLatencyFixture("published_kernel_latency.csv");
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) {
    EXPECT_EQ(ChooseDuplicationCount(r.gt_ms), r.gt_ms > 1.0 ? 50 : 1000)
        << r.label;
  }
}

TEST(DuplicationTest, ExactOnJitterFreeSimulator) {
  RunOptions o;
  o.output_tokens = 3;
  const WorkloadSpec spec = PresetGemmaDecode();
  const SimulationResult base = lmmeter::Run(spec, o);
  for (int n : {1, 7, 50}) {
    const SimulationResult dup = RunWithDuplication(spec, {"chunk_lse", n}, o);
    const double t_base =
        static_cast<double>(base.truth.phase_wall_ns.at(PhaseKind::kSoftmax));
    const double t_dup =
        static_cast<double>(dup.truth.phase_wall_ns.at(PhaseKind::kSoftmax));
    const KernelTruth& k = base.truth.kernels.at("chunk_lse");
    EXPECT_DOUBLE_EQ(DuplicationEstimate(t_base, t_dup, n),
                     static_cast<double>(k.total_ns));
  }
}

TEST(ThroughputTest, Arithmetic) {
  const ThroughputReport r = ComputeThroughput(100, 10, 500'000'000, 200'000'000);
  EXPECT_DOUBLE_EQ(r.decode_tokens_per_s, 50.0);
  EXPECT_DOUBLE_EQ(r.decode_s_per_output_token, 0.02);
  EXPECT_DOUBLE_EQ(r.prefill_tokens_per_s, 200.0);
}

TEST(ThroughputTest, MissingPieces) {
  TraceMetadata m;
  m.prompt_tokens = 4;
  m.output_tokens = 2;
  const Trace no_decode = Trace::FromRecords(
      m, {{PhaseKind::kPrefill, 0, std::nullopt, 0, 10}}, {});
  EXPECT_EQ(CodeOf([&] { Throughput(no_decode); }), ErrorCode::kMissingPhase);
  const Trace no_counts = Trace::FromRecords(
      {}, {{PhaseKind::kPrefill, 0, std::nullopt, 0, 10},
           {PhaseKind::kDecode, 0, 0, 10, 20}},
      {});
  EXPECT_EQ(CodeOf([&] { Throughput(no_counts); }),
            ErrorCode::kMissingTokenCounts);
}

TEST(ThroughputTest, MatchesSimulatorTruth) {
  RunOptions o;
  o.prompt_tokens = 16;
  o.output_tokens = 10;
  const SimulationResult r = lmmeter::Run(PresetGemmaDecode(), o);
  const ThroughputReport t = Throughput(r.trace);
  const ThroughputReport expected = ComputeThroughput(
      16, 10, r.truth.phase_wall_ns.at(PhaseKind::kPrefill),
      r.truth.phase_wall_ns.at(PhaseKind::kDecode));
  EXPECT_EQ(t.decode_tokens_per_s, expected.decode_tokens_per_s);
  EXPECT_EQ(t.prefill_tokens_per_s, expected.prefill_tokens_per_s);
}

}  // namespace
}  // namespace lmmeter
