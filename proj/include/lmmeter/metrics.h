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

#ifndef LMMETER_METRICS_H_
#define LMMETER_METRICS_H_

#include <cstdint>
#include <string>

#include "lmmeter/trace.h"

namespace lmmeter {

// A profiler-measured latency and its ground truth, both in milliseconds.
struct MetricPair {
  double t_lm_ms = 0.0;
  double t_gt_ms = 0.0;

  double delta_ms() const;  // |t_lm - t_gt|
};

struct AccuracyResult {
  double alpha_pct = 0.0;           // can go negative when error > truth
  double eps_star_us_per_ms = 0.0;  // microseconds of error per true ms
};

// (1 - |t_lm - t_gt| / t_gt) * 100. Throws kNonPositiveGroundTruth.
double Accuracy(const MetricPair& pair);
// 1000 * |t_lm - t_gt| / t_gt. Throws kNonPositiveGroundTruth.
double ScaledError(const MetricPair& pair);
AccuracyResult Evaluate(const MetricPair& pair);

// Harmonic mean of the accuracy ratio and the two speedup ratios. Every
// component must be > 0 (kNonPositiveComponent).
double Hq(double m_accuracy, double m_prefill, double m_decode);

struct HqInputs {
  std::string task_id;
  double acc_quant = 0.0;
  double acc_full = 0.0;
  double prefill_quant_ms = 0.0;
  double prefill_full_ms = 0.0;
  double decode_quant_ms = 0.0;
  double decode_full_ms = 0.0;
};

struct HqComponents {
  double m_accuracy = 0.0;  // acc_quant / acc_full
  double m_prefill = 0.0;   // prefill_full / prefill_quant, > 1 is a speedup
  double m_decode = 0.0;    // decode_full / decode_quant
};

HqComponents ComputeHqComponents(const HqInputs& inputs);
double HqFromMeasurements(const HqInputs& inputs);

// Per-copy latency from phase totals of a baseline run and a run where the
// kernel was followed by n copies: (t_dup - t_base) / n. A kernel invoked k
// times per phase yields k times its per-invocation latency. Throws
// kNegativeDelta when the duplicated run came out faster.
double DuplicationEstimate(double t_base_phase_ms, double t_dup_phase_ms,
                           std::int64_t n);

// 50 copies for kernels expected to run longer than 1 ms, 1000 otherwise
// (exactly 1 ms counts as short).
std::int32_t ChooseDuplicationCount(double expected_latency_ms);

struct ThroughputReport {
  double prefill_tokens_per_s = 0.0;
  double decode_tokens_per_s = 0.0;
  double prefill_s_per_input_token = 0.0;
  double decode_s_per_output_token = 0.0;
};

// Token counts over total wall time of the prefill and decode phases.
ThroughputReport ComputeThroughput(std::int64_t prompt_tokens,
                                   std::int64_t output_tokens,
                                   std::int64_t prefill_wall_ns,
                                   std::int64_t decode_wall_ns);

// Throws kMissingPhase without prefill or decode phases and
// kMissingTokenCounts when the trace metadata lacks token counts.
ThroughputReport Throughput(const Trace& trace);

}  // namespace lmmeter

#endif  // LMMETER_METRICS_H_
