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

#include <cmath>

#include "lmmeter/error.h"

namespace lmmeter {
namespace {

void CheckPair(const MetricPair& pair) {
  if (!(pair.t_gt_ms > 0.0) || !std::isfinite(pair.t_gt_ms)) {
    throw Error(ErrorCode::kNonPositiveGroundTruth,
                "ground-truth latency must be a positive number");
  }
  if (!(pair.t_lm_ms >= 0.0) || !std::isfinite(pair.t_lm_ms)) {
    throw Error(ErrorCode::kInvalidArgument,
                "measured latency must be a nonnegative number");
  }
}

void CheckComponent(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::kNonPositiveComponent,
                std::string(what) + " must be positive and finite");
  }
}

}  // namespace

double MetricPair::delta_ms() const { return std::fabs(t_lm_ms - t_gt_ms); }

double Accuracy(const MetricPair& pair) {
  CheckPair(pair);
  return (1.0 - pair.delta_ms() / pair.t_gt_ms) * 100.0;
}

double ScaledError(const MetricPair& pair) {
  CheckPair(pair);
  // Delta in microseconds over ground truth in milliseconds.
  return 1000.0 * pair.delta_ms() / pair.t_gt_ms;
}

AccuracyResult Evaluate(const MetricPair& pair) {
  return {Accuracy(pair), ScaledError(pair)};
}

double Hq(double m_accuracy, double m_prefill, double m_decode) {
  CheckComponent(m_accuracy, "accuracy ratio");
  CheckComponent(m_prefill, "prefill latency ratio");
  CheckComponent(m_decode, "decode latency ratio");
  return 3.0 / (1.0 / m_accuracy + 1.0 / m_prefill + 1.0 / m_decode);
}

HqComponents ComputeHqComponents(const HqInputs& in) {
  CheckComponent(in.acc_full, "acc_full");
  CheckComponent(in.prefill_quant_ms, "prefill_quant_ms");
  CheckComponent(in.decode_quant_ms, "decode_quant_ms");
  return {in.acc_quant / in.acc_full, in.prefill_full_ms / in.prefill_quant_ms,
          in.decode_full_ms / in.decode_quant_ms};
}

double HqFromMeasurements(const HqInputs& inputs) {
  const HqComponents m = ComputeHqComponents(inputs);
  return Hq(m.m_accuracy, m.m_prefill, m.m_decode);
}

double DuplicationEstimate(double t_base_phase_ms, double t_dup_phase_ms,
                           std::int64_t n) {
  if (n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "duplication count must be >= 1");
  }
  if (!std::isfinite(t_base_phase_ms) || !std::isfinite(t_dup_phase_ms)) {
    throw Error(ErrorCode::kInvalidArgument, "phase latencies must be finite");
  }
  if (t_dup_phase_ms < t_base_phase_ms) {
    throw Error(ErrorCode::kNegativeDelta,
                "duplicated phase is faster than the baseline");
  }
  return (t_dup_phase_ms - t_base_phase_ms) / static_cast<double>(n);
}

std::int32_t ChooseDuplicationCount(double expected_latency_ms) {
  if (!(expected_latency_ms > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected latency must be positive");
  }
  return expected_latency_ms > 1.0 ? 50 : 1000;
}

ThroughputReport ComputeThroughput(std::int64_t prompt_tokens,
                                   std::int64_t output_tokens,
                                   std::int64_t prefill_wall_ns,
                                   std::int64_t decode_wall_ns) {
  if (prefill_wall_ns <= 0 || decode_wall_ns <= 0) {
    throw Error(ErrorCode::kMissingPhase,
                "prefill and decode wall time must be positive");
  }
  if (prompt_tokens <= 0 || output_tokens <= 0) {
    throw Error(ErrorCode::kMissingTokenCounts,
                "token counts must be positive");
  }
  const double prefill_s = static_cast<double>(prefill_wall_ns) * 1e-9;
  const double decode_s = static_cast<double>(decode_wall_ns) * 1e-9;
  ThroughputReport r;
  r.prefill_tokens_per_s = static_cast<double>(prompt_tokens) / prefill_s;
  r.decode_tokens_per_s = static_cast<double>(output_tokens) / decode_s;
  r.prefill_s_per_input_token = prefill_s / static_cast<double>(prompt_tokens);
  r.decode_s_per_output_token = decode_s / static_cast<double>(output_tokens);
  return r;
}

ThroughputReport Throughput(const Trace& trace) {
  std::int64_t prefill_ns = 0;
  std::int64_t decode_ns = 0;
  bool has_prefill = false;
  bool has_decode = false;
  for (const PhaseRecord& p : trace.phases()) {
    if (p.kind == PhaseKind::kPrefill) {
      has_prefill = true;
      prefill_ns += p.duration_ns();
    } else if (p.kind == PhaseKind::kDecode) {
      has_decode = true;
      decode_ns += p.duration_ns();
    }
  }
  if (!has_prefill || !has_decode) {
    throw Error(ErrorCode::kMissingPhase,
                has_prefill ? "trace has no decode phase"
                            : "trace has no prefill phase");
  }
  const TraceMetadata& meta = trace.metadata();
  if (!meta.prompt_tokens.has_value() || !meta.output_tokens.has_value()) {
    throw Error(ErrorCode::kMissingTokenCounts,
                "trace metadata lacks prompt/output token counts");
  }
  return ComputeThroughput(*meta.prompt_tokens, *meta.output_tokens,
                           prefill_ns, decode_ns);
}

}  // namespace lmmeter
