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

#include "lmmeter/types.h"

#include "lmmeter/error.h"

namespace lmmeter {

std::string_view PhaseKindName(PhaseKind kind) {
  switch (kind) {
    case PhaseKind::kEmbedding: return "embedding";
    case PhaseKind::kPrefill: return "prefill";
    case PhaseKind::kDecode: return "decode";
    case PhaseKind::kSoftmax: return "softmax";
    case PhaseKind::kCopyProbsToCpu: return "copy_probs_to_cpu";
    case PhaseKind::kSampling: return "sampling";
  }
  return "unknown";
}

std::optional<PhaseKind> ParsePhaseKind(std::string_view name) {
  for (PhaseKind kind : kAllPhaseKinds) {
    if (PhaseKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

void ValidateKernelRecord(const KernelRecord& record) {
  if (record.name.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "kernel name is empty");
  }
  if (record.t_cpu_enqueue_ns < 0 || record.t_queued_ns < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "negative timestamp on kernel '" + record.name + "'");
  }
  auto violation = [&](const char* what) {
    throw Error(ErrorCode::kTimestampOrderViolation,
                std::string(what) + " on kernel '" + record.name + "'");
  };
  if (record.t_submit_ns < record.t_queued_ns) violation("t_submit < t_queued");
  if (record.t_start_ns < record.t_submit_ns) violation("t_start < t_submit");
  if (record.t_end_ns < record.t_start_ns) violation("t_end < t_start");
}

void ValidatePhaseRecord(const PhaseRecord& record) {
  if (record.t_start_ns < 0 || record.t_end_ns < record.t_start_ns) {
    throw Error(ErrorCode::kInvalidArgument,
                "phase interval must satisfy 0 <= t_start <= t_end");
  }
  if (record.turn < 0) {
    throw Error(ErrorCode::kInvalidArgument, "turn must be nonnegative");
  }
  const bool wants_token = PhaseHasTokenIndex(record.kind);
  if (wants_token != record.token_index.has_value()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(PhaseKindName(record.kind)) +
                    (wants_token ? " phase requires a token index"
                                 : " phase must not carry a token index"));
  }
  if (record.token_index.has_value() && *record.token_index < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "token index must be nonnegative");
  }
}

}  // namespace lmmeter
