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

#ifndef LMMETER_TYPES_H_
#define LMMETER_TYPES_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lmmeter {

// Nanoseconds on a monotonic clock. Signed so that deltas and clock offsets
// stay in one type; valid timestamps are nonnegative.
using TimestampNs = std::int64_t;
using DurationNs = std::int64_t;

enum class PhaseKind : std::uint8_t {
  kEmbedding,
  kPrefill,
  kDecode,
  kSoftmax,
  kCopyProbsToCpu,
  kSampling,
};

inline constexpr std::array<PhaseKind, 6> kAllPhaseKinds = {
    PhaseKind::kEmbedding, PhaseKind::kPrefill,        PhaseKind::kDecode,
    PhaseKind::kSoftmax,   PhaseKind::kCopyProbsToCpu, PhaseKind::kSampling,
};

// Lowercase wire names: "embedding", "prefill", "decode", "softmax",
// "copy_probs_to_cpu", "sampling".
std::string_view PhaseKindName(PhaseKind kind);
std::optional<PhaseKind> ParsePhaseKind(std::string_view name);

// Embedding and prefill run once per turn; the other phases recur per
// generated token and therefore carry a token index.
constexpr bool PhaseHasTokenIndex(PhaseKind kind) {
  return kind != PhaseKind::kEmbedding && kind != PhaseKind::kPrefill;
}

struct PhaseRecord {
  PhaseKind kind = PhaseKind::kEmbedding;
  std::int32_t turn = 0;
  std::optional<std::int32_t> token_index;
  TimestampNs t_start_ns = 0;
  TimestampNs t_end_ns = 0;

  DurationNs duration_ns() const { return t_end_ns - t_start_ns; }
  friend bool operator==(const PhaseRecord&, const PhaseRecord&) = default;
};

struct KernelRecord {
  std::string name;
  std::uint32_t queue_id = 0;
  TimestampNs t_cpu_enqueue_ns = 0;  // host clock
  TimestampNs t_queued_ns = 0;       // device clock from here on
  TimestampNs t_submit_ns = 0;
  TimestampNs t_start_ns = 0;
  TimestampNs t_end_ns = 0;

  DurationNs execution_ns() const { return t_end_ns - t_start_ns; }
  friend bool operator==(const KernelRecord&, const KernelRecord&) = default;
};

// Half-open [start_ns, end_ns).
struct Interval {
  TimestampNs start_ns = 0;
  TimestampNs end_ns = 0;

  DurationNs length() const { return end_ns - start_ns; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Throw kTimestampOrderViolation naming the first violated inequality of
// queued <= submit <= start <= end, or kInvalidArgument for an empty name or
// negative timestamp.
void ValidateKernelRecord(const KernelRecord& record);

// Throw kInvalidArgument unless t_end >= t_start >= 0, turn >= 0 and the
// token index is present exactly for per-token phases.
void ValidatePhaseRecord(const PhaseRecord& record);

}  // namespace lmmeter

#endif  // LMMETER_TYPES_H_
