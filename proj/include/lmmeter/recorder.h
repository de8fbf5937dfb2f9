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

#ifndef LMMETER_RECORDER_H_
#define LMMETER_RECORDER_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmmeter/trace.h"
#include "lmmeter/types.h"

namespace lmmeter {

// Current time on std::chrono::steady_clock, in nanoseconds.
TimestampNs Now();

struct TimerCalibration {
  // Smallest nonzero delta between back-to-back clock reads.
  std::int64_t resolution_ns = 1;
  // Median cost of one BeginPhase/EndPhase pair, including both clock reads.
  double overhead_ns_median = 0.0;
  std::int64_t iterations = 0;
};

inline constexpr std::int64_t kMinCalibrationIterations = 1000;

// Requires iterations >= kMinCalibrationIterations (kInvalidArgument
// otherwise). Single-threaded.
TimerCalibration CalibrateTimer(std::int64_t iterations);

struct SessionOptions {
  std::string device_label = "local";
  std::optional<std::int64_t> clock_offset_ns;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> output_tokens;
  // Records that fit without reallocation. Appends past capacity still
  // succeed with amortized growth.
  std::size_t phase_capacity = 4096;
  std::size_t kernel_capacity = 16384;
};

class TraceSession;

class PhaseHandle {
 public:
  PhaseKind kind() const { return kind_; }
  TimestampNs t_start_ns() const { return t_start_ns_; }

 private:
  friend class TraceSession;
  PhaseHandle(std::uint64_t session_id, std::uint64_t sequence, PhaseKind kind,
              TimestampNs t_start_ns)
      : session_id_(session_id),
        sequence_(sequence),
        kind_(kind),
        t_start_ns_(t_start_ns) {}

  std::uint64_t session_id_;
  std::uint64_t sequence_;
  PhaseKind kind_;
  TimestampNs t_start_ns_;
};

// Non-owning view of a just-recorded kernel. `name` points into the
// session's interned name table and lives as long as the session.
struct KernelRecordView {
  std::string_view name;
  std::uint32_t queue_id = 0;
  TimestampNs t_cpu_enqueue_ns = 0;
  TimestampNs t_queued_ns = 0;
  TimestampNs t_submit_ns = 0;
  TimestampNs t_start_ns = 0;
  TimestampNs t_end_ns = 0;
};

// Accumulates phase and kernel records until Seal() turns them into a Trace.
//
// Record calls may come from two threads at once (the host enqueue path and
// a completion callback); order is restored by sorting at seal time. Once a
// kernel name has been seen, recording does not allocate as long as the
// preallocated capacity holds.
class TraceSession {
 public:
  explicit TraceSession(SessionOptions options = {});

  TraceSession(const TraceSession&) = delete;
  TraceSession& operator=(const TraceSession&) = delete;

  // Only one phase may be open at a time; a second begin throws
  // kPhaseOverlap.
  PhaseHandle BeginPhase(PhaseKind kind, std::int32_t turn,
                         std::optional<std::int32_t> token_index);
  PhaseRecord EndPhase(const PhaseHandle& handle);

  // Phase with caller-supplied timestamps, for backends that keep their own
  // timebase (the simulator). Must not overlap any recorded or open phase.
  PhaseRecord RecordPhase(PhaseKind kind, std::int32_t turn,
                          std::optional<std::int32_t> token_index,
                          TimestampNs t_start_ns, TimestampNs t_end_ns);

  KernelRecordView RecordKernel(std::string_view name, std::uint32_t queue_id,
                                TimestampNs t_cpu_enqueue_ns,
                                TimestampNs t_queued_ns,
                                TimestampNs t_submit_ns,
                                TimestampNs t_start_ns, TimestampNs t_end_ns);

  void SetTokenCounts(std::int64_t prompt_tokens, std::int64_t output_tokens);

  // Throws kOpenPhaseRemaining while a phase is open and kSessionSealed on a
  // second call. Device timestamps are shifted by clock_offset_ns when set.
  Trace Seal();

  bool sealed() const;
  std::optional<std::int64_t> clock_offset_ns() const {
    return metadata_.clock_offset_ns;
  }
  std::size_t phase_count() const;
  std::size_t kernel_count() const;

 private:
  struct StoredKernel {
    std::uint32_t name_id;
    std::uint32_t queue_id;
    TimestampNs t_cpu_enqueue_ns;
    TimestampNs t_queued_ns;
    TimestampNs t_submit_ns;
    TimestampNs t_start_ns;
    TimestampNs t_end_ns;
  };
  struct OpenPhase {
    std::uint64_t sequence;
    PhaseKind kind;
    std::int32_t turn;
    std::optional<std::int32_t> token_index;
    TimestampNs t_start_ns;
  };

  void CheckNotSealedLocked() const;
  void CheckNoOverlapLocked(TimestampNs start, TimestampNs end) const;
  void AppendPhaseLocked(const PhaseRecord& record);
  std::uint32_t InternLocked(std::string_view name);

  const std::uint64_t id_;
  TraceMetadata metadata_;

  mutable std::mutex mu_;
  bool sealed_ = false;
  std::uint64_t next_sequence_ = 0;
  std::optional<OpenPhase> open_phase_;
  TimestampNs max_phase_end_ = 0;
  std::vector<PhaseRecord> phases_;
  std::vector<StoredKernel> kernels_;
  std::map<std::string, std::uint32_t, std::less<>> name_ids_;
  std::vector<const std::string*> names_;
};

}  // namespace lmmeter

#endif  // LMMETER_RECORDER_H_
