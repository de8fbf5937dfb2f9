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

#ifndef LMMETER_TIMELINE_H_
#define LMMETER_TIMELINE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmmeter/trace.h"
#include "lmmeter/types.h"

namespace lmmeter {

struct LifecycleBreakdown {
  DurationNs queuing_ns = 0;    // submit - queued
  DurationNs dispatch_ns = 0;   // start - submit
  DurationNs execution_ns = 0;  // end - start

  DurationNs total_ns() const { return queuing_ns + dispatch_ns + execution_ns; }
};

LifecycleBreakdown Lifecycle(const KernelRecord& record);

struct IdleReport {
  Interval window;
  DurationNs busy_ns = 0;
  DurationNs idle_ns = 0;
  double idle_fraction = 0.0;  // 0 for a zero-length window
  std::vector<Interval> gaps;  // disjoint, sorted, inside window
};

// Device busy time is the union of kernel execution intervals [start, end)
// across all queues (or one queue when `queue` is set), clipped to the
// window. Queuing and dispatch time count as idle.
IdleReport IdleGaps(const Trace& trace, const Interval& window,
                    std::optional<std::uint32_t> queue = std::nullopt);

// Same sweep over bare intervals.
IdleReport IdleGaps(std::span<const Interval> busy, const Interval& window);

struct IdleTotals {
  std::int64_t windows = 0;
  DurationNs window_ns = 0;
  DurationNs busy_ns = 0;
  DurationNs idle_ns = 0;
  double idle_fraction = 0.0;
};

// One report per occurrence of `kind`, using the phase's wall interval as
// the window. Throws kUnalignedClocks on traces without a clock offset.
std::vector<IdleReport> PhaseIdleReports(const Trace& trace, PhaseKind kind);
IdleTotals SumIdle(std::span<const IdleReport> reports);

struct KernelAggregate {
  std::string name;
  std::int64_t invocation_count = 0;
  DurationNs total_execution_ns = 0;
  double mean_execution_ns = 0.0;
  double share_of_busy = 0.0;
};

// Groups by kernel name. With a window, only kernels whose execution starts
// inside it are counted. Sorted by total execution time, largest first.
std::vector<KernelAggregate> AggregateKernels(
    const Trace& trace, std::optional<Interval> window = std::nullopt);

struct PhaseRollup {
  DurationNs device_busy_ns = 0;
  DurationNs phase_wall_ns = 0;
  std::int64_t kernel_count = 0;
};

struct PhaseAttributionReport {
  std::map<PhaseKind, PhaseRollup> phases;
  // Kernels whose start lies outside every phase.
  PhaseRollup unattributed;
};

// Assigns each kernel to the phase whose closed wall interval contains its
// t_start; a start on a shared boundary goes to the earlier phase. Throws
// kUnalignedClocks when the trace has no clock offset.
PhaseAttributionReport PhaseAttribution(const Trace& trace);

// Index of the phase that owns a kernel starting at `t`, by the rule above.
std::optional<std::size_t> FindOwningPhase(std::span<const PhaseRecord> phases,
                                           TimestampNs t);

}  // namespace lmmeter

#endif  // LMMETER_TIMELINE_H_
