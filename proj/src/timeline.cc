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

#include "lmmeter/timeline.h"

#include <algorithm>
#include <unordered_map>

#include "lmmeter/error.h"

namespace lmmeter {
namespace {

void RequireAligned(const Trace& trace) {
  if (!trace.clocks_aligned()) {
    throw Error(ErrorCode::kUnalignedClocks,
                "trace has no clock offset between host and device");
  }
}

double Fraction(DurationNs part, DurationNs whole) {
  return whole == 0 ? 0.0
                    : static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

LifecycleBreakdown Lifecycle(const KernelRecord& record) {
  return {record.t_submit_ns - record.t_queued_ns,
          record.t_start_ns - record.t_submit_ns,
          record.t_end_ns - record.t_start_ns};
}

IdleReport IdleGaps(std::span<const Interval> busy, const Interval& window) {
  if (window.end_ns < window.start_ns) {
    throw Error(ErrorCode::kInvalidArgument, "window end precedes start");
  }
  IdleReport report;
  report.window = window;
  if (window.length() == 0) return report;

  std::vector<Interval> clipped;
  clipped.reserve(busy.size());
  for (const Interval& iv : busy) {
    const TimestampNs lo = std::max(iv.start_ns, window.start_ns);
    const TimestampNs hi = std::min(iv.end_ns, window.end_ns);
    if (lo < hi) clipped.push_back({lo, hi});
  }
  std::sort(clipped.begin(), clipped.end(),
            [](const Interval& a, const Interval& b) {
              return a.start_ns < b.start_ns;
            });

  TimestampNs cursor = window.start_ns;
  for (const Interval& iv : clipped) {
    if (iv.start_ns > cursor) {
      report.gaps.push_back({cursor, iv.start_ns});
      report.idle_ns += iv.start_ns - cursor;
    }
    if (iv.end_ns > cursor) {
      report.busy_ns += iv.end_ns - std::max(cursor, iv.start_ns);
      cursor = iv.end_ns;
    }
  }
  if (cursor < window.end_ns) {
    report.gaps.push_back({cursor, window.end_ns});
    report.idle_ns += window.end_ns - cursor;
  }
  report.idle_fraction = Fraction(report.idle_ns, window.length());
  return report;
}

IdleReport IdleGaps(const Trace& trace, const Interval& window,
                    std::optional<std::uint32_t> queue) {
  std::vector<Interval> busy;
  busy.reserve(trace.kernels().size());
  for (const KernelRecord& k : trace.kernels()) {
    if (queue.has_value() && k.queue_id != *queue) continue;
    if (k.t_end_ns <= window.start_ns || k.t_start_ns >= window.end_ns) continue;
    busy.push_back({k.t_start_ns, k.t_end_ns});
  }
  return IdleGaps(busy, window);
}

std::vector<IdleReport> PhaseIdleReports(const Trace& trace, PhaseKind kind) {
  RequireAligned(trace);
  // Kernels are sorted by t_queued, not t_start, so index them by start.
  std::vector<Interval> busy;
  busy.reserve(trace.kernels().size());
  for (const KernelRecord& k : trace.kernels()) {
    busy.push_back({k.t_start_ns, k.t_end_ns});
  }
  std::sort(busy.begin(), busy.end(), [](const Interval& a, const Interval& b) {
    return a.start_ns < b.start_ns;
  });
  // Running max of end times lets a binary search find every interval that
  // can reach into a window.
  std::vector<TimestampNs> max_end(busy.size());
  TimestampNs running = 0;
  for (std::size_t i = 0; i < busy.size(); ++i) {
    running = i == 0 ? busy[i].end_ns : std::max(running, busy[i].end_ns);
    max_end[i] = running;
  }

  std::vector<IdleReport> reports;
  for (const PhaseRecord& phase : trace.phases()) {
    if (phase.kind != kind) continue;
    const Interval window{phase.t_start_ns, phase.t_end_ns};
    const auto first = static_cast<std::size_t>(
        std::upper_bound(max_end.begin(), max_end.end(), window.start_ns) -
        max_end.begin());
    const auto last = static_cast<std::size_t>(
        std::lower_bound(busy.begin(), busy.end(), window.end_ns,
                         [](const Interval& iv, TimestampNs t) {
                           return iv.start_ns < t;
                         }) -
        busy.begin());
    std::span<const Interval> candidates;
    if (first < last) candidates = std::span(busy).subspan(first, last - first);
    reports.push_back(IdleGaps(candidates, window));
  }
  return reports;
}

IdleTotals SumIdle(std::span<const IdleReport> reports) {
  IdleTotals totals;
  for (const IdleReport& r : reports) {
    ++totals.windows;
    totals.window_ns += r.window.length();
    totals.busy_ns += r.busy_ns;
    totals.idle_ns += r.idle_ns;
  }
  totals.idle_fraction = Fraction(totals.idle_ns, totals.window_ns);
  return totals;
}

std::vector<KernelAggregate> AggregateKernels(const Trace& trace,
                                              std::optional<Interval> window) {
  std::unordered_map<std::string_view, std::size_t> index;
  std::vector<KernelAggregate> out;
  DurationNs busy_total = 0;
  for (const KernelRecord& k : trace.kernels()) {
    if (window.has_value() &&
        (k.t_start_ns < window->start_ns || k.t_start_ns >= window->end_ns)) {
      continue;
    }
    auto [it, inserted] = index.try_emplace(k.name, out.size());
    if (inserted) {
      out.push_back({});
      out.back().name = k.name;
    }
    KernelAggregate& agg = out[it->second];
    agg.invocation_count += 1;
    agg.total_execution_ns += k.execution_ns();
    busy_total += k.execution_ns();
  }
  for (KernelAggregate& agg : out) {
    agg.mean_execution_ns = static_cast<double>(agg.total_execution_ns) /
                            static_cast<double>(agg.invocation_count);
    agg.share_of_busy = Fraction(agg.total_execution_ns, busy_total);
  }
  std::sort(out.begin(), out.end(),
            [](const KernelAggregate& a, const KernelAggregate& b) {
              if (a.total_execution_ns != b.total_execution_ns) {
                return a.total_execution_ns > b.total_execution_ns;
              }
              return a.name < b.name;
            });
  return out;
}

std::optional<std::size_t> FindOwningPhase(std::span<const PhaseRecord> phases,
                                           TimestampNs t) {
  // Phases are sorted and disjoint, so end times are sorted too.
  const auto it = std::lower_bound(
      phases.begin(), phases.end(), t,
      [](const PhaseRecord& p, TimestampNs value) { return p.t_end_ns < value; });
  if (it == phases.end() || it->t_start_ns > t) return std::nullopt;
  return static_cast<std::size_t>(it - phases.begin());
}

PhaseAttributionReport PhaseAttribution(const Trace& trace) {
  RequireAligned(trace);
  PhaseAttributionReport report;
  const auto phases = trace.phases();
  for (const PhaseRecord& p : phases) {
    report.phases[p.kind].phase_wall_ns += p.duration_ns();
  }
  for (const KernelRecord& k : trace.kernels()) {
    const auto owner = FindOwningPhase(phases, k.t_start_ns);
    PhaseRollup& rollup =
        owner.has_value() ? report.phases[phases[*owner].kind]
                          : report.unattributed;
    rollup.device_busy_ns += k.execution_ns();
    rollup.kernel_count += 1;
  }
  return report;
}

}  // namespace lmmeter
