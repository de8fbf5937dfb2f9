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

#include "lmmeter/recorder.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <limits>
#include <utility>

#include "lmmeter/error.h"

namespace lmmeter {
namespace {

std::uint64_t NextSessionId() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

std::string UtcNowString() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

PhaseRecord MakePhase(PhaseKind kind, std::int32_t turn,
                      std::optional<std::int32_t> token_index,
                      TimestampNs start, TimestampNs end) {
  PhaseRecord record;
  record.kind = kind;
  record.turn = turn;
  record.token_index = token_index;
  record.t_start_ns = start;
  record.t_end_ns = end;
  return record;
}

}  // namespace

TimestampNs Now() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

TimerCalibration CalibrateTimer(std::int64_t iterations) {
  if (iterations < kMinCalibrationIterations) {
    throw Error(ErrorCode::kInvalidArgument,
                "calibration needs at least 1000 iterations");
  }
  TimerCalibration result;
  result.iterations = iterations;

  std::int64_t min_delta = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t i = 0; i < iterations; ++i) {
    const TimestampNs a = Now();
    const TimestampNs b = Now();
    if (b > a) min_delta = std::min(min_delta, b - a);
  }
  // A clock coarser than the loop never shows a nonzero delta; report 1 ns
  // rather than an undefined resolution.
  result.resolution_ns =
      min_delta == std::numeric_limits<std::int64_t>::max() ? 1 : min_delta;

  SessionOptions options;
  options.device_label = "calibration";
  options.phase_capacity = static_cast<std::size_t>(iterations) + 1;
  options.kernel_capacity = 0;
  TraceSession session(options);
  std::vector<std::int64_t> costs(static_cast<std::size_t>(iterations));
  for (std::int64_t i = 0; i < iterations; ++i) {
    const TimestampNs t0 = Now();
    PhaseHandle handle = session.BeginPhase(
        PhaseKind::kDecode, 0, static_cast<std::int32_t>(i % 1'000'000));
    session.EndPhase(handle);
    const TimestampNs t1 = Now();
    costs[static_cast<std::size_t>(i)] = t1 - t0;
  }
  const auto mid = costs.begin() + static_cast<std::ptrdiff_t>(costs.size() / 2);
  std::nth_element(costs.begin(), mid, costs.end());
  double median = static_cast<double>(*mid);
  if (costs.size() % 2 == 0) {
    const auto lower = std::max_element(costs.begin(), mid);
    median = (median + static_cast<double>(*lower)) / 2.0;
  }
  result.overhead_ns_median = std::max(0.0, median);
  return result;
}

TraceSession::TraceSession(SessionOptions options) : id_(NextSessionId()) {
  metadata_.device_label = std::move(options.device_label);
  metadata_.clock_offset_ns = options.clock_offset_ns;
  metadata_.created_at = UtcNowString();
  metadata_.prompt_tokens = options.prompt_tokens;
  metadata_.output_tokens = options.output_tokens;
  phases_.reserve(options.phase_capacity);
  kernels_.reserve(options.kernel_capacity);
}

void TraceSession::CheckNotSealedLocked() const {
  if (sealed_) throw Error(ErrorCode::kSessionSealed, "session is sealed");
}

void TraceSession::CheckNoOverlapLocked(TimestampNs start,
                                        TimestampNs end) const {
  if (open_phase_.has_value() && end > open_phase_->t_start_ns) {
    throw Error(ErrorCode::kPhaseOverlap,
                "phase overlaps the open " +
                    std::string(PhaseKindName(open_phase_->kind)) + " phase");
  }
  if (start >= max_phase_end_) return;
  for (const PhaseRecord& p : phases_) {
    if (start < p.t_end_ns && p.t_start_ns < end) {
      throw Error(ErrorCode::kPhaseOverlap,
                  "phase overlaps recorded " +
                      std::string(PhaseKindName(p.kind)) + " phase");
    }
  }
}

void TraceSession::AppendPhaseLocked(const PhaseRecord& record) {
  phases_.push_back(record);
  max_phase_end_ = std::max(max_phase_end_, record.t_end_ns);
}

PhaseHandle TraceSession::BeginPhase(PhaseKind kind, std::int32_t turn,
                                     std::optional<std::int32_t> token_index) {
  std::lock_guard<std::mutex> lock(mu_);
  CheckNotSealedLocked();
  if (open_phase_.has_value()) {
    throw Error(ErrorCode::kPhaseOverlap,
                std::string(PhaseKindName(kind)) + " begun while " +
                    std::string(PhaseKindName(open_phase_->kind)) +
                    " is still open");
  }
  const TimestampNs start = Now();
  ValidatePhaseRecord(MakePhase(kind, turn, token_index, start, start));
  if (start < max_phase_end_) {
    throw Error(ErrorCode::kPhaseOverlap,
                "phase begins before the end of a recorded phase");
  }
  const std::uint64_t sequence = next_sequence_++;
  open_phase_ = OpenPhase{sequence, kind, turn, token_index, start};
  return PhaseHandle(id_, sequence, kind, start);
}

PhaseRecord TraceSession::EndPhase(const PhaseHandle& handle) {
  std::lock_guard<std::mutex> lock(mu_);
  const TimestampNs end = Now();
  CheckNotSealedLocked();
  if (handle.session_id_ != id_ || handle.sequence_ >= next_sequence_) {
    throw Error(ErrorCode::kUnknownHandle,
                "handle was not issued by this session");
  }
  if (!open_phase_.has_value() || open_phase_->sequence != handle.sequence_) {
    throw Error(ErrorCode::kAlreadyEnded, "phase handle already ended");
  }
  const PhaseRecord record =
      MakePhase(open_phase_->kind, open_phase_->turn, open_phase_->token_index,
                open_phase_->t_start_ns, end);
  open_phase_.reset();
  AppendPhaseLocked(record);
  return record;
}

PhaseRecord TraceSession::RecordPhase(PhaseKind kind, std::int32_t turn,
                                      std::optional<std::int32_t> token_index,
                                      TimestampNs t_start_ns,
                                      TimestampNs t_end_ns) {
  const PhaseRecord record =
      MakePhase(kind, turn, token_index, t_start_ns, t_end_ns);
  ValidatePhaseRecord(record);
  std::lock_guard<std::mutex> lock(mu_);
  CheckNotSealedLocked();
  CheckNoOverlapLocked(t_start_ns, t_end_ns);
  AppendPhaseLocked(record);
  return record;
}

std::uint32_t TraceSession::InternLocked(std::string_view name) {
  if (auto it = name_ids_.find(name); it != name_ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  auto [it, inserted] = name_ids_.emplace(std::string(name), id);
  names_.push_back(&it->first);
  return id;
}

KernelRecordView TraceSession::RecordKernel(
    std::string_view name, std::uint32_t queue_id, TimestampNs t_cpu_enqueue_ns,
    TimestampNs t_queued_ns, TimestampNs t_submit_ns, TimestampNs t_start_ns,
    TimestampNs t_end_ns) {
  if (name.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "kernel name is empty");
  }
  if (t_cpu_enqueue_ns < 0 || t_queued_ns < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative kernel timestamp");
  }
  if (t_submit_ns < t_queued_ns) {
    throw Error(ErrorCode::kTimestampOrderViolation, "t_submit < t_queued");
  }
  if (t_start_ns < t_submit_ns) {
    throw Error(ErrorCode::kTimestampOrderViolation, "t_start < t_submit");
  }
  if (t_end_ns < t_start_ns) {
    throw Error(ErrorCode::kTimestampOrderViolation, "t_end < t_start");
  }
  std::lock_guard<std::mutex> lock(mu_);
  CheckNotSealedLocked();
  const std::uint32_t name_id = InternLocked(name);
  kernels_.push_back(StoredKernel{name_id, queue_id, t_cpu_enqueue_ns,
                                  t_queued_ns, t_submit_ns, t_start_ns,
                                  t_end_ns});
  return KernelRecordView{*names_[name_id], queue_id,    t_cpu_enqueue_ns,
                          t_queued_ns,      t_submit_ns, t_start_ns,
                          t_end_ns};
}

void TraceSession::SetTokenCounts(std::int64_t prompt_tokens,
                                  std::int64_t output_tokens) {
  std::lock_guard<std::mutex> lock(mu_);
  CheckNotSealedLocked();
  metadata_.prompt_tokens = prompt_tokens;
  metadata_.output_tokens = output_tokens;
}

Trace TraceSession::Seal() {
  std::lock_guard<std::mutex> lock(mu_);
  CheckNotSealedLocked();
  if (open_phase_.has_value()) {
    throw Error(ErrorCode::kOpenPhaseRemaining,
                std::string(PhaseKindName(open_phase_->kind)) +
                    " phase is still open");
  }
  const std::int64_t offset = metadata_.clock_offset_ns.value_or(0);
  std::vector<KernelRecord> kernels;
  kernels.reserve(kernels_.size());
  for (const StoredKernel& k : kernels_) {
    kernels.push_back(KernelRecord{*names_[k.name_id], k.queue_id,
                                   k.t_cpu_enqueue_ns, k.t_queued_ns + offset,
                                   k.t_submit_ns + offset,
                                   k.t_start_ns + offset, k.t_end_ns + offset});
  }
  sealed_ = true;
  return Trace::FromRecords(metadata_, std::move(phases_), std::move(kernels));
}

bool TraceSession::sealed() const {
  std::lock_guard<std::mutex> lock(mu_);
  return sealed_;
}

std::size_t TraceSession::phase_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return phases_.size();
}

std::size_t TraceSession::kernel_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return kernels_.size();
}

}  // namespace lmmeter
