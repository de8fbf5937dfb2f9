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

#ifndef LMMETER_SIM_ENGINE_H_
#define LMMETER_SIM_ENGINE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmmeter/recorder.h"
#include "lmmeter/trace.h"
#include "lmmeter/types.h"

namespace lmmeter {

struct KernelSpec {
  std::string name;
  DurationNs base_latency_ns = 1;
  // Added device latency per decode step; nonzero only for kernels whose
  // cost tracks the KV-cache length.
  DurationNs per_step_slope_ns = 0;
  // Host-side preparation before each enqueue. The device idles meanwhile.
  DurationNs dispatch_gap_ns = 0;
  DurationNs queue_delay_ns = 0;   // queued -> submit
  DurationNs submit_delay_ns = 0;  // submit -> start
  std::int32_t invocations_per_phase = 1;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

struct PhaseScript {
  PhaseKind kind = PhaseKind::kEmbedding;
  // Issued in rounds: round r runs every kernel whose invocations_per_phase
  // exceeds r, in list order. A 26-layer decoder is 26 rounds.
  std::vector<KernelSpec> kernels;
  // Host-only time appended after the last kernel completes.
  DurationNs host_time_ns = 0;

  friend bool operator==(const PhaseScript&, const PhaseScript&) = default;
};

struct JitterModel {
  std::uint64_t seed = 0;
  // Every latency term is multiplied by exp(sigma_rel * g), g ~ N(0, 1)
  // drawn from a counter-based generator keyed on the event's identity.
  double sigma_rel = 0.0;

  friend bool operator==(const JitterModel&, const JitterModel&) = default;
};

struct WorkloadSpec {
  std::string name;
  std::vector<PhaseScript> scripts;  // exactly one per PhaseKind
  JitterModel jitter;

  const PhaseScript* FindScript(PhaseKind kind) const;
  const KernelSpec* FindKernel(std::string_view name) const;

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

// Throws kInvalidSpec describing the first problem found.
void ValidateWorkload(const WorkloadSpec& spec);

struct DuplicationPlan {
  std::string kernel_name;
  std::int32_t n = 1;
};

struct RunOptions {
  std::int32_t prompt_tokens = 1;
  std::int32_t output_tokens = 1;
  std::int32_t turns = 1;
  std::optional<DuplicationPlan> duplication;
};

struct KernelTruth {
  std::int64_t total_ns = 0;
  std::int64_t count = 0;
  double mean_ns() const {
    return count == 0 ? 0.0
                      : static_cast<double>(total_ns) /
                            static_cast<double>(count);
  }
};

struct PhaseWindowTruth {
  PhaseKind kind = PhaseKind::kEmbedding;
  std::int32_t turn = 0;
  std::optional<std::int32_t> token_index;
  Interval window;
  DurationNs busy_ns = 0;
  DurationNs idle_ns = 0;
  std::int64_t kernel_count = 0;

  double idle_fraction() const {
    return window.length() == 0 ? 0.0
                                : static_cast<double>(idle_ns) /
                                      static_cast<double>(window.length());
  }
};

// Realized values of the simulated run, i.e. what a perfect profiler would
// reconstruct. Duplicated invocations are included.
struct GroundTruth {
  std::map<std::string, KernelTruth> kernels;
  std::map<PhaseKind, DurationNs> phase_busy_ns;
  std::map<PhaseKind, DurationNs> phase_wall_ns;
  std::map<PhaseKind, std::int64_t> phase_kernel_count;
  std::vector<PhaseWindowTruth> windows;  // in execution order
  std::int64_t prompt_tokens = 0;         // summed over turns
  std::int64_t output_tokens = 0;
};

struct SimulationResult {
  Trace trace;
  GroundTruth truth;
};

// Emits, per turn, one embedding and one prefill phase followed by
// decode/softmax/copy_probs_to_cpu/sampling for each output token, records
// every event through `session`, and seals it. Kernel k at decode step s
// takes base + slope * s before jitter. Device timestamps are written in the
// device domain (host time minus the session's clock offset).
SimulationResult Run(const WorkloadSpec& spec, const RunOptions& options,
                     TraceSession& session);

// Convenience overload using a fresh session with a zero clock offset.
SimulationResult Run(const WorkloadSpec& spec, const RunOptions& options);

// Each invocation of plan.kernel_name is followed by plan.n back-to-back
// copies with independent jitter draws. Events other than the copies draw
// exactly the same jitter as the undup'd run, so phase-total deltas isolate
// the copies. Throws kUnknownKernel when the kernel is absent.
SimulationResult RunWithDuplication(const WorkloadSpec& spec,
                                    const DuplicationPlan& plan,
                                    RunOptions options, TraceSession& session);
SimulationResult RunWithDuplication(const WorkloadSpec& spec,
                                    const DuplicationPlan& plan,
                                    RunOptions options);

// Gemma-2-2B-style decoder on a mobile GPU. Constants are calibrated so that
// a decode step idles ~21% at step 0, the three fused GEMMs carry >60% of
// busy time, micro-kernels <10%, batch_decode_paged_kv reaches 0.9 ms per
// invocation at step 250, and a 256-token run idles ~12% overall.
WorkloadSpec PresetGemmaDecode();

inline constexpr std::string_view kPagedKvKernel = "batch_decode_paged_kv";
inline constexpr std::string_view kGemmaPresetName = "gemma2-decode";

// Looks up a compiled-in preset by name ("gemma2-decode").
std::optional<WorkloadSpec> FindPreset(std::string_view name);
std::vector<std::string> PresetNames();

}  // namespace lmmeter

#endif  // LMMETER_SIM_ENGINE_H_
