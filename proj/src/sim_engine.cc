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

#include "lmmeter/sim_engine.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include "lmmeter/error.h"

namespace lmmeter {
namespace {

// Jittered latency terms; part of the generator key.
enum class Term : std::uint64_t {
  kLatency = 1,
  kDispatchGap = 2,
  kQueueDelay = 3,
  kSubmitDelay = 4,
  kHostTime = 5,
};

std::uint64_t Mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double UnitOpen(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

class Jitter {
 public:
  explicit Jitter(const JitterModel& model) : model_(model) {}

  DurationNs Apply(DurationNs value, DurationNs floor, std::uint64_t phase_seq,
                   std::uint64_t invocation, std::uint64_t copy,
                   Term term) const {
    if (model_.sigma_rel == 0.0 || value == 0) return std::max(value, floor);
    std::uint64_t h = Mix(model_.seed);
    h = Mix(h ^ phase_seq);
    h = Mix(h ^ invocation);
    h = Mix(h ^ copy);
    h = Mix(h ^ static_cast<std::uint64_t>(term));
    const double u1 = UnitOpen(h);
    const double u2 = UnitOpen(Mix(h ^ 0x5851f42d4c957f2dULL));
    const double g = std::sqrt(-2.0 * std::log(u1)) *
                     std::cos(2.0 * std::numbers::pi * u2);
    const double scaled =
        static_cast<double>(value) * std::exp(model_.sigma_rel * g);
    return std::max(static_cast<DurationNs>(std::llround(scaled)), floor);
  }

 private:
  JitterModel model_;
};

class Simulator {
 public:
  Simulator(const WorkloadSpec& spec, const RunOptions& options,
            TraceSession& session, std::int64_t clock_offset)
      : spec_(spec),
        options_(options),
        session_(session),
        jitter_(spec.jitter),
        clock_offset_(clock_offset) {}

  GroundTruth Execute() {
    for (std::int32_t turn = 0; turn < options_.turns; ++turn) {
      RunPhase(PhaseKind::kEmbedding, turn, std::nullopt, 0);
      RunPhase(PhaseKind::kPrefill, turn, std::nullopt, 0);
      for (std::int32_t step = 0; step < options_.output_tokens; ++step) {
        RunPhase(PhaseKind::kDecode, turn, step, step);
        RunPhase(PhaseKind::kSoftmax, turn, step, step);
        RunPhase(PhaseKind::kCopyProbsToCpu, turn, step, step);
        RunPhase(PhaseKind::kSampling, turn, step, step);
      }
    }
    truth_.prompt_tokens =
        static_cast<std::int64_t>(options_.prompt_tokens) * options_.turns;
    truth_.output_tokens =
        static_cast<std::int64_t>(options_.output_tokens) * options_.turns;
    return std::move(truth_);
  }

 private:
  void Emit(const std::string& name, TimestampNs enqueue, TimestampNs queued,
            TimestampNs submit, TimestampNs start, TimestampNs end) {
    session_.RecordKernel(name, 0, enqueue, queued - clock_offset_,
                          submit - clock_offset_, start - clock_offset_,
                          end - clock_offset_);
    KernelTruth& kt = truth_.kernels[name];
    kt.total_ns += end - start;
    kt.count += 1;
  }

  void RunPhase(PhaseKind kind, std::int32_t turn,
                std::optional<std::int32_t> token, std::int64_t step) {
    const PhaseScript& script = *spec_.FindScript(kind);
    const std::uint64_t seq = phase_seq_++;
    const TimestampNs phase_start = cursor_;
    DurationNs busy = 0;
    std::int64_t kernel_count = 0;

    std::int32_t rounds = 0;
    for (const KernelSpec& k : script.kernels) {
      rounds = std::max(rounds, k.invocations_per_phase);
    }
    std::uint64_t invocation = 0;
    for (std::int32_t round = 0; round < rounds; ++round) {
      for (const KernelSpec& k : script.kernels) {
        if (k.invocations_per_phase <= round) continue;
        const DurationNs nominal = k.base_latency_ns + k.per_step_slope_ns * step;
        const DurationNs latency =
            jitter_.Apply(nominal, 1, seq, invocation, 0, Term::kLatency);
        const DurationNs gap = jitter_.Apply(k.dispatch_gap_ns, 0, seq,
                                             invocation, 0, Term::kDispatchGap);
        const DurationNs queue = jitter_.Apply(k.queue_delay_ns, 0, seq,
                                               invocation, 0, Term::kQueueDelay);
        const DurationNs submit_delay = jitter_.Apply(
            k.submit_delay_ns, 0, seq, invocation, 0, Term::kSubmitDelay);

        const TimestampNs enqueue = cursor_ + gap;
        const TimestampNs submit = enqueue + queue;
        const TimestampNs start = submit + submit_delay;
        const TimestampNs end = start + latency;
        Emit(k.name, enqueue, enqueue, submit, start, end);
        cursor_ = end;
        busy += latency;
        ++kernel_count;

        if (options_.duplication.has_value() &&
            options_.duplication->kernel_name == k.name) {
          for (std::int32_t copy = 1; copy <= options_.duplication->n; ++copy) {
            const DurationNs copy_latency = jitter_.Apply(
                nominal, 1, seq, invocation,
                static_cast<std::uint64_t>(copy), Term::kLatency);
            const TimestampNs copy_start = cursor_;
            Emit(k.name, enqueue, enqueue, submit, copy_start,
                 copy_start + copy_latency);
            cursor_ = copy_start + copy_latency;
            busy += copy_latency;
            ++kernel_count;
          }
        }
        ++invocation;
      }
    }
    const DurationNs host =
        jitter_.Apply(script.host_time_ns, 0, seq, 0, 0, Term::kHostTime);
    cursor_ += host;
    session_.RecordPhase(kind, turn, token, phase_start, cursor_);

    PhaseWindowTruth window;
    window.kind = kind;
    window.turn = turn;
    window.token_index = token;
    window.window = {phase_start, cursor_};
    window.busy_ns = busy;
    window.idle_ns = window.window.length() - busy;
    window.kernel_count = kernel_count;
    truth_.windows.push_back(window);
    truth_.phase_busy_ns[kind] += busy;
    truth_.phase_wall_ns[kind] += window.window.length();
    truth_.phase_kernel_count[kind] += kernel_count;
  }

  const WorkloadSpec& spec_;
  const RunOptions& options_;
  TraceSession& session_;
  Jitter jitter_;
  std::int64_t clock_offset_;
  TimestampNs cursor_ = 0;
  std::uint64_t phase_seq_ = 0;
  GroundTruth truth_;
};

void ValidateRunOptions(const RunOptions& options) {
  if (options.prompt_tokens < 1 || options.output_tokens < 1 ||
      options.turns < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "prompt_tokens, output_tokens and turns must be >= 1");
  }
  if (options.duplication.has_value() && options.duplication->n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "duplication count must be >= 1");
  }
}

KernelSpec Kernel(std::string name, DurationNs base, DurationNs gap,
                  DurationNs queue, DurationNs submit, std::int32_t invocations,
                  DurationNs slope = 0) {
  KernelSpec k;
  k.name = std::move(name);
  k.base_latency_ns = base;
  k.per_step_slope_ns = slope;
  k.dispatch_gap_ns = gap;
  k.queue_delay_ns = queue;
  k.submit_delay_ns = submit;
  k.invocations_per_phase = invocations;
  return k;
}

}  // namespace

const PhaseScript* WorkloadSpec::FindScript(PhaseKind kind) const {
  for (const PhaseScript& s : scripts) {
    if (s.kind == kind) return &s;
  }
  return nullptr;
}

const KernelSpec* WorkloadSpec::FindKernel(std::string_view kernel) const {
  for (const PhaseScript& s : scripts) {
    for (const KernelSpec& k : s.kernels) {
      if (k.name == kernel) return &k;
    }
  }
  return nullptr;
}

void ValidateWorkload(const WorkloadSpec& spec) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kInvalidSpec,
                "workload '" + spec.name + "': " + what);
  };
  if (!(spec.jitter.sigma_rel >= 0.0) || !std::isfinite(spec.jitter.sigma_rel)) {
    fail("jitter sigma_rel must be a finite nonnegative number");
  }
  std::set<PhaseKind> seen;
  for (const PhaseScript& script : spec.scripts) {
    const std::string phase(PhaseKindName(script.kind));
    if (!seen.insert(script.kind).second) fail("duplicate script for " + phase);
    if (script.host_time_ns < 0) fail(phase + " host_time_ns is negative");
    const bool needs_kernels = script.kind == PhaseKind::kPrefill ||
                               script.kind == PhaseKind::kDecode ||
                               script.kind == PhaseKind::kSoftmax;
    if (needs_kernels && script.kernels.empty()) {
      fail(phase + " needs at least one kernel");
    }
    if (!needs_kernels && script.kernels.size() > 1) {
      fail(phase + " allows at most one kernel");
    }
    std::set<std::string_view> names;
    for (const KernelSpec& k : script.kernels) {
      if (k.name.empty()) fail("kernel with empty name in " + phase);
      if (!names.insert(k.name).second) {
        fail("kernel '" + k.name + "' repeated in " + phase);
      }
      if (k.base_latency_ns < 1) fail(k.name + ": base_latency_ns < 1");
      if (k.per_step_slope_ns < 0 || k.dispatch_gap_ns < 0 ||
          k.queue_delay_ns < 0 || k.submit_delay_ns < 0) {
        fail(k.name + ": negative delay or slope");
      }
      if (k.invocations_per_phase < 1) {
        fail(k.name + ": invocations_per_phase < 1");
      }
    }
  }
  for (PhaseKind kind : kAllPhaseKinds) {
    if (!seen.count(kind)) {
      fail("missing script for " + std::string(PhaseKindName(kind)));
    }
  }
}

SimulationResult Run(const WorkloadSpec& spec, const RunOptions& options,
                     TraceSession& session) {
  ValidateWorkload(spec);
  ValidateRunOptions(options);
  if (options.duplication.has_value() &&
      spec.FindKernel(options.duplication->kernel_name) == nullptr) {
    throw Error(ErrorCode::kUnknownKernel,
                "no kernel named '" + options.duplication->kernel_name + "'");
  }
  // A session without an offset is treated as sharing the host clock.
  Simulator simulator(spec, options, session,
                      session.clock_offset_ns().value_or(0));
  GroundTruth truth = simulator.Execute();
  session.SetTokenCounts(truth.prompt_tokens, truth.output_tokens);
  SimulationResult result{session.Seal(), std::move(truth)};
  return result;
}

SimulationResult Run(const WorkloadSpec& spec, const RunOptions& options) {
  SessionOptions session_options;
  session_options.device_label = "sim:" + spec.name;
  session_options.clock_offset_ns = 0;
  TraceSession session(session_options);
  return Run(spec, options, session);
}

SimulationResult RunWithDuplication(const WorkloadSpec& spec,
                                    const DuplicationPlan& plan,
                                    RunOptions options, TraceSession& session) {
  options.duplication = plan;
  return Run(spec, options, session);
}

SimulationResult RunWithDuplication(const WorkloadSpec& spec,
                                    const DuplicationPlan& plan,
                                    RunOptions options) {
  options.duplication = plan;
  return Run(spec, options);
}

WorkloadSpec PresetGemmaDecode() {
  constexpr std::int32_t kLayers = 26;
  WorkloadSpec spec;
  spec.name = std::string(kGemmaPresetName);

  PhaseScript embedding{PhaseKind::kEmbedding, {}, 15'000};
  embedding.kernels.push_back(
      Kernel("dequantize_take1", 105'000, 20'000, 3'000, 2'000, 1));

  PhaseScript prefill{PhaseKind::kPrefill, {}, 0};
  prefill.kernels = {
      Kernel("rms_norm1", 90'000, 30'000, 4'000, 2'000, kLayers),
      Kernel("dequantize1_NT_matmul5", 3'150'000, 30'000, 4'000, 2'000,
             kLayers),
      Kernel("batch_prefill_paged_kv", 1'200'000, 30'000, 4'000, 2'000,
             kLayers),
      Kernel("dequantize2_NT_matmul6", 1'220'000, 30'000, 4'000, 2'000,
             kLayers),
      Kernel("dequantize3_NT_matmul7", 12'800'000, 30'000, 4'000, 2'000,
             kLayers),
      Kernel("dequantize4_NT_matmul8", 14'100'000, 30'000, 4'000, 2'000,
             kLayers),
  };

  // Per decode step: 26 rounds of 11 kernels plus the final logit GEMM.
  // Busy at step 0 is 11.880 ms and host/queue gaps total 3.157 ms.
  PhaseScript decode{PhaseKind::kDecode, {}, 0};
  decode.kernels = {
      Kernel("rms_norm2", 6'000, 8'000, 3'000, 2'000, kLayers),
      Kernel("dequantize1_NT_matmul10", 70'000, 6'000, 2'000, 1'000, kLayers),
      Kernel("fused_rope", 5'000, 8'000, 3'000, 2'000, kLayers),
      Kernel("tir_kv_cache_transpose_append", 5'000, 8'000, 3'000, 2'000,
             kLayers),
      Kernel(std::string(kPagedKvKernel), 50'000, 4'000, 2'000, 1'000, kLayers,
             3'400),
      Kernel("dequantize2_NT_matmul11", 30'000, 6'000, 2'000, 1'000, kLayers),
      Kernel("fuse_add_norm_prefill", 6'000, 8'000, 3'000, 2'000, kLayers),
      Kernel("dequantize3_NT_matmul12", 160'000, 6'000, 2'000, 1'000, kLayers),
      Kernel("split2_gelu_tanh2_multiply7", 9'000, 8'000, 3'000, 2'000,
             kLayers),
      Kernel("dequantize4_NT_matmul13", 78'000, 6'000, 2'000, 1'000, kLayers),
      Kernel("multiply6", 4'000, 8'000, 3'000, 2'000, kLayers),
      Kernel("dequantize_NT_matmul14_divide2_tir_tanh2_multiply8", 882'000,
             8'000, 2'000, 1'000, 1),
  };

  PhaseScript softmax{PhaseKind::kSoftmax, {}, 0};
  softmax.kernels = {
      Kernel("chunk_lse", 280'000, 10'000, 3'000, 2'000, 1),
      Kernel("softmax_with_chunked_sum", 240'000, 10'000, 3'000, 2'000, 1),
  };

  PhaseScript copy{PhaseKind::kCopyProbsToCpu, {}, 120'000};
  copy.kernels.push_back(
      Kernel("copy_probs_to_host", 350'000, 15'000, 3'000, 2'000, 1));

  PhaseScript sampling{PhaseKind::kSampling, {}, 65'000};

  spec.scripts = {std::move(embedding), std::move(prefill), std::move(decode),
                  std::move(softmax),   std::move(copy),    std::move(sampling)};
  return spec;
}

std::optional<WorkloadSpec> FindPreset(std::string_view name) {
  if (name == kGemmaPresetName) return PresetGemmaDecode();
  return std::nullopt;
}

std::vector<std::string> PresetNames() {
  return {std::string(kGemmaPresetName)};
}

}  // namespace lmmeter
