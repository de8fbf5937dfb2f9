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

#ifndef LMMETER_TRACE_H_
#define LMMETER_TRACE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmmeter/types.h"

namespace lmmeter {

struct TraceMetadata {
  std::string device_label;
  // Offset that maps device timestamps into the host clock domain. Unset
  // means the two domains were never reconciled; cross-domain analyses then
  // refuse to run.
  std::optional<std::int64_t> clock_offset_ns;
  // Wall-clock creation time, informational only (not serialized).
  std::string created_at;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> output_tokens;
};

// An immutable, time-sorted profiling session. Copies share storage, so a
// Trace is cheap to pass by value and safe to read from many threads.
class Trace {
 public:
  Trace();

  // Validates every record, rejects overlapping phases, then stable-sorts
  // phases by t_start and kernels by t_queued. Timestamps are taken as-is.
  static Trace FromRecords(TraceMetadata metadata,
                           std::vector<PhaseRecord> phases,
                           std::vector<KernelRecord> kernels);

  const TraceMetadata& metadata() const;
  std::span<const PhaseRecord> phases() const;
  std::span<const KernelRecord> kernels() const;

  bool clocks_aligned() const {
    return metadata().clock_offset_ns.has_value();
  }
  bool empty() const { return phases().empty() && kernels().empty(); }

  // Smallest interval covering every phase and every kernel execution.
  // Empty trace yields [0, 0).
  Interval Extent() const;

 private:
  struct Data;
  explicit Trace(std::shared_ptr<const Data> data);

  std::shared_ptr<const Data> data_;
};

}  // namespace lmmeter

#endif  // LMMETER_TRACE_H_
