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

#include "lmmeter/trace.h"

#include <algorithm>
#include <limits>
#include <utility>

#include "lmmeter/error.h"

namespace lmmeter {

struct Trace::Data {
  TraceMetadata metadata;
  std::vector<PhaseRecord> phases;
  std::vector<KernelRecord> kernels;
};

Trace::Trace() : data_(std::make_shared<const Data>()) {}

Trace::Trace(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

Trace Trace::FromRecords(TraceMetadata metadata,
                         std::vector<PhaseRecord> phases,
                         std::vector<KernelRecord> kernels) {
  for (const PhaseRecord& phase : phases) ValidatePhaseRecord(phase);
  for (const KernelRecord& kernel : kernels) ValidateKernelRecord(kernel);

  std::stable_sort(phases.begin(), phases.end(),
                   [](const PhaseRecord& a, const PhaseRecord& b) {
                     return a.t_start_ns < b.t_start_ns;
                   });
  for (std::size_t i = 1; i < phases.size(); ++i) {
    if (phases[i].t_start_ns < phases[i - 1].t_end_ns) {
      throw Error(ErrorCode::kPhaseOverlap,
                  std::string(PhaseKindName(phases[i].kind)) +
                      " phase overlaps preceding " +
                      std::string(PhaseKindName(phases[i - 1].kind)));
    }
  }
  std::stable_sort(kernels.begin(), kernels.end(),
                   [](const KernelRecord& a, const KernelRecord& b) {
                     return a.t_queued_ns < b.t_queued_ns;
                   });

  auto data = std::make_shared<Data>();
  data->metadata = std::move(metadata);
  data->phases = std::move(phases);
  data->kernels = std::move(kernels);
  return Trace(std::move(data));
}

const TraceMetadata& Trace::metadata() const { return data_->metadata; }

std::span<const PhaseRecord> Trace::phases() const { return data_->phases; }

std::span<const KernelRecord> Trace::kernels() const { return data_->kernels; }

Interval Trace::Extent() const {
  if (empty()) return {};
  TimestampNs lo = std::numeric_limits<TimestampNs>::max();
  TimestampNs hi = std::numeric_limits<TimestampNs>::min();
  for (const PhaseRecord& p : data_->phases) {
    lo = std::min(lo, p.t_start_ns);
    hi = std::max(hi, p.t_end_ns);
  }
  for (const KernelRecord& k : data_->kernels) {
    lo = std::min(lo, k.t_start_ns);
    hi = std::max(hi, k.t_end_ns);
  }
  return {lo, hi};
}

}  // namespace lmmeter
