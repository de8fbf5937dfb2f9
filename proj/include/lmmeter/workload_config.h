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

#ifndef LMMETER_WORKLOAD_CONFIG_H_
#define LMMETER_WORKLOAD_CONFIG_H_

#include <string>
#include <string_view>

#include "lmmeter/sim_engine.h"

namespace lmmeter {

inline constexpr int kWorkloadFormatVersion = 1;

// Workload files are JSON documents; see docs/workload_format.md. Parse
// failures throw kParseError, schema violations kInvalidSpec.
WorkloadSpec ParseWorkloadJson(std::string_view text);
WorkloadSpec LoadWorkloadFile(const std::string& path);

// Canonical serialization (two-space indent, trailing newline).
std::string WorkloadToJson(const WorkloadSpec& spec);

// "preset:<name>" resolves a compiled-in preset, anything else is a path.
WorkloadSpec ResolveWorkload(std::string_view reference);

}  // namespace lmmeter

#endif  // LMMETER_WORKLOAD_CONFIG_H_
