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

#include "lmmeter/workload_config.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lmmeter/error.h"

namespace lmmeter {
namespace {

using Json = nlohmann::ordered_json;

template <typename T>
T Field(const Json& obj, const char* key, T fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->template get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec,
                where + "." + key + " has the wrong type: " + e.what());
  }
}

template <typename T>
T RequiredField(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw Error(ErrorCode::kInvalidSpec, where + " is missing '" + key + "'");
  }
  return Field<T>(obj, key, T{}, where);
}

KernelSpec ParseKernel(const Json& obj, const std::string& where) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kInvalidSpec, where + " must be an object");
  }
  KernelSpec k;
  k.name = RequiredField<std::string>(obj, "name", where);
  k.base_latency_ns = RequiredField<std::int64_t>(obj, "base_latency_ns", where);
  k.per_step_slope_ns = Field<std::int64_t>(obj, "per_step_slope_ns", 0, where);
  k.dispatch_gap_ns = Field<std::int64_t>(obj, "dispatch_gap_ns", 0, where);
  k.queue_delay_ns = Field<std::int64_t>(obj, "queue_delay_ns", 0, where);
  k.submit_delay_ns = Field<std::int64_t>(obj, "submit_delay_ns", 0, where);
  k.invocations_per_phase =
      Field<std::int32_t>(obj, "invocations_per_phase", 1, where);
  return k;
}

}  // namespace

WorkloadSpec ParseWorkloadJson(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kInvalidSpec, "workload must be a JSON object");
  }
  const int version = Field<int>(doc, "version", kWorkloadFormatVersion, "workload");
  if (version != kWorkloadFormatVersion) {
    throw Error(ErrorCode::kUnknownVersion,
                "workload version " + std::to_string(version));
  }
  WorkloadSpec spec;
  spec.name = RequiredField<std::string>(doc, "name", "workload");
  if (auto it = doc.find("jitter"); it != doc.end()) {
    spec.jitter.seed = Field<std::uint64_t>(*it, "seed", 0, "jitter");
    spec.jitter.sigma_rel = Field<double>(*it, "sigma_rel", 0.0, "jitter");
  }
  const auto phases = doc.find("phases");
  if (phases == doc.end() || !phases->is_array()) {
    throw Error(ErrorCode::kInvalidSpec, "workload needs a 'phases' array");
  }
  for (std::size_t i = 0; i < phases->size(); ++i) {
    const Json& p = (*phases)[i];
    const std::string where = "phases[" + std::to_string(i) + "]";
    if (!p.is_object()) {
      throw Error(ErrorCode::kInvalidSpec, where + " must be an object");
    }
    const auto kind_name = RequiredField<std::string>(p, "kind", where);
    const auto kind = ParsePhaseKind(kind_name);
    if (!kind.has_value()) {
      throw Error(ErrorCode::kInvalidSpec,
                  where + ": unknown phase kind '" + kind_name + "'");
    }
    PhaseScript script;
    script.kind = *kind;
    script.host_time_ns = Field<std::int64_t>(p, "host_time_ns", 0, where);
    if (auto ks = p.find("kernels"); ks != p.end()) {
      if (!ks->is_array()) {
        throw Error(ErrorCode::kInvalidSpec, where + ".kernels must be an array");
      }
      for (std::size_t j = 0; j < ks->size(); ++j) {
        script.kernels.push_back(ParseKernel(
            (*ks)[j], where + ".kernels[" + std::to_string(j) + "]"));
      }
    }
    spec.scripts.push_back(std::move(script));
  }
  ValidateWorkload(spec);
  return spec;
}

WorkloadSpec LoadWorkloadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseWorkloadJson(buffer.str());
}

std::string WorkloadToJson(const WorkloadSpec& spec) {
  Json doc;
  doc["version"] = kWorkloadFormatVersion;
  doc["name"] = spec.name;
  doc["jitter"] = {{"seed", spec.jitter.seed},
                   {"sigma_rel", spec.jitter.sigma_rel}};
  doc["phases"] = Json::array();
  for (const PhaseScript& script : spec.scripts) {
    Json p;
    p["kind"] = std::string(PhaseKindName(script.kind));
    p["host_time_ns"] = script.host_time_ns;
    p["kernels"] = Json::array();
    for (const KernelSpec& k : script.kernels) {
      p["kernels"].push_back({
          {"name", k.name},
          {"base_latency_ns", k.base_latency_ns},
          {"per_step_slope_ns", k.per_step_slope_ns},
          {"dispatch_gap_ns", k.dispatch_gap_ns},
          {"queue_delay_ns", k.queue_delay_ns},
          {"submit_delay_ns", k.submit_delay_ns},
          {"invocations_per_phase", k.invocations_per_phase},
      });
    }
    doc["phases"].push_back(std::move(p));
  }
  return doc.dump(2) + "\n";
}

WorkloadSpec ResolveWorkload(std::string_view reference) {
  constexpr std::string_view kPrefix = "preset:";
  if (reference.substr(0, kPrefix.size()) == kPrefix) {
    const std::string_view name = reference.substr(kPrefix.size());
    if (auto preset = FindPreset(name)) return *preset;
    throw Error(ErrorCode::kInvalidArgument,
                "unknown preset '" + std::string(name) + "'");
  }
  return LoadWorkloadFile(std::string(reference));
}

}  // namespace lmmeter
