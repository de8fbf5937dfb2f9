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

#include "lmmeter/trace_io.h"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "json.hpp"

#include "lmmeter/error.h"

namespace lmmeter {
namespace {

using Json = nlohmann::ordered_json;

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  return out;
}

void FinishWrite(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

Json OptionalInt(const std::optional<std::int64_t>& v) {
  return v.has_value() ? Json(*v) : Json(nullptr);
}

Json HeaderJson(const TraceMetadata& m) {
  Json j;
  j["ev"] = "session";
  j["version"] = kTraceFormatVersion;
  j["device_label"] = m.device_label;
  j["clock_offset_ns"] = OptionalInt(m.clock_offset_ns);
  if (m.prompt_tokens.has_value()) j["prompt_tokens"] = *m.prompt_tokens;
  if (m.output_tokens.has_value()) j["output_tokens"] = *m.output_tokens;
  return j;
}

Json PhaseJson(const PhaseRecord& p) {
  Json j;
  j["ev"] = "phase";
  j["kind"] = std::string(PhaseKindName(p.kind));
  j["turn"] = p.turn;
  j["token"] = p.token_index.has_value() ? Json(*p.token_index) : Json(nullptr);
  j["t_start_ns"] = p.t_start_ns;
  j["t_end_ns"] = p.t_end_ns;
  return j;
}

Json KernelJson(const KernelRecord& k) {
  Json j;
  j["ev"] = "kernel";
  j["name"] = k.name;
  j["queue"] = k.queue_id;
  j["t_cpu_enqueue_ns"] = k.t_cpu_enqueue_ns;
  j["t_queued_ns"] = k.t_queued_ns;
  j["t_submit_ns"] = k.t_submit_ns;
  j["t_start_ns"] = k.t_start_ns;
  j["t_end_ns"] = k.t_end_ns;
  return j;
}

class LineParser {
 public:
  LineParser(const Json& j, std::int64_t line) : j_(j), line_(line) {}

  [[noreturn]] void Fail(const std::string& message) const {
    throw Error(ErrorCode::kParseError, message, line_);
  }

  const Json& Field(const char* key) const {
    const auto it = j_.find(key);
    if (it == j_.end()) Fail(std::string("missing field '") + key + "'");
    return *it;
  }

  std::int64_t Int(const char* key) const {
    const Json& v = Field(key);
    if (!v.is_number_integer()) {
      Fail(std::string("field '") + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
  }

  std::optional<std::int64_t> OptionalIntField(const char* key,
                                               bool required) const {
    const auto it = j_.find(key);
    if (it == j_.end()) {
      if (required) Fail(std::string("missing field '") + key + "'");
      return std::nullopt;
    }
    if (it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) {
      Fail(std::string("field '") + key + "' must be an integer or null");
    }
    return it->get<std::int64_t>();
  }

  std::string String(const char* key) const {
    const Json& v = Field(key);
    if (!v.is_string()) Fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }

 private:
  const Json& j_;
  std::int64_t line_;
};

std::int32_t ToInt32(std::int64_t v, const LineParser& p, const char* key) {
  if (v < INT32_MIN || v > INT32_MAX) {
    p.Fail(std::string("field '") + key + "' out of range");
  }
  return static_cast<std::int32_t>(v);
}

Json MicrosJson(std::int64_t ns) {
  return Json(static_cast<double>(ns) / 1000.0);
}

void WriteCsvField(std::ostream& out, const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) {
    out << text;
    return;
  }
  out << '"';
  for (char c : text) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string FormatCell(const CsvCell& cell, const CsvColumn& column) {
  switch (column.type) {
    case CsvType::kText:
      if (const auto* s = std::get_if<std::string>(&cell)) return *s;
      break;
    case CsvType::kInteger:
      if (const auto* i = std::get_if<std::int64_t>(&cell)) {
        return std::to_string(*i);
      }
      break;
    case CsvType::kLatencyMs:
    case CsvType::kAlpha:
    case CsvType::kEpsStar:
    case CsvType::kFraction: {
      const auto* d = std::get_if<double>(&cell);
      if (d == nullptr) break;
      switch (column.type) {
        case CsvType::kLatencyMs: return FormatLatencyMs(*d);
        case CsvType::kAlpha: return FormatAlpha(*d);
        case CsvType::kEpsStar: return FormatEpsStar(*d);
        default: return FormatFixed(*d, 4);
      }
    }
  }
  throw Error(ErrorCode::kInvalidArgument,
              "cell type does not match column '" + column.name + "'");
}

}  // namespace

void WriteJsonl(const Trace& trace, std::ostream& out) {
  out << HeaderJson(trace.metadata()).dump() << '\n';
  for (const PhaseRecord& p : trace.phases()) out << PhaseJson(p).dump() << '\n';
  for (const KernelRecord& k : trace.kernels()) {
    out << KernelJson(k).dump() << '\n';
  }
}

void WriteJsonl(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out = OpenForWrite(path);
  WriteJsonl(trace, out);
  FinishWrite(out, path);
}

Trace ReadJsonl(std::istream& in) {
  TraceMetadata metadata;
  std::vector<PhaseRecord> phases;
  std::vector<KernelRecord> kernels;
  std::string text;
  std::int64_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kParseError, "malformed JSON", line);
    }
    if (!j.is_object()) {
      throw Error(ErrorCode::kParseError, "expected a JSON object", line);
    }
    const LineParser p(j, line);
    const std::string ev = p.String("ev");
    if (!have_header) {
      if (ev != "session") p.Fail("first line must be the session header");
      const std::int64_t version = p.Int("version");
      if (version != kTraceFormatVersion) {
        throw Error(ErrorCode::kUnknownVersion,
                    "trace format version " + std::to_string(version), line);
      }
      metadata.device_label = p.String("device_label");
      metadata.clock_offset_ns = p.OptionalIntField("clock_offset_ns", true);
      metadata.prompt_tokens = p.OptionalIntField("prompt_tokens", false);
      metadata.output_tokens = p.OptionalIntField("output_tokens", false);
      have_header = true;
      continue;
    }
    try {
      if (ev == "phase") {
        PhaseRecord r;
        const std::string kind = p.String("kind");
        const auto parsed = ParsePhaseKind(kind);
        if (!parsed.has_value()) p.Fail("unknown phase kind '" + kind + "'");
        r.kind = *parsed;
        r.turn = ToInt32(p.Int("turn"), p, "turn");
        const auto token = p.OptionalIntField("token", true);
        if (token.has_value()) r.token_index = ToInt32(*token, p, "token");
        r.t_start_ns = p.Int("t_start_ns");
        r.t_end_ns = p.Int("t_end_ns");
        ValidatePhaseRecord(r);
        phases.push_back(std::move(r));
      } else if (ev == "kernel") {
        KernelRecord r;
        r.name = p.String("name");
        r.queue_id = ToInt32(p.Int("queue"), p, "queue");
        r.t_cpu_enqueue_ns = p.Int("t_cpu_enqueue_ns");
        r.t_queued_ns = p.Int("t_queued_ns");
        r.t_submit_ns = p.Int("t_submit_ns");
        r.t_start_ns = p.Int("t_start_ns");
        r.t_end_ns = p.Int("t_end_ns");
        ValidateKernelRecord(r);
        kernels.push_back(std::move(r));
      } else {
        p.Fail("unknown event type '" + ev + "'");
      }
    } catch (const Error& e) {
      if (e.line().has_value()) throw;
      throw Error(e.code(), e.detail(), line);
    }
  }
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed");
  if (!have_header) {
    throw Error(ErrorCode::kParseError, "missing session header", line + 1);
  }
  return Trace::FromRecords(std::move(metadata), std::move(phases),
                            std::move(kernels));
}

Trace ReadJsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return ReadJsonl(in);
}

void ExportChromeTrace(const Trace& trace, std::ostream& out) {
  Json events = Json::array();
  for (const PhaseRecord& p : trace.phases()) {
    Json e;
    e["name"] = std::string(PhaseKindName(p.kind));
    e["cat"] = "phase";
    e["ph"] = "X";
    e["ts"] = MicrosJson(p.t_start_ns);
    e["dur"] = MicrosJson(p.duration_ns());
    e["pid"] = 1;
    e["tid"] = 0;
    Json args;
    args["turn"] = p.turn;
    args["token"] =
        p.token_index.has_value() ? Json(*p.token_index) : Json(nullptr);
    e["args"] = std::move(args);
    events.push_back(std::move(e));
  }
  for (const KernelRecord& k : trace.kernels()) {
    Json e;
    e["name"] = k.name;
    e["cat"] = "kernel";
    e["ph"] = "X";
    e["ts"] = MicrosJson(k.t_start_ns);
    e["dur"] = MicrosJson(k.execution_ns());
    e["pid"] = 1;
    e["tid"] = static_cast<std::int64_t>(k.queue_id) + 1;
    Json args;
    args["queuing_us"] = MicrosJson(k.t_submit_ns - k.t_queued_ns);
    args["dispatch_us"] = MicrosJson(k.t_start_ns - k.t_submit_ns);
    e["args"] = std::move(args);
    events.push_back(std::move(e));
  }
  Json doc;
  doc["traceEvents"] = std::move(events);
  out << doc.dump() << '\n';
}

void ExportChromeTrace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out = OpenForWrite(path);
  ExportChromeTrace(trace, out);
  FinishWrite(out, path);
}

void WriteCsvReport(const CsvTable& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out << ',';
    WriteCsvField(out, table.columns[c].name);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "row has " + std::to_string(row.size()) + " cells, expected " +
                      std::to_string(table.columns.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << ',';
      WriteCsvField(out, FormatCell(row[c], table.columns[c]));
    }
    out << '\n';
  }
}

void WriteCsvReport(const CsvTable& table, const std::filesystem::path& path) {
  std::ofstream out = OpenForWrite(path);
  WriteCsvReport(table, out);
  FinishWrite(out, path);
}

std::string FormatFixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, 1);
  }
  return s;
}

std::string FormatLatencyMs(double ms) { return FormatFixed(ms, 4); }
std::string FormatAlpha(double alpha_pct) { return FormatFixed(alpha_pct, 2); }
std::string FormatEpsStar(double eps_star) { return FormatFixed(eps_star, 3); }

}  // namespace lmmeter
