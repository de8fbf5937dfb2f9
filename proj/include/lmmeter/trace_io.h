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

#ifndef LMMETER_TRACE_IO_H_
#define LMMETER_TRACE_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "lmmeter/trace.h"

namespace lmmeter {

inline constexpr int kTraceFormatVersion = 1;

// Line-delimited JSON: a session header followed by one object per phase and
// kernel. Integer nanoseconds throughout.
void WriteJsonl(const Trace& trace, std::ostream& out);
void WriteJsonl(const Trace& trace, const std::filesystem::path& path);

// Throws kParseError and kTimestampOrderViolation with the 1-based line
// number, kUnknownVersion for an unrecognized header, kIoError when the file
// cannot be opened.
Trace ReadJsonl(std::istream& in);
Trace ReadJsonl(const std::filesystem::path& path);

// Trace-viewer JSON ({"traceEvents":[...]}) with complete events in
// microseconds.
void ExportChromeTrace(const Trace& trace, std::ostream& out);
void ExportChromeTrace(const Trace& trace, const std::filesystem::path& path);

// Column types decide how a double cell is rendered.
enum class CsvType {
  kText,
  kInteger,
  kLatencyMs,  // 4 decimals
  kAlpha,      // 2 decimals
  kEpsStar,    // 3 decimals
  kFraction,   // 4 decimals
};

struct CsvColumn {
  std::string name;
  CsvType type = CsvType::kText;
};

using CsvCell = std::variant<std::string, std::int64_t, double>;

struct CsvTable {
  std::vector<CsvColumn> columns;
  std::vector<std::vector<CsvCell>> rows;
};

// Header row plus data rows, LF line endings. Throws kInvalidArgument when a
// row's width or a cell's type does not match its column.
void WriteCsvReport(const CsvTable& table, std::ostream& out);
void WriteCsvReport(const CsvTable& table, const std::filesystem::path& path);

// printf-style fixed formatting that never yields "-0".
std::string FormatFixed(double value, int decimals);
std::string FormatLatencyMs(double ms);
std::string FormatAlpha(double alpha_pct);
std::string FormatEpsStar(double eps_star);

}  // namespace lmmeter

#endif  // LMMETER_TRACE_IO_H_
