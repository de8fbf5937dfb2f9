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

#ifndef LMMETER_ERROR_H_
#define LMMETER_ERROR_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lmmeter {

enum class ErrorCode {
  kInvalidArgument,
  // recorder
  kSessionSealed,
  kPhaseOverlap,
  kUnknownHandle,
  kAlreadyEnded,
  kTimestampOrderViolation,
  kOpenPhaseRemaining,
  // sim_engine
  kInvalidSpec,
  kUnknownKernel,
  // timeline
  kUnalignedClocks,
  // metrics
  kNonPositiveGroundTruth,
  kNonPositiveComponent,
  kNegativeDelta,
  kMissingPhase,
  kMissingTokenCounts,
  // sampler
  kEmptyDataset,
  kBinMismatch,
  kUnsupportedZero,
  kFractionOutOfRange,
  // predictor
  kKernelNotFound,
  kInsufficientSteps,
  kDegenerateSeries,
  // trace_io
  kIoError,
  kParseError,
  kUnknownVersion,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported by throwing Error. Parsers attach the
// 1-based line number of the offending input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::int64_t> line = std::nullopt);

  ErrorCode code() const { return code_; }
  std::optional<std::int64_t> line() const { return line_; }
  // The message without the code name and line prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::optional<std::int64_t> line_;
  std::string detail_;
};

}  // namespace lmmeter

#endif  // LMMETER_ERROR_H_
