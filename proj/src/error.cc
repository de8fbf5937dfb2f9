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

#include "lmmeter/error.h"

namespace lmmeter {
namespace {

std::string Describe(ErrorCode code, const std::string& message,
                     std::optional<std::int64_t> line) {
  std::string out(ErrorCodeName(code));
  if (line.has_value()) out += " at line " + std::to_string(*line);
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSessionSealed: return "SessionSealed";
    case ErrorCode::kPhaseOverlap: return "PhaseOverlap";
    case ErrorCode::kUnknownHandle: return "UnknownHandle";
    case ErrorCode::kAlreadyEnded: return "AlreadyEnded";
    case ErrorCode::kTimestampOrderViolation: return "TimestampOrderViolation";
    case ErrorCode::kOpenPhaseRemaining: return "OpenPhaseRemaining";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kUnknownKernel: return "UnknownKernel";
    case ErrorCode::kUnalignedClocks: return "UnalignedClocks";
    case ErrorCode::kNonPositiveGroundTruth: return "NonPositiveGroundTruth";
    case ErrorCode::kNonPositiveComponent: return "NonPositiveComponent";
    case ErrorCode::kNegativeDelta: return "NegativeDelta";
    case ErrorCode::kMissingPhase: return "MissingPhase";
    case ErrorCode::kMissingTokenCounts: return "MissingTokenCounts";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kBinMismatch: return "BinMismatch";
    case ErrorCode::kUnsupportedZero: return "UnsupportedZero";
    case ErrorCode::kFractionOutOfRange: return "FractionOutOfRange";
    case ErrorCode::kKernelNotFound: return "KernelNotFound";
    case ErrorCode::kInsufficientSteps: return "InsufficientSteps";
    case ErrorCode::kDegenerateSeries: return "DegenerateSeries";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownVersion: return "UnknownVersion";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::int64_t> line)
    : std::runtime_error(Describe(code, message, line)),
      code_(code),
      line_(line),
      detail_(message) {}

}  // namespace lmmeter
