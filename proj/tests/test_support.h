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

#ifndef LMMETER_TESTS_TEST_SUPPORT_H_
#define LMMETER_TESTS_TEST_SUPPORT_H_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lmmeter/error.h"
#include "lmmeter/trace.h"

namespace lmmeter::test_support {

// Code of the Error thrown by fn; a test failure when nothing is thrown.
inline ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::kInvalidArgument;
}

inline std::filesystem::path TestDir() { return LMMETER_TEST_DIR; }

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct LatencyRow {
  std::string label;  // model or kernel
  std::string phase;
  double lm_ms = 0.0;
  double gt_ms = 0.0;
  double alpha_pct = 0.0;
  double eps_star = 0.0;
};

// Reads a fixture under data/ with six comma-separated columns and a header.
inline std::vector<LatencyRow> ReadLatencyFixture(const std::string& name) {
  std::ifstream in(TestDir() / "data" / name);
  EXPECT_TRUE(in.good()) << name;
  std::vector<LatencyRow> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    EXPECT_EQ(f.size(), 6u) << line;
    if (f.size() != 6) continue;
    rows.push_back({f[0], f[1], std::stod(f[2]), std::stod(f[3]),
                    std::stod(f[4]), std::stod(f[5])});
  }
  return rows;
}

// Mirrors PHASES and KERNELS in golden/generate.py. Records are shuffled
// before construction so the sort in Trace::FromRecords is exercised.
inline Trace SmallTrace() {
  TraceMetadata m;
  m.device_label = "golden-device";
  m.clock_offset_ns = 250;
  m.prompt_tokens = 4;
  m.output_tokens = 1;
  std::vector<PhaseRecord> phases = {
      {PhaseKind::kEmbedding, 0, std::nullopt, 0, 1500},
      {PhaseKind::kPrefill, 0, std::nullopt, 1500, 12345},
      {PhaseKind::kDecode, 0, 0, 12345, 20001},
      {PhaseKind::kSoftmax, 0, 0, 20001, 20500},
      {PhaseKind::kCopyProbsToCpu, 0, 0, 20500, 21999},
      {PhaseKind::kSampling, 0, 0, 21999, 22064},
  };
  std::vector<KernelRecord> kernels = {
      {"dequantize_take1", 0, 100, 110, 115, 122, 1160},
      {"rms_norm1", 0, 1600, 1700, 1703, 1710, 2711},
      {"batch_prefill_paged_kv", 1, 1650, 1720, 1725, 1800, 9999},
      {"matmul \"fused\"", 0, 1660, 1730, 1730, 10001, 12000},
      {"batch_decode_paged_kv", 0, 12400, 12500, 12502, 12600, 13601},
      {"rms_norm1", 0, 13650, 13700, 13750, 13800, 14333},
      {"batch_decode_paged_kv", 0, 14400, 14500, 14500, 14500, 19999},
      {"chunk_lse", 0, 20010, 20020, 20030, 20040, 20480},
  };
  std::mt19937 rng(5);
  std::shuffle(phases.begin(), phases.end(), rng);
  std::shuffle(kernels.begin(), kernels.end(), rng);
  return Trace::FromRecords(m, phases, kernels);
}

// Field-for-field equality, created_at excluded (it is not serialized).
inline void ExpectSameTrace(const Trace& a, const Trace& b) {
  EXPECT_EQ(a.metadata().device_label, b.metadata().device_label);
  EXPECT_EQ(a.metadata().clock_offset_ns, b.metadata().clock_offset_ns);
  EXPECT_EQ(a.metadata().prompt_tokens, b.metadata().prompt_tokens);
  EXPECT_EQ(a.metadata().output_tokens, b.metadata().output_tokens);
  ASSERT_EQ(a.phases().size(), b.phases().size());
  ASSERT_EQ(a.kernels().size(), b.kernels().size());
  for (std::size_t i = 0; i < a.phases().size(); ++i) {
    EXPECT_EQ(a.phases()[i], b.phases()[i]) << "phase " << i;
  }
  for (std::size_t i = 0; i < a.kernels().size(); ++i) {
    EXPECT_EQ(a.kernels()[i], b.kernels()[i]) << "kernel " << i;
  }
}

}  // namespace lmmeter::test_support

#endif  // LMMETER_TESTS_TEST_SUPPORT_H_
