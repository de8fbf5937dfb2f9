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

#include "lmmeter/cli.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lmmeter/sim_engine.h"
#include "lmmeter/timeline.h"
#include "lmmeter/trace_io.h"
#include "test_support.h"

namespace lmmeter {
namespace {

namespace fs = std::filesystem;
using test_support::ReadFile;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lmmeter");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code =
      RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv("LMMK_SEED");
    dir_ = fs::temp_directory_path() /
           ("lmmeter_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override {
    unsetenv("LMMK_SEED");
    fs::remove_all(dir_);
  }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  std::string Simulate(const std::string& name, int output_tokens,
                       const std::string& jitter = "0") {
    const std::string out = Path(name);
    const Result r = Cli({"simulate", "--workload", "preset:gemma2-decode",
                          "--prompt-tokens", "8", "--output-tokens",
                          std::to_string(output_tokens), "--seed", "42",
                          "--jitter", jitter, "--out", out});
    EXPECT_EQ(r.code, 0) << r.err;
    return out;
  }

  void WriteLengths(const std::string& name, int n) {
    std::ofstream f(Path(name));
    for (int i = 0; i < n; ++i) f << (i * 37 % 500) + 1 << '\n';
  }

  fs::path dir_;
};

TEST_F(CliTest, SimulateIsDeterministicAndWritesTruth) {
  const std::string a = Simulate("a.jsonl", 16, "0.05");
  const std::string b = Simulate("b.jsonl", 16, "0.05");
  EXPECT_EQ(ReadFile(a), ReadFile(b));
  const auto truth = nlohmann::json::parse(ReadFile(a + ".gt.json"));
  EXPECT_EQ(truth["output_tokens"], 16);
  EXPECT_TRUE(truth["kernels"].contains("batch_decode_paged_kv"));
}

TEST_F(CliTest, SeedEnvironmentOverridesFlag) {
  const std::string a = Simulate("a.jsonl", 4, "0.05");
  setenv("LMMK_SEED", "1234", 1);
  const std::string b = Simulate("b.jsonl", 4, "0.05");
  EXPECT_NE(ReadFile(a), ReadFile(b));
  setenv("LMMK_SEED", "x", 1);
  EXPECT_EQ(Cli({"simulate", "--workload", "preset:gemma2-decode", "--out",
                 Path("c.jsonl")})
                .code,
            2);
}

TEST_F(CliTest, SimulateDuplicate) {
  const Result ok = Cli({"simulate", "--workload", "preset:gemma2-decode",
                         "--output-tokens", "2", "--duplicate",
                         "batch_decode_paged_kv:50", "--out", Path("d.jsonl")});
  EXPECT_EQ(ok.code, 0) << ok.err;
  const Trace t = ReadJsonl(fs::path(Path("d.jsonl")));
  std::int64_t n = 0;
  for (const KernelRecord& k : t.kernels()) n += k.name == "batch_decode_paged_kv";
  EXPECT_EQ(n, 2 * 26 * 51);
  for (const char* bad : {"batch_decode_paged_kv", "nope:5", "batch_decode_paged_kv:0"}) {
    EXPECT_EQ(Cli({"simulate", "--workload", "preset:gemma2-decode",
                   "--duplicate", bad, "--out", Path("e.jsonl")})
                  .code,
              2)
        << bad;
  }
}

TEST_F(CliTest, SimulateUsageErrors) {
  const Result r = Cli({"simulate", "--workload", "preset:nope", "--out",
                        Path("x.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(Cli({"simulate", "--out", Path("x.jsonl")}).code, 2);
  EXPECT_EQ(Cli({"simulate", "--workload", "/no/such/file.json", "--out",
                 Path("x.jsonl")})
                .code,
            1);
  EXPECT_EQ(Cli({}).code, 2);
  EXPECT_EQ(Cli({"frobnicate"}).code, 2);
  EXPECT_EQ(Cli({"--help"}).code, 0);
}

TEST_F(CliTest, AnalyzeJsonMatchesLibrary) {
  const std::string trace = Simulate("t.jsonl", 16);
  const Result r = Cli({"analyze", trace});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  const Trace t = ReadJsonl(fs::path(trace));
  const IdleTotals totals = SumIdle(PhaseIdleReports(t, PhaseKind::kDecode));
  EXPECT_EQ(doc["idle"]["total"]["idle_ns"], totals.idle_ns);
  EXPECT_EQ(doc["idle"]["total"]["idle_fraction"].get<double>(),
            totals.idle_fraction);
  EXPECT_EQ(doc["idle"]["windows"].size(), 16u);
  const auto agg = AggregateKernels(t);
  EXPECT_EQ(doc["aggregate"][0]["name"], agg[0].name);
  EXPECT_EQ(doc["aggregate"][0]["share"].get<double>(), agg[0].share_of_busy);
  EXPECT_EQ(doc["phases"]["decode"]["device_busy_ns"],
            PhaseAttribution(t).phases.at(PhaseKind::kDecode).device_busy_ns);
}

TEST_F(CliTest, AnalyzeCsvAggregate) {
  const std::string trace = Simulate("t.jsonl", 4);
  const Result r = Cli({"analyze", trace, "--aggregate", "--report", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "name,count,mean_ms,total_ms,share");
  const std::string out = Path("agg.csv");
  EXPECT_EQ(Cli({"analyze", trace, "--aggregate", "--report", "csv", "--out", out}).code, 0);
  EXPECT_EQ(ReadFile(out), r.out);
}

TEST_F(CliTest, AnalyzeCsvAllSections) {
  const std::string trace = Simulate("t.jsonl", 2);
  const Result r = Cli({"analyze", trace, "--report", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("turn,token,window_ms", 0), 0u);
  EXPECT_NE(r.out.find("\n\nname,count,mean_ms"), std::string::npos);
  EXPECT_NE(r.out.find("\n\nphase,wall_ms"), std::string::npos);
}

TEST_F(CliTest, AnalyzeMalformedTrace) {
  {
    std::ofstream f(Path("bad.jsonl"));
    f << R"({"ev":"session","version":1,"device_label":"d","clock_offset_ns":0})"
      << "\n{\"ev\":\n";
  }
  const Result r = Cli({"analyze", Path("bad.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
  EXPECT_EQ(Cli({"analyze", Path("missing.jsonl")}).code, 1);
  EXPECT_EQ(Cli({"analyze", Path("bad.jsonl"), "--report", "xml"}).code, 2);
}

TEST_F(CliTest, MetricsOutputs) {
  Result r = Cli({"metrics", "accuracy", "--lm", "0.8038", "--gt", "0.7763"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "alpha=96.46 eps_star=35.424\n");
  r = Cli({"metrics", "hq", "--acc-q", "0.5", "--acc-f", "0.5", "--prefill-q",
           "3", "--prefill-f", "3", "--decode-q", "2", "--decode-f", "2"});
  EXPECT_EQ(r.out, "hq=1.00\n");
  r = Cli({"metrics", "duplication", "--base", "100", "--dup", "150", "--n", "50"});
  EXPECT_EQ(r.out, "kernel_latency_ms=1.0000\n");
}

TEST_F(CliTest, MetricsNonPositiveDenominators) {
  EXPECT_EQ(Cli({"metrics", "accuracy", "--lm", "1", "--gt", "0"}).code, 2);
  EXPECT_EQ(Cli({"metrics", "hq", "--acc-q", "0.5", "--acc-f", "0",
                 "--prefill-q", "3", "--prefill-f", "3", "--decode-q", "2",
                 "--decode-f", "2"})
                .code,
            2);
  EXPECT_EQ(Cli({"metrics", "duplication", "--base", "10", "--dup", "9", "--n", "5"}).code, 2);
  EXPECT_EQ(Cli({"metrics", "duplication", "--base", "10", "--dup", "11", "--n", "0"}).code, 2);
  EXPECT_EQ(Cli({"metrics"}).code, 2);
}

TEST_F(CliTest, Sample) {
  WriteLengths("lengths.txt", 2380);
  Result r = Cli({"sample", "--lengths", Path("lengths.txt"), "--fraction",
                  "0.1", "--bins", "30", "--seed", "3", "--out", Path("plan.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("selected=238"), std::string::npos);
  const std::string plan = ReadFile(Path("plan.txt"));
  EXPECT_EQ(std::count(plan.begin(), plan.end(), '\n'), 239);
  // Same inputs, same bytes.
  Cli({"sample", "--lengths", Path("lengths.txt"), "--fraction", "0.1",
       "--bins", "30", "--seed", "3", "--out", Path("plan2.txt")});
  EXPECT_EQ(ReadFile(Path("plan2.txt")), plan);

  r = Cli({"sample", "--lengths", Path("lengths.txt"), "--fraction", "1.0",
           "--out", Path("all.txt")});
  EXPECT_NE(r.out.find("achieved_kl_nats=0.000000"), std::string::npos);
  EXPECT_EQ(Cli({"sample", "--lengths", Path("lengths.txt"), "--fraction", "1.5"}).code, 2);
  EXPECT_EQ(Cli({"sample", "--lengths", Path("missing.txt")}).code, 1);
}

TEST_F(CliTest, PredictExactLinear) {
  const std::string trace = Simulate("t.jsonl", 40);
  const Result r = Cli({"predict", trace, "--kernel", "batch_decode_paged_kv",
                        "--train-steps", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("slope_ns_per_step=3400.0000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("mape=0.0000"), std::string::npos) << r.out;
}

TEST_F(CliTest, PredictErrors) {
  const std::string trace = Simulate("t.jsonl", 10);
  EXPECT_EQ(Cli({"predict", trace, "--kernel", "absent"}).code, 1);
  EXPECT_EQ(Cli({"predict", trace, "--train-steps", "10"}).code, 1);
}

TEST_F(CliTest, Export) {
  const std::string trace = Simulate("t.jsonl", 3);
  ASSERT_EQ(Cli({"export", trace, "--out", Path("c.json")}).code, 0);
  const auto doc = nlohmann::json::parse(ReadFile(Path("c.json")));
  const Trace t = ReadJsonl(fs::path(trace));
  EXPECT_EQ(doc["traceEvents"].size(), t.phases().size() + t.kernels().size());
  const Result jsonl = Cli({"export", trace, "--format", "jsonl"});
  EXPECT_EQ(jsonl.out, ReadFile(trace));
}

TEST_F(CliTest, Calibrate) {
  const Result r = Cli({"calibrate", "--iterations", "10000"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GE(j["resolution_ns"].get<std::int64_t>(), 1);
  EXPECT_GE(j["overhead_ns_median"].get<double>(), 0.0);
  EXPECT_EQ(j["iterations"], 10000);
  EXPECT_EQ(Cli({"calibrate", "--iterations", "10"}).code, 2);
}

}  // namespace
}  // namespace lmmeter
