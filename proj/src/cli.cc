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

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmmeter/error.h"
#include "lmmeter/metrics.h"
#include "lmmeter/predictor.h"
#include "lmmeter/recorder.h"
#include "lmmeter/sampler.h"
#include "lmmeter/sim_engine.h"
#include "lmmeter/timeline.h"
#include "lmmeter/trace_io.h"
#include "lmmeter/workload_config.h"

namespace lmmeter {
namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

constexpr const char* kSeedEnv = "LMMK_SEED";

// Bad flag values detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool IsUsageCode(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPositiveGroundTruth:
    case ErrorCode::kNonPositiveComponent:
    case ErrorCode::kNegativeDelta:
    case ErrorCode::kFractionOutOfRange:
      return true;
    default:
      return false;
  }
}

std::uint64_t ParseSeed(const std::string& text) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw UsageError(std::string(kSeedEnv) + " is not an unsigned integer: '" +
                     text + "'");
  }
  return value;
}

std::optional<std::uint64_t> EffectiveSeed(std::optional<std::uint64_t> flag) {
  if (const char* env = std::getenv(kSeedEnv); env != nullptr) {
    return ParseSeed(env);
  }
  return flag;
}

// Writes to the file at `path` when given, otherwise to `out`.
template <typename Fn>
void Emit(const std::string& path, std::ostream& out, Fn&& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIoError, "cannot open " + path);
  write(file);
  file.flush();
  if (!file) throw Error(ErrorCode::kIoError, "write failed: " + path);
}

Json TruthJson(const WorkloadSpec& spec, const GroundTruth& truth) {
  Json j;
  j["workload"] = spec.name;
  j["prompt_tokens"] = truth.prompt_tokens;
  j["output_tokens"] = truth.output_tokens;
  Json kernels = Json::object();
  for (const auto& [name, k] : truth.kernels) {
    kernels[name] = {{"count", k.count}, {"total_ns", k.total_ns}};
  }
  j["kernels"] = std::move(kernels);
  Json phases = Json::object();
  for (PhaseKind kind : kAllPhaseKinds) {
    const auto wall = truth.phase_wall_ns.find(kind);
    if (wall == truth.phase_wall_ns.end()) continue;
    const auto busy = truth.phase_busy_ns.find(kind);
    const auto count = truth.phase_kernel_count.find(kind);
    phases[std::string(PhaseKindName(kind))] = {
        {"wall_ns", wall->second},
        {"busy_ns", busy == truth.phase_busy_ns.end() ? 0 : busy->second},
        {"kernel_count",
         count == truth.phase_kernel_count.end() ? 0 : count->second}};
  }
  j["phases"] = std::move(phases);
  Json windows = Json::array();
  for (const PhaseWindowTruth& w : truth.windows) {
    windows.push_back(
        {{"kind", std::string(PhaseKindName(w.kind))},
         {"turn", w.turn},
         {"token", w.token_index.has_value() ? Json(*w.token_index)
                                             : Json(nullptr)},
         {"start_ns", w.window.start_ns},
         {"end_ns", w.window.end_ns},
         {"busy_ns", w.busy_ns},
         {"idle_ns", w.idle_ns},
         {"kernel_count", w.kernel_count}});
  }
  j["windows"] = std::move(windows);
  return j;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string workload;
  std::int32_t prompt_tokens = 8;
  std::int32_t output_tokens = 16;
  std::optional<std::uint64_t> seed;
  std::optional<double> jitter;
  std::string duplicate;
  std::string out;
};

int RunSimulate(const SimulateArgs& a, std::ostream& out) {
  const std::string_view prefix = "preset:";
  if (a.workload.starts_with(prefix) &&
      !FindPreset(std::string_view(a.workload).substr(prefix.size()))) {
    throw UsageError("unknown preset '" + a.workload.substr(prefix.size()) +
                     "'");
  }
  WorkloadSpec spec = ResolveWorkload(a.workload);
  if (const auto seed = EffectiveSeed(a.seed)) spec.jitter.seed = *seed;
  if (a.jitter.has_value()) {
    if (!(*a.jitter >= 0.0)) throw UsageError("--jitter must be >= 0");
    spec.jitter.sigma_rel = *a.jitter;
  }
  RunOptions options;
  options.prompt_tokens = a.prompt_tokens;
  options.output_tokens = a.output_tokens;
  if (!a.duplicate.empty()) {
    const auto colon = a.duplicate.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw UsageError("--duplicate expects <kernel>:<n>");
    }
    DuplicationPlan plan;
    plan.kernel_name = a.duplicate.substr(0, colon);
    const std::string count = a.duplicate.substr(colon + 1);
    const auto [ptr, ec] =
        std::from_chars(count.data(), count.data() + count.size(), plan.n);
    if (count.empty() || ec != std::errc() ||
        ptr != count.data() + count.size() || plan.n < 1) {
      throw UsageError("--duplicate count must be a positive integer");
    }
    if (spec.FindKernel(plan.kernel_name) == nullptr) {
      throw UsageError("workload has no kernel '" + plan.kernel_name + "'");
    }
    options.duplication = plan;
  }
  const SimulationResult result = Run(spec, options);
  WriteJsonl(result.trace, std::filesystem::path(a.out));
  Emit(a.out + ".gt.json", out, [&](std::ostream& o) {
    o << TruthJson(spec, result.truth).dump(2) << '\n';
  });
  return kExitOk;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string trace;
  bool idle = false;
  bool aggregate = false;
  bool phases = false;
  std::string report = "json";
  std::string out;
};

struct IdleRow {
  const PhaseRecord* phase;
  const IdleReport* report;
};

std::vector<IdleRow> DecodeIdleRows(const Trace& trace,
                                    const std::vector<IdleReport>& reports) {
  std::vector<IdleRow> rows;
  std::size_t i = 0;
  for (const PhaseRecord& p : trace.phases()) {
    if (p.kind != PhaseKind::kDecode) continue;
    rows.push_back({&p, &reports.at(i++)});
  }
  return rows;
}

Json OptionalTokenJson(const PhaseRecord& p) {
  return p.token_index.has_value() ? Json(*p.token_index) : Json(nullptr);
}

Json IdleJson(const Trace& trace) {
  const std::vector<IdleReport> reports =
      PhaseIdleReports(trace, PhaseKind::kDecode);
  const IdleTotals totals = SumIdle(reports);
  Json windows = Json::array();
  for (const IdleRow& r : DecodeIdleRows(trace, reports)) {
    windows.push_back({{"turn", r.phase->turn},
                       {"token", OptionalTokenJson(*r.phase)},
                       {"start_ns", r.report->window.start_ns},
                       {"end_ns", r.report->window.end_ns},
                       {"busy_ns", r.report->busy_ns},
                       {"idle_ns", r.report->idle_ns},
                       {"idle_fraction", r.report->idle_fraction}});
  }
  Json j;
  j["phase"] = std::string(PhaseKindName(PhaseKind::kDecode));
  j["windows"] = std::move(windows);
  j["total"] = {{"windows", totals.windows},
                {"window_ns", totals.window_ns},
                {"busy_ns", totals.busy_ns},
                {"idle_ns", totals.idle_ns},
                {"idle_fraction", totals.idle_fraction}};
  return j;
}

CsvTable IdleCsv(const Trace& trace) {
  const std::vector<IdleReport> reports =
      PhaseIdleReports(trace, PhaseKind::kDecode);
  const IdleTotals totals = SumIdle(reports);
  CsvTable t;
  t.columns = {{"turn", CsvType::kText},        {"token", CsvType::kText},
               {"window_ms", CsvType::kLatencyMs},
               {"busy_ms", CsvType::kLatencyMs},
               {"idle_ms", CsvType::kLatencyMs},
               {"idle_fraction", CsvType::kFraction}};
  auto ms = [](std::int64_t ns) { return static_cast<double>(ns) / 1e6; };
  for (const IdleRow& r : DecodeIdleRows(trace, reports)) {
    t.rows.push_back(
        {std::to_string(r.phase->turn),
         r.phase->token_index ? std::to_string(*r.phase->token_index)
                              : std::string(),
         ms(r.report->window.length()), ms(r.report->busy_ns),
         ms(r.report->idle_ns), r.report->idle_fraction});
  }
  t.rows.push_back({std::string("all"), std::string("all"),
                    ms(totals.window_ns), ms(totals.busy_ns),
                    ms(totals.idle_ns), totals.idle_fraction});
  return t;
}

Json AggregateJson(const Trace& trace) {
  Json rows = Json::array();
  for (const KernelAggregate& k : AggregateKernels(trace)) {
    rows.push_back(
        {{"name", k.name},
         {"count", k.invocation_count},
         {"mean_ms", k.mean_execution_ns / 1e6},
         {"total_ms", static_cast<double>(k.total_execution_ns) / 1e6},
         {"share", k.share_of_busy}});
  }
  return rows;
}

CsvTable AggregateCsv(const Trace& trace) {
  CsvTable t;
  t.columns = {{"name", CsvType::kText},
               {"count", CsvType::kInteger},
               {"mean_ms", CsvType::kLatencyMs},
               {"total_ms", CsvType::kLatencyMs},
               {"share", CsvType::kFraction}};
  for (const KernelAggregate& k : AggregateKernels(trace)) {
    t.rows.push_back({k.name, k.invocation_count, k.mean_execution_ns / 1e6,
                      static_cast<double>(k.total_execution_ns) / 1e6,
                      k.share_of_busy});
  }
  return t;
}

Json RollupJson(const PhaseRollup& r) {
  return {{"wall_ns", r.phase_wall_ns},
          {"device_busy_ns", r.device_busy_ns},
          {"kernel_count", r.kernel_count}};
}

Json PhasesJson(const Trace& trace) {
  const PhaseAttributionReport report = PhaseAttribution(trace);
  Json j = Json::object();
  for (const auto& [kind, rollup] : report.phases) {
    j[std::string(PhaseKindName(kind))] = RollupJson(rollup);
  }
  j["unattributed"] = RollupJson(report.unattributed);
  return j;
}

CsvTable PhasesCsv(const Trace& trace) {
  const PhaseAttributionReport report = PhaseAttribution(trace);
  CsvTable t;
  t.columns = {{"phase", CsvType::kText},
               {"wall_ms", CsvType::kLatencyMs},
               {"device_busy_ms", CsvType::kLatencyMs},
               {"kernel_count", CsvType::kInteger}};
  auto add = [&t](const std::string& name, const PhaseRollup& r) {
    t.rows.push_back({name, static_cast<double>(r.phase_wall_ns) / 1e6,
                      static_cast<double>(r.device_busy_ns) / 1e6,
                      r.kernel_count});
  };
  for (const auto& [kind, rollup] : report.phases) {
    add(std::string(PhaseKindName(kind)), rollup);
  }
  add("unattributed", report.unattributed);
  return t;
}

int RunAnalyze(AnalyzeArgs a, std::ostream& out) {
  if (!a.idle && !a.aggregate && !a.phases) {
    a.idle = a.aggregate = a.phases = true;
  }
  const Trace trace = ReadJsonl(std::filesystem::path(a.trace));
  if (a.report == "json") {
    Json doc = Json::object();
    if (a.idle) doc["idle"] = IdleJson(trace);
    if (a.aggregate) doc["aggregate"] = AggregateJson(trace);
    if (a.phases) doc["phases"] = PhasesJson(trace);
    Emit(a.out, out, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
    return kExitOk;
  }
  std::vector<CsvTable> tables;
  if (a.idle) tables.push_back(IdleCsv(trace));
  if (a.aggregate) tables.push_back(AggregateCsv(trace));
  if (a.phases) tables.push_back(PhasesCsv(trace));
  Emit(a.out, out, [&](std::ostream& o) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (i > 0) o << '\n';
      WriteCsvReport(tables[i], o);
    }
  });
  return kExitOk;
}

// --- sample -----------------------------------------------------------------

struct SampleArgs {
  std::string lengths;
  double fraction = 0.1;
  int bins = kDefaultBins;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int RunSample(const SampleArgs& a, std::ostream& out) {
  if (!(a.fraction > 0.0 && a.fraction <= 1.0)) {
    throw Error(ErrorCode::kFractionOutOfRange,
                "--fraction must lie in (0, 1]");
  }
  std::ifstream in(a.lengths);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + a.lengths);
  const std::vector<std::int64_t> lengths = ReadLengths(in);
  const std::uint64_t seed = EffectiveSeed(a.seed).value_or(0);
  const SubsetPlan plan = SampleSubset(lengths, a.fraction, a.bins, seed);
  Emit(a.out, out, [&](std::ostream& o) {
    WriteSubsetPlan(plan, a.bins, seed, o);
  });
  // With --out the plan went to the file and the summary goes to stdout.
  if (!a.out.empty()) {
    out << "selected=" << plan.indices.size()
        << " achieved_kl_nats=" << FormatFixed(plan.achieved_kl_nats, 6)
        << '\n';
  }
  return kExitOk;
}

// --- predict ----------------------------------------------------------------

struct PredictArgs {
  std::string trace;
  std::string kernel = std::string(kPagedKvKernel);
  std::int64_t train_steps = 100;
};

int RunPredict(const PredictArgs& a, std::ostream& out) {
  if (a.train_steps < 2) throw UsageError("--train-steps must be >= 2");
  const Trace trace = ReadJsonl(std::filesystem::path(a.trace));
  const StepSeries series = ExtractStepSeries(trace, a.kernel);
  const auto k = static_cast<std::size_t>(a.train_steps);
  if (series.size() <= k) {
    throw Error(ErrorCode::kInsufficientSteps,
                "kernel '" + a.kernel + "' has " +
                    std::to_string(series.size()) + " steps, need more than " +
                    std::to_string(k));
  }
  const std::span<const StepPoint> train(series.data(), k);
  const std::int64_t last_train_step = train.back().step;
  const StepSeries wall = ExtractStepWallSeries(trace);
  StepSeries wall_train;
  StepSeries holdout;
  for (const StepPoint& p : wall) {
    (p.step <= last_train_step ? wall_train : holdout).push_back(p);
  }
  if (holdout.empty()) {
    throw Error(ErrorCode::kInsufficientSteps, "no decode steps after training");
  }
  const LinearModel model = Fit(train);
  const double floor = EstimateConstantFloor(wall_train, train);
  const PredictionError e = Evaluate(model, holdout, floor);
  out << "slope_ns_per_step=" << FormatFixed(model.slope_ns_per_step, 4)
      << " intercept_ns=" << FormatFixed(model.intercept_ns, 4)
      << " invocations_per_step="
      << FormatFixed(model.invocations_per_step, 4)
      << " floor_ns=" << FormatFixed(floor, 4)
      << " trained_steps=" << model.trained_steps
      << " holdout_steps=" << holdout.size()
      << " mape=" << FormatFixed(e.mape, 4)
      << " max_ape=" << FormatFixed(e.max_ape, 4) << '\n';
  return kExitOk;
}

// --- export -----------------------------------------------------------------

struct ExportArgs {
  std::string trace;
  std::string format = "chrome";
  std::string out;
};

int RunExport(const ExportArgs& a, std::ostream& out) {
  const Trace trace = ReadJsonl(std::filesystem::path(a.trace));
  Emit(a.out, out, [&](std::ostream& o) {
    if (a.format == "chrome") {
      ExportChromeTrace(trace, o);
    } else {
      WriteJsonl(trace, o);
    }
  });
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"On-device LLM phase and kernel latency profiling toolkit",
               "lmmeter"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a synthetic workload");
  simulate->add_option("--workload", sim.workload, "preset:<name> or a file")
      ->required();
  simulate->add_option("--prompt-tokens", sim.prompt_tokens)
      ->check(CLI::PositiveNumber);
  simulate->add_option("--output-tokens", sim.output_tokens)
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--jitter", sim.jitter, "Relative latency sigma");
  simulate->add_option("--duplicate", sim.duplicate, "<kernel>:<n>");
  simulate->add_option("--out", sim.out)->required();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Report idle time and costs");
  analyze->add_option("trace", an.trace)->required();
  analyze->add_flag("--idle", an.idle, "Per-step decode idle windows");
  analyze->add_flag("--aggregate", an.aggregate, "Per-kernel totals");
  analyze->add_flag("--phases", an.phases, "Per-phase attribution");
  analyze->add_option("--report", an.report)
      ->check(CLI::IsMember({"csv", "json"}));
  analyze->add_option("--out", an.out);

  auto* metrics = app.add_subcommand("metrics", "Score measurements");
  metrics->require_subcommand(1);
  MetricPair pair;
  auto* accuracy = metrics->add_subcommand("accuracy", "Alpha and eps*");
  accuracy->add_option("--lm", pair.t_lm_ms, "Profiled latency (ms)")
      ->required();
  accuracy->add_option("--gt", pair.t_gt_ms, "Ground-truth latency (ms)")
      ->required();
  HqInputs hq_in;
  auto* hq = metrics->add_subcommand("hq", "Quantization quality score");
  hq->add_option("--acc-q", hq_in.acc_quant)->required();
  hq->add_option("--acc-f", hq_in.acc_full)->required();
  hq->add_option("--prefill-q", hq_in.prefill_quant_ms)->required();
  hq->add_option("--prefill-f", hq_in.prefill_full_ms)->required();
  hq->add_option("--decode-q", hq_in.decode_quant_ms)->required();
  hq->add_option("--decode-f", hq_in.decode_full_ms)->required();
  double dup_base = 0.0;
  double dup_dup = 0.0;
  std::int64_t dup_n = 0;
  auto* duplication =
      metrics->add_subcommand("duplication", "Per-kernel latency estimate");
  duplication->add_option("--base", dup_base, "Baseline phase time (ms)")
      ->required();
  duplication->add_option("--dup", dup_dup, "Duplicated phase time (ms)")
      ->required();
  duplication->add_option("--n", dup_n)->required()->check(
      CLI::PositiveNumber);

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Distribution-matched subset");
  sample->add_option("--lengths", sa.lengths)->required();
  sample->add_option("--fraction", sa.fraction);
  sample->add_option("--bins", sa.bins)->check(CLI::Range(2, 100000));
  sample->add_option("--seed", sa.seed);
  sample->add_option("--out", sa.out);

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Per-step latency prediction");
  predict->add_option("trace", pa.trace)->required();
  predict->add_option("--kernel", pa.kernel);
  predict->add_option("--train-steps", pa.train_steps);

  ExportArgs ea;
  auto* exporter = app.add_subcommand("export", "Convert a trace");
  exporter->add_option("trace", ea.trace)->required();
  exporter->add_option("--format", ea.format)
      ->check(CLI::IsMember({"chrome", "jsonl"}));
  exporter->add_option("--out", ea.out);

  std::int64_t calib_iterations = 10000;
  auto* calibrate = app.add_subcommand("calibrate", "Measure timer overhead");
  calibrate->add_option("--iterations", calib_iterations);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, out, err);
    }
    err << "lmmeter: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*simulate) return RunSimulate(sim, out);
    if (*analyze) return RunAnalyze(an, out);
    if (*accuracy) {
      const AccuracyResult r = Evaluate(pair);
      out << "alpha=" << FormatAlpha(r.alpha_pct)
          << " eps_star=" << FormatEpsStar(r.eps_star_us_per_ms) << '\n';
      return kExitOk;
    }
    if (*hq) {
      out << "hq=" << FormatFixed(HqFromMeasurements(hq_in), 2) << '\n';
      return kExitOk;
    }
    if (*duplication) {
      out << "kernel_latency_ms="
          << FormatLatencyMs(DuplicationEstimate(dup_base, dup_dup, dup_n))
          << '\n';
      return kExitOk;
    }
    if (*sample) return RunSample(sa, out);
    if (*predict) return RunPredict(pa, out);
    if (*exporter) return RunExport(ea, out);
    if (*calibrate) {
      if (calib_iterations < kMinCalibrationIterations) {
        throw UsageError("--iterations must be at least " +
                         std::to_string(kMinCalibrationIterations));
      }
      const TimerCalibration c = CalibrateTimer(calib_iterations);
      Json j;
      j["resolution_ns"] = c.resolution_ns;
      j["overhead_ns_median"] = c.overhead_ns_median;
      j["iterations"] = c.iterations;
      out << j.dump() << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "lmmeter: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "lmmeter: " << e.what() << '\n';
    return IsUsageCode(e.code()) ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "lmmeter: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << "lmmeter: no command\n";
  return kExitUsage;
}

}  // namespace lmmeter
