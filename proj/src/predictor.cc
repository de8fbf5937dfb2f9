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

#include "lmmeter/predictor.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "lmmeter/error.h"
#include "lmmeter/timeline.h"

namespace lmmeter {
namespace {

struct Accum {
  double sum = 0.0;
  std::int64_t count = 0;
  std::int64_t phases = 0;
};

}  // namespace

StepSeries ExtractStepSeries(const Trace& trace, std::string_view kernel) {
  const auto phases = trace.phases();
  std::map<std::int64_t, Accum> by_step;
  std::map<std::int64_t, std::int64_t> phases_per_step;
  for (const PhaseRecord& p : phases) {
    if (p.kind == PhaseKind::kDecode && p.token_index.has_value()) {
      phases_per_step[*p.token_index] += 1;
    }
  }
  bool seen = false;
  for (const KernelRecord& k : trace.kernels()) {
    if (k.name != kernel) continue;
    seen = true;
    const auto owner = FindOwningPhase(phases, k.t_start_ns);
    if (!owner.has_value()) continue;
    const PhaseRecord& p = phases[*owner];
    if (p.kind != PhaseKind::kDecode || !p.token_index.has_value()) continue;
    Accum& a = by_step[*p.token_index];
    a.sum += static_cast<double>(k.execution_ns());
    a.count += 1;
  }
  if (!seen) {
    throw Error(ErrorCode::kKernelNotFound,
                "kernel '" + std::string(kernel) + "' not in trace");
  }
  if (by_step.size() < 2) {
    throw Error(ErrorCode::kInsufficientSteps,
                "kernel '" + std::string(kernel) + "' appears in " +
                    std::to_string(by_step.size()) + " decode steps");
  }
  StepSeries series;
  series.reserve(by_step.size());
  for (const auto& [step, a] : by_step) {
    const double n = static_cast<double>(a.count);
    series.push_back({step, a.sum / n,
                      n / static_cast<double>(phases_per_step[step])});
  }
  return series;
}

StepSeries ExtractStepWallSeries(const Trace& trace) {
  std::map<std::int64_t, Accum> by_step;
  for (const PhaseRecord& p : trace.phases()) {
    if (p.kind != PhaseKind::kDecode || !p.token_index.has_value()) continue;
    Accum& a = by_step[*p.token_index];
    a.sum += static_cast<double>(p.duration_ns());
    a.count += 1;
  }
  StepSeries series;
  series.reserve(by_step.size());
  for (const auto& [step, a] : by_step) {
    series.push_back({step, a.sum / static_cast<double>(a.count), 1.0});
  }
  return series;
}

LinearModel Fit(std::span<const StepPoint> points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::kInsufficientSteps, "fit needs at least 2 points");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  double invocations = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const StepPoint& p = points[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    x(i, 1) = static_cast<double>(p.step);
    y(i) = p.latency_ns;
    invocations += p.invocations;
  }
  if ((x.col(1).array() == x(0, 1)).all()) {
    throw Error(ErrorCode::kDegenerateSeries, "all steps are equal");
  }
  // Centre the step column so the intercept stays well conditioned for
  // large step values.
  const double mean_step = x.col(1).mean();
  x.col(1).array() -= mean_step;
  const Eigen::Vector2d beta = x.colPivHouseholderQr().solve(y);
  LinearModel model;
  model.slope_ns_per_step = beta(1);
  model.intercept_ns = beta(0) - beta(1) * mean_step;
  model.trained_steps = static_cast<std::int64_t>(points.size());
  model.invocations_per_step = invocations / static_cast<double>(n);
  return model;
}

double EstimateConstantFloor(std::span<const StepPoint> wall,
                             std::span<const StepPoint> kernel) {
  std::map<std::int64_t, const StepPoint*> kernel_by_step;
  for (const StepPoint& p : kernel) kernel_by_step[p.step] = &p;
  double sum = 0.0;
  std::int64_t count = 0;
  for (const StepPoint& w : wall) {
    const auto it = kernel_by_step.find(w.step);
    if (it == kernel_by_step.end()) continue;
    sum += w.latency_ns - it->second->latency_ns * it->second->invocations;
    ++count;
  }
  if (count == 0) {
    throw Error(ErrorCode::kInsufficientSteps,
                "wall and kernel series share no steps");
  }
  return sum / static_cast<double>(count);
}

double PredictStepLatency(const LinearModel& model, double constant_floor_ns,
                          std::int64_t step) {
  if (step < 0) {
    throw Error(ErrorCode::kInvalidArgument, "step must be >= 0");
  }
  return constant_floor_ns +
         model.invocations_per_step *
             (model.intercept_ns +
              model.slope_ns_per_step * static_cast<double>(step));
}

PredictionError Evaluate(const LinearModel& model,
                         std::span<const StepPoint> holdout,
                         double constant_floor_ns) {
  if (holdout.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "holdout is empty");
  }
  PredictionError e;
  for (const StepPoint& p : holdout) {
    const double predicted = PredictStepLatency(model, constant_floor_ns, p.step);
    const double ape = std::abs(predicted - p.latency_ns) / p.latency_ns;
    e.mape += ape;
    e.max_ape = std::max(e.max_ape, ape);
  }
  e.mape /= static_cast<double>(holdout.size());
  return e;
}

}  // namespace lmmeter
