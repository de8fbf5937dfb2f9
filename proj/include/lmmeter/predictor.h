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

#ifndef LMMETER_PREDICTOR_H_
#define LMMETER_PREDICTOR_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lmmeter/trace.h"

namespace lmmeter {

struct StepPoint {
  std::int64_t step = 0;
  double latency_ns = 0.0;  // mean per invocation within the step
  double invocations = 1.0;  // mean invocations per step
};

// Steps strictly increasing, at least two points.
using StepSeries = std::vector<StepPoint>;

struct LinearModel {
  double intercept_ns = 0.0;
  double slope_ns_per_step = 0.0;
  std::int64_t trained_steps = 0;
  // Mean invocations of the modelled kernel per decode step. A step's kernel
  // time is invocations_per_step * (intercept + slope * step).
  double invocations_per_step = 1.0;
};

struct PredictionError {
  double mape = 0.0;
  double max_ape = 0.0;
};

// One point per decode token index: the mean execution time of `kernel`
// among invocations whose start lies in that token's decode phase. Repeated
// token indices across turns are pooled. Throws kKernelNotFound and
// kInsufficientSteps (fewer than two steps).
StepSeries ExtractStepSeries(const Trace& trace, std::string_view kernel);

// Wall time of every decode phase keyed by token index.
StepSeries ExtractStepWallSeries(const Trace& trace);

// Ordinary least squares of latency on step; input order does not matter.
// Throws kInsufficientSteps for < 2 points and kDegenerateSeries when every
// step is equal.
LinearModel Fit(std::span<const StepPoint> points);

// Mean of (step wall - modelled kernel time) over steps present in both
// series.
double EstimateConstantFloor(std::span<const StepPoint> wall,
                             std::span<const StepPoint> kernel);

double PredictStepLatency(const LinearModel& model, double constant_floor_ns,
                          std::int64_t step);

// Compares predictions against holdout latencies. The holdout is taken as
// observed step totals (for a wall series) so invocations are not applied.
PredictionError Evaluate(const LinearModel& model,
                         std::span<const StepPoint> holdout,
                         double constant_floor_ns);

}  // namespace lmmeter

#endif  // LMMETER_PREDICTOR_H_
