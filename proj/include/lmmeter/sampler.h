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

#ifndef LMMETER_SAMPLER_H_
#define LMMETER_SAMPLER_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace lmmeter {

inline constexpr int kDefaultBins = 30;
inline constexpr double kDefaultSmoothing = 0.5;

// Equal-width bins over the integer range [min, max]. A value sitting on an
// interior edge belongs to the lower bin; the global max lands in the last
// bin. Bin lookup is exact integer arithmetic.
class LengthBinning {
 public:
  LengthBinning(std::int64_t min, std::int64_t max, int bins);

  int bins() const { return bins_; }
  int BinOf(std::int64_t length) const;  // kInvalidArgument outside range
  std::vector<double> Edges() const;     // bins + 1 strictly increasing

 private:
  std::int64_t min_;
  std::int64_t max_;
  int bins_;
};

struct TokenLengthHistogram {
  std::vector<double> bin_edges;
  std::vector<std::int64_t> counts;
  double smoothing_alpha = 0.0;

  std::int64_t total() const;
  // (count + alpha) / (N + alpha * B).
  Eigen::ArrayXd Probabilities() const;
};

// Throws kEmptyDataset for no lengths, kInvalidArgument for num_bins < 2 or
// nonpositive lengths.
TokenLengthHistogram Histogram(std::span<const std::int64_t> lengths,
                               int num_bins,
                               double smoothing_alpha = kDefaultSmoothing);
TokenLengthHistogram Histogram(std::span<const std::int64_t> lengths,
                               const LengthBinning& binning,
                               double smoothing_alpha = kDefaultSmoothing);

// KL(p || q) in nats, summed over bins with p_b > 0. Throws kBinMismatch when
// edges differ and kUnsupportedZero when q_b = 0 under p_b > 0.
double KlDivergence(const TokenLengthHistogram& p,
                    const TokenLengthHistogram& q);
double KlDivergence(const Eigen::ArrayXd& p, const Eigen::ArrayXd& q);

struct SubsetPlan {
  std::vector<std::int64_t> indices;  // sorted, unique
  double achieved_kl_nats = 0.0;      // KL(subset || full), smoothed
  double fraction = 1.0;
  // KL after stratified allocation, then after every accepted swap.
  std::vector<double> kl_trajectory;
};

// Stratified allocation (largest-remainder quotas, seeded draw inside each
// bin) followed by greedy swaps that each maximally reduce
// KL(subset || full), stopping when no swap helps or after 10 * |subset|
// swaps. Subset size is round(fraction * N). Throws kFractionOutOfRange.
SubsetPlan SampleSubset(std::span<const std::int64_t> lengths, double fraction,
                        int num_bins, std::uint64_t seed,
                        double smoothing_alpha = kDefaultSmoothing);

// One positive integer per line; blank lines and lines starting with '#'
// are skipped. Throws kParseError with the line number.
std::vector<std::int64_t> ReadLengths(std::istream& in);

// A JSON header line, then one selected index per line.
void WriteSubsetPlan(const SubsetPlan& plan, int num_bins, std::uint64_t seed,
                     std::ostream& out);

}  // namespace lmmeter

#endif  // LMMETER_SAMPLER_H_
