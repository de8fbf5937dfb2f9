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

#include "lmmeter/sampler.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <random>
#include <ostream>
#include <string>

#include "json.hpp"
#include "lmmeter/error.h"

namespace lmmeter {
namespace {

constexpr double kMinImprovement = 1e-12;

void CheckLengths(std::span<const std::int64_t> lengths) {
  if (lengths.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no token lengths supplied");
  }
  for (std::int64_t v : lengths) {
    if (v <= 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "token lengths must be positive, got " + std::to_string(v));
    }
  }
}

LengthBinning BinningFor(std::span<const std::int64_t> lengths, int num_bins) {
  const auto [lo, hi] = std::minmax_element(lengths.begin(), lengths.end());
  return LengthBinning(*lo, *hi, num_bins);
}

// Uniform integer in [0, n) from a standard-specified engine, so shuffles do
// not depend on the library's distribution implementation.
std::uint64_t UniformBelow(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

// One bin's contribution p * ln(p / q) for a subset holding `count` items.
double Term(std::int64_t count, double alpha, double denom, double q) {
  const double p = (static_cast<double>(count) + alpha) / denom;
  return p > 0.0 ? p * std::log(p / q) : 0.0;
}

}  // namespace

LengthBinning::LengthBinning(std::int64_t min, std::int64_t max, int bins)
    : min_(min), max_(max), bins_(bins) {
  if (bins < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 bins");
  }
  if (max < min) throw Error(ErrorCode::kInvalidArgument, "max < min");
}

int LengthBinning::BinOf(std::int64_t length) const {
  if (length < min_ || length > max_) {
    throw Error(ErrorCode::kInvalidArgument,
                "length " + std::to_string(length) + " outside binning range");
  }
  if (length == max_) return bins_ - 1;
  // ceil((v - min) * B / range) - 1, clamped to bin 0 for v == min.
  const std::int64_t range = max_ - min_;
  const std::int64_t scaled = (length - min_) * bins_;
  const std::int64_t ceil = (scaled + range - 1) / range;
  return static_cast<int>(std::max<std::int64_t>(ceil - 1, 0));
}

std::vector<double> LengthBinning::Edges() const {
  std::vector<double> edges(static_cast<std::size_t>(bins_) + 1);
  // A degenerate range still gets strictly increasing unit-spaced edges.
  const double width = max_ > min_ ? static_cast<double>(max_ - min_) / bins_
                                   : 1.0 / bins_;
  for (int i = 0; i <= bins_; ++i) {
    edges[static_cast<std::size_t>(i)] = static_cast<double>(min_) + width * i;
  }
  if (max_ > min_) edges.back() = static_cast<double>(max_);
  return edges;
}

std::int64_t TokenLengthHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

Eigen::ArrayXd TokenLengthHistogram::Probabilities() const {
  const auto bins = static_cast<Eigen::Index>(counts.size());
  const double denom =
      static_cast<double>(total()) + smoothing_alpha * static_cast<double>(bins);
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::kEmptyDataset,
                "histogram has no mass and no smoothing");
  }
  Eigen::ArrayXd p(bins);
  for (Eigen::Index b = 0; b < bins; ++b) {
    p(b) = (static_cast<double>(counts[static_cast<std::size_t>(b)]) +
            smoothing_alpha) /
           denom;
  }
  return p;
}

TokenLengthHistogram Histogram(std::span<const std::int64_t> lengths,
                               const LengthBinning& binning,
                               double smoothing_alpha) {
  if (!(smoothing_alpha >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be >= 0");
  }
  TokenLengthHistogram h;
  h.bin_edges = binning.Edges();
  h.counts.assign(static_cast<std::size_t>(binning.bins()), 0);
  h.smoothing_alpha = smoothing_alpha;
  for (std::int64_t v : lengths) {
    h.counts[static_cast<std::size_t>(binning.BinOf(v))] += 1;
  }
  return h;
}

TokenLengthHistogram Histogram(std::span<const std::int64_t> lengths,
                               int num_bins, double smoothing_alpha) {
  CheckLengths(lengths);
  return Histogram(lengths, BinningFor(lengths, num_bins), smoothing_alpha);
}

double KlDivergence(const Eigen::ArrayXd& p, const Eigen::ArrayXd& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kBinMismatch, "distributions differ in length");
  }
  if (((p > 0.0) && (q <= 0.0)).any()) {
    throw Error(ErrorCode::kUnsupportedZero,
                "reference has zero mass where the subset does not");
  }
  return (p > 0.0).select(p * (p / q).log(), 0.0).sum();
}

double KlDivergence(const TokenLengthHistogram& p,
                    const TokenLengthHistogram& q) {
  if (p.bin_edges != q.bin_edges || p.counts.size() != q.counts.size()) {
    throw Error(ErrorCode::kBinMismatch, "histograms use different bins");
  }
  return KlDivergence(p.Probabilities(), q.Probabilities());
}

SubsetPlan SampleSubset(std::span<const std::int64_t> lengths, double fraction,
                        int num_bins, std::uint64_t seed,
                        double smoothing_alpha) {
  CheckLengths(lengths);
  const auto n = static_cast<std::int64_t>(lengths.size());
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kFractionOutOfRange,
                "fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  const std::int64_t target = std::llround(fraction * static_cast<double>(n));
  if (target < 1) {
    throw Error(ErrorCode::kFractionOutOfRange,
                "fraction selects no prompts from " + std::to_string(n));
  }

  const LengthBinning binning = BinningFor(lengths, num_bins);
  const auto bins = static_cast<std::size_t>(num_bins);
  std::vector<std::vector<std::int64_t>> members(bins);
  for (std::int64_t i = 0; i < n; ++i) {
    members[static_cast<std::size_t>(binning.BinOf(lengths[i]))].push_back(i);
  }

  // Largest-remainder quotas of fraction * count per bin.
  std::vector<std::int64_t> quota(bins);
  std::vector<double> remainder(bins);
  std::int64_t assigned = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double exact = fraction * static_cast<double>(members[b].size());
    quota[b] = std::min(static_cast<std::int64_t>(std::floor(exact)),
                        static_cast<std::int64_t>(members[b].size()));
    remainder[b] = exact - static_cast<double>(quota[b]);
    assigned += quota[b];
  }
  std::vector<std::size_t> order(bins);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  while (assigned < target) {
    bool progressed = false;
    for (std::size_t b : order) {
      if (assigned == target) break;
      if (quota[b] < static_cast<std::int64_t>(members[b].size())) {
        ++quota[b];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  while (assigned > target) {
    for (auto it = order.rbegin(); it != order.rend() && assigned > target; ++it) {
      if (quota[*it] > 0) {
        --quota[*it];
        --assigned;
      }
    }
  }

  // Seeded draw inside each bin: shuffle, the first `quota` are selected and
  // the rest form the swap pool.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::int64_t>> selected(bins);
  std::vector<std::vector<std::int64_t>> pool(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    std::vector<std::int64_t>& m = members[b];
    for (std::size_t i = m.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(UniformBelow(rng, i));
      std::swap(m[i - 1], m[j]);
    }
    const auto q = static_cast<std::size_t>(quota[b]);
    selected[b].assign(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(q));
    pool[b].assign(m.begin() + static_cast<std::ptrdiff_t>(q), m.end());
  }

  const TokenLengthHistogram full = Histogram(lengths, binning, smoothing_alpha);
  const Eigen::ArrayXd q = full.Probabilities();
  const double denom = static_cast<double>(target) +
                       smoothing_alpha * static_cast<double>(bins);
  auto subset_kl = [&] {
    TokenLengthHistogram sub;
    sub.bin_edges = full.bin_edges;
    sub.smoothing_alpha = smoothing_alpha;
    sub.counts.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      sub.counts[b] = static_cast<std::int64_t>(selected[b].size());
    }
    return KlDivergence(sub, full);
  };

  SubsetPlan plan;
  plan.fraction = fraction;
  plan.kl_trajectory.push_back(subset_kl());

  const std::int64_t max_swaps = 10 * target;
  for (std::int64_t swap = 0; swap < max_swaps; ++swap) {
    double best = -kMinImprovement;
    std::size_t best_from = bins;
    std::size_t best_to = bins;
    for (std::size_t from = 0; from < bins; ++from) {
      if (selected[from].empty()) continue;
      const auto c_from = static_cast<std::int64_t>(selected[from].size());
      const double d_from = Term(c_from - 1, smoothing_alpha, denom, q(from)) -
                            Term(c_from, smoothing_alpha, denom, q(from));
      for (std::size_t to = 0; to < bins; ++to) {
        if (to == from || pool[to].empty()) continue;
        const auto c_to = static_cast<std::int64_t>(selected[to].size());
        const double delta =
            d_from + Term(c_to + 1, smoothing_alpha, denom, q(to)) -
            Term(c_to, smoothing_alpha, denom, q(to));
        if (delta < best) {
          best = delta;
          best_from = from;
          best_to = to;
        }
      }
    }
    if (best_from == bins) break;
    pool[best_from].push_back(selected[best_from].back());
    selected[best_from].pop_back();
    selected[best_to].push_back(pool[best_to].back());
    pool[best_to].pop_back();
    plan.kl_trajectory.push_back(subset_kl());
  }

  for (const auto& s : selected) {
    plan.indices.insert(plan.indices.end(), s.begin(), s.end());
  }
  std::sort(plan.indices.begin(), plan.indices.end());
  plan.achieved_kl_nats = plan.kl_trajectory.back();
  return plan;
}

std::vector<std::int64_t> ReadLengths(std::istream& in) {
  std::vector<std::int64_t> lengths;
  std::string text;
  std::int64_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos || text[first] == '#') continue;
    const auto last = text.find_last_not_of(" \t\r");
    const char* begin = text.data() + first;
    const char* end = text.data() + last + 1;
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
      throw Error(ErrorCode::kParseError, "expected an integer token length",
                  line);
    }
    if (value <= 0) {
      throw Error(ErrorCode::kParseError, "token length must be positive",
                  line);
    }
    lengths.push_back(value);
  }
  return lengths;
}

void WriteSubsetPlan(const SubsetPlan& plan, int num_bins, std::uint64_t seed,
                     std::ostream& out) {
  nlohmann::ordered_json header;
  header["fraction"] = plan.fraction;
  header["bins"] = num_bins;
  header["seed"] = seed;
  header["count"] = plan.indices.size();
  header["achieved_kl_nats"] = plan.achieved_kl_nats;
  out << header.dump() << '\n';
  for (std::int64_t i : plan.indices) out << i << '\n';
}

}  // namespace lmmeter
