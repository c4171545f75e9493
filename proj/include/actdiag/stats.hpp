/* Copyright 2026 The actdiag Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Attribute binning, Pearson correlation with permutation p-values, and
// percentile bootstrap intervals.

#ifndef ACTDIAG_STATS_HPP_
#define ACTDIAG_STATS_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "actdiag/common.hpp"

namespace actdiag::stats {

// Uniform index in [0, n).
std::size_t draw_index(std::mt19937_64& rng, std::size_t n);

struct Summary {
  double mean = kMasked;
  double median = kMasked;
  double std = kMasked;  // population standard deviation
  std::size_t n = 0;
};

// Ignores masked (NaN) values.
Summary summarize(std::span<const double> values);

enum class BinMode { kQuantile, kKMeans1D };

struct Bin {
  double x_center = 0.0;  // mean x of the members
  double y_mean = 0.0;
  double y_std = 0.0;  // population standard deviation
  std::size_t n = 0;
};

struct BinnedCurve {
  std::vector<Bin> bins;
  std::size_t k = 0;
  BinMode mode = BinMode::kQuantile;
  std::vector<std::size_t> assignment;  // bin index per input pair
};

// Bin index per value, bins ordered by increasing x. Quantile mode splits the
// x-ranks (ties broken by input index) into k near-equal groups; kmeans1d mode
// is the globally optimal 1-D k-means partition. Throws Error unless
// 1 <= k <= x.size() and every x is finite.
std::vector<std::size_t> assign_bins(std::span<const double> x, std::size_t k, BinMode mode);

BinnedCurve bin_by_attribute(std::span<const std::pair<double, double>> pairs, std::size_t k,
                             BinMode mode = BinMode::kQuantile);

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided permutation p-value
  std::size_t n = 0;
  std::size_t permutations = 0;
};

// Product-moment correlation. p = (1 + #{|rho_perm| >= |rho|}) / (1 + P),
// each permutation drawn from its own seeded stream. Throws Error on length
// mismatch, n < 3, or zero variance.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y,
                          std::size_t permutations = 10000, std::uint64_t seed = 0,
                          unsigned workers = 1);

struct BootstrapOptions {
  std::size_t resamples = 10000;
  double level = 0.95;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::size_t max_retries = 100;
};

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
  double point = 0.0;
};

// A statistic over a multiset of units given as per-unit multiplicities.
using CountStatistic = std::function<std::optional<double>(std::span<const std::uint32_t>)>;

// Percentile interval over resamples-with-replacement of `unit_count` units.
// Resamples where the statistic is undefined are redrawn up to max_retries
// times before Error is thrown.
ConfidenceInterval bootstrap_ci(std::size_t unit_count, const CountStatistic& statistic,
                                const BootstrapOptions& options);

// Linear-interpolation quantile of sorted values.
double quantile_sorted(std::span<const double> sorted, double q);

void write_curve(std::ostream& out, const BinnedCurve& curve);

}  // namespace actdiag::stats

#endif  // ACTDIAG_STATS_HPP_
