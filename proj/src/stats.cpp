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

#include "actdiag/stats.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace actdiag::stats {

std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(rng);
}

Summary summarize(std::span<const double> values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) {
    if (!is_masked(x)) v.push_back(x);
  }
  Summary s;
  s.n = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(v.size()));
  std::sort(v.begin(), v.end());
  s.median = quantile_sorted(v, 0.5);
  return s;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return kMasked;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

namespace {

// Optimal 1-D k-means on sorted values by dynamic programming over prefix
// sums. Returns the first sorted rank of each cluster.
std::vector<std::size_t> kmeans1d_starts(std::span<const double> sorted, std::size_t k) {
  const std::size_t n = sorted.size();
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + sorted[i];
    s2[i + 1] = s2[i] + sorted[i] * sorted[i];
  }
  // Sum of squared deviations of sorted[i..j).
  auto cost = [&](std::size_t i, std::size_t j) {
    const double m = static_cast<double>(j - i);
    const double s = s1[j] - s1[i];
    return std::max(0.0, (s2[j] - s2[i]) - s * s / m);
  };
  const double inf = std::numeric_limits<double>::infinity();
  // best[m][j]: optimal cost of the first j values in m clusters.
  std::vector<std::vector<double>> best(k + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> split(k + 1, std::vector<std::size_t>(n + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t m = 1; m <= k; ++m) {
    for (std::size_t j = m; j <= n - (k - m); ++j) {
      for (std::size_t i = m - 1; i < j; ++i) {
        if (best[m - 1][i] == inf) continue;
        const double c = best[m - 1][i] + cost(i, j);
        if (c < best[m][j]) {
          best[m][j] = c;
          split[m][j] = i;
        }
      }
    }
  }
  std::vector<std::size_t> starts(k);
  std::size_t j = n;
  for (std::size_t m = k; m >= 1; --m) {
    starts[m - 1] = split[m][j];
    j = split[m][j];
  }
  return starts;
}

}  // namespace

std::vector<std::size_t> assign_bins(std::span<const double> x, std::size_t k, BinMode mode) {
  const std::size_t n = x.size();
  if (k < 1 || k > n) {
    throw Error("bin count must satisfy 1 <= k <= n (k=" + std::to_string(k) +
                ", n=" + std::to_string(n) + ")");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw Error("binning requires finite x values");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<std::size_t> bin(n);
  if (mode == BinMode::kQuantile) {
    for (std::size_t b = 0; b < k; ++b) {
      const std::size_t lo = b * n / k, hi = (b + 1) * n / k;
      for (std::size_t r = lo; r < hi; ++r) bin[order[r]] = b;
    }
    return bin;
  }
  std::vector<double> sorted(n);
  for (std::size_t r = 0; r < n; ++r) sorted[r] = x[order[r]];
  const auto starts = kmeans1d_starts(sorted, k);
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t hi = b + 1 < k ? starts[b + 1] : n;
    for (std::size_t r = starts[b]; r < hi; ++r) bin[order[r]] = b;
  }
  return bin;
}

BinnedCurve bin_by_attribute(std::span<const std::pair<double, double>> pairs, std::size_t k,
                             BinMode mode) {
  std::vector<double> x(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) x[i] = pairs[i].first;
  BinnedCurve curve;
  curve.k = k;
  curve.mode = mode;
  curve.assignment = assign_bins(x, k, mode);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < pairs.size(); ++i) members[curve.assignment[i]].push_back(i);
  for (const auto& m : members) {
    if (m.empty()) continue;
    Bin bin;
    bin.n = m.size();
    double sx = 0.0, sy = 0.0;
    for (auto i : m) {
      sx += pairs[i].first;
      sy += pairs[i].second;
    }
    bin.x_center = sx / static_cast<double>(bin.n);
    bin.y_mean = sy / static_cast<double>(bin.n);
    double ss = 0.0;
    for (auto i : m) ss += (pairs[i].second - bin.y_mean) * (pairs[i].second - bin.y_mean);
    bin.y_std = std::sqrt(ss / static_cast<double>(bin.n));
    curve.bins.push_back(bin);
  }
  return curve;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y,
                          std::size_t permutations, std::uint64_t seed, unsigned workers) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw Error("pearson: need at least 3 samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  std::vector<double> dx(n), dy(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dx[i] = x[i] - mx;
    dy[i] = y[i] - my;
    sxx += dx[i] * dx[i];
    syy += dy[i] * dy[i];
    sxy += dx[i] * dy[i];
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error("pearson: undefined correlation (zero variance)");
  const double norm = std::sqrt(sxx * syy);
  CorrelationResult result;
  result.n = n;
  result.permutations = permutations;
  result.rho = std::clamp(sxy / norm, -1.0, 1.0);
  if (permutations == 0) {
    result.p_value = kMasked;
    return result;
  }
  const double threshold = std::abs(result.rho) - 1e-12;
  std::vector<std::uint8_t> extreme(permutations, 0);
  parallel_for(permutations, workers, [&](std::size_t p) {
    std::mt19937_64 rng(mix_seed(seed, p));
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[draw_index(rng, i + 1)]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += dx[i] * dy[perm[i]];
    extreme[p] = std::abs(s / norm) >= threshold ? 1 : 0;
  });
  const auto hits = static_cast<double>(std::count(extreme.begin(), extreme.end(), 1));
  result.p_value = (hits + 1.0) / (static_cast<double>(permutations) + 1.0);
  return result;
}

ConfidenceInterval bootstrap_ci(std::size_t unit_count, const CountStatistic& statistic,
                                const BootstrapOptions& options) {
  if (unit_count < 2) throw Error("bootstrap needs at least 2 units");
  if (options.resamples < 100) throw Error("bootstrap needs at least 100 resamples");
  if (!(options.level > 0.0 && options.level < 1.0)) throw Error("bootstrap level must be in (0, 1)");
  const std::vector<std::uint32_t> all(unit_count, 1);
  const auto point = statistic(all);
  if (!point) throw Error("bootstrap statistic undefined on the full sample");

  std::vector<double> values(options.resamples);
  std::vector<std::uint8_t> failed(options.resamples, 0);
  parallel_for(options.resamples, options.workers, [&](std::size_t r) {
    std::vector<std::uint32_t> counts(unit_count);
    for (std::size_t attempt = 0; attempt <= options.max_retries; ++attempt) {
      std::mt19937_64 rng(mix_seed(options.seed, r, attempt));
      std::fill(counts.begin(), counts.end(), 0u);
      for (std::size_t i = 0; i < unit_count; ++i) ++counts[draw_index(rng, unit_count)];
      if (const auto v = statistic(counts)) {
        values[r] = *v;
        return;
      }
    }
    failed[r] = 1;
  });
  if (std::find(failed.begin(), failed.end(), 1) != failed.end()) {
    throw Error("bootstrap statistic undefined after " + std::to_string(options.max_retries) +
                " redraws");
  }
  std::sort(values.begin(), values.end());
  const double tail = (1.0 - options.level) / 2.0;
  return {quantile_sorted(values, tail), quantile_sorted(values, 1.0 - tail), *point};
}

void write_curve(std::ostream& out, const BinnedCurve& curve) {
  out << "x_center,y_mean,y_std,n\n";
  for (const auto& b : curve.bins) {
    out << format_double(b.x_center) << ',' << format_double(b.y_mean) << ','
        << format_double(b.y_std) << ',' << b.n << '\n';
  }
}

}  // namespace actdiag::stats
