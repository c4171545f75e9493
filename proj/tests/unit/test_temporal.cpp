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

#include <doctest.h>

#include <limits>
#include <random>
#include <sstream>

#include "actdiag/temporal.hpp"
#include "support/synthetic.hpp"

using namespace actdiag;
using namespace actdiag::temporal;
using corpus::FramePredictions;
using corpus::VideoAnnotation;
using corpus::VideoPredictions;
using doctest::Approx;

namespace {

// 11 frames one second apart, one class.
FramePredictions line(std::vector<double> scores) {
  FramePredictions fp;
  fp.video_id = "v";
  fp.num_classes = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) fp.frame_times.push_back(static_cast<double>(i));
  fp.scores = std::move(scores);
  return fp;
}

std::vector<double> impulse(std::size_t n, std::size_t at) {
  std::vector<double> v(n, 0.0);
  v[at] = 1.0;
  return v;
}

testing::SyntheticData oracle_frames(std::size_t frames, double noise, std::uint64_t seed) {
  testing::SyntheticOptions o;
  o.frames = frames;
  o.seed = seed;
  auto d = testing::make_synthetic(o);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, noise > 0 ? noise : 1);
  for (std::size_t v = 0; v < d.frames.frames.size(); ++v) {
    auto& fp = d.frames.frames[v];
    for (std::size_t f = 0; f < fp.frame_count(); ++f) {
      for (std::size_t c = 0; c < o.classes; ++c) {
        const double clean = d.corpus.test[v].labeled_at(c, fp.frame_times[f]) ? 1.0 : 0.0;
        fp.row(f)[c] = noise > 0 ? clean + g(rng) : clean;
      }
    }
  }
  return d;
}

}  // namespace

TEST_CASE("window width in frames") {
  CHECK(window_frames(0.0, 30, 1) == 1);
  CHECK(window_frames(0.3, 10, 1) == 3);
  CHECK(window_frames(0.4, 10, 1) == 5);  // 4 rounds up to the odd count 5
  CHECK(window_frames(0.5, 10, 1) == 5);
  CHECK(window_frames(0.01, 30, 1.2) == 1);
  CHECK(window_frames(0.1, 30, std::numeric_limits<double>::quiet_NaN()) == 1);
}

TEST_CASE("smoothing: identity, constants, impulses") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> r(11);
  for (auto& x : r) x = u(rng);
  CHECK(smooth_predictions(line(r), 10, 0.0).scores == r);
  const auto flat = smooth_predictions(line(std::vector<double>(11, 0.25)), 10, 0.5);
  for (double v : flat.scores) CHECK(v == 0.25);

  const auto mid = smooth_predictions(line(impulse(11, 5)), 10, 0.3);
  CHECK(mid.scores[4] == Approx(1.0 / 3));
  CHECK(mid.scores[5] == Approx(1.0 / 3));
  CHECK(mid.scores[6] == Approx(1.0 / 3));
  CHECK(mid.scores[3] == 0.0);
  // At the edge the average runs over two frames.
  const auto edge = smooth_predictions(line(impulse(11, 0)), 10, 0.3);
  CHECK(edge.scores[0] == 0.5);
  CHECK(edge.scores[1] == Approx(1.0 / 3));
  CHECK(edge.scores[2] == 0.0);
  CHECK_THROWS_AS(smooth_predictions(line(r), 10, 1.5), Error);
}

TEST_CASE("smoothing: bounded by the original range and keeps interior mass") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> r(40);
    for (auto& x : r) x = u(rng);
    const auto s = smooth_predictions(line(r), 39, 0.05 + 0.2 * u(rng)).scores;
    const double hi = *std::max_element(r.begin(), r.end());
    const double lo = *std::min_element(r.begin(), r.end());
    for (double v : s) {
      CHECK(v <= hi + 1e-15);
      CHECK(v >= lo - 1e-15);
    }
  }
  // A pulse far from both ends keeps its mass exactly spread.
  const auto s = smooth_predictions(line(impulse(41, 20)), 40, 0.125).scores;
  double mass = 0;
  for (double v : s) mass += v;
  CHECK(mass == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sweep: fraction 0 equals plain evaluation") {
  testing::SyntheticOptions o;
  const auto d = testing::make_synthetic(o);
  const std::vector<double> zero = {0.0};
  const auto sweep = smoothing_sweep(d.frames.frames, d.corpus.test, d.corpus.vocab, zero);
  const auto plain = metrics::localization_map(d.frames.frames, d.corpus.test, d.corpus.vocab);
  CHECK(sweep.localization_map[0] == plain.mean_ap);
  const auto pooled = corpus::pool_frames(d.frames.frames);
  CHECK(sweep.classification_map[0] ==
        metrics::classification_map(pooled, d.corpus.test, d.corpus.vocab).mean_ap);
  CHECK(sweep.best_fraction == 0.0);
  for (double v : sweep.best_relative_change) CHECK((v == 0.0 || is_masked(v)));
  const auto full = smoothing_sweep(d.frames.frames, d.corpus.test, d.corpus.vocab);
  CHECK(full.localization_map[0] == plain.mean_ap);
  CHECK(full.fractions == kDefaultFractions);
}

TEST_CASE("sweep: clean oracle frames prefer no smoothing, noisy ones prefer some") {
  // Frames on the sampling grid, so clean scores are exact.
  const auto clean = oracle_frames(25, 0.0, 5);
  const auto a = smoothing_sweep(clean.frames.frames, clean.corpus.test, clean.corpus.vocab);
  CHECK(a.best_fraction == 0.0);
  CHECK(a.localization_map[0] == 1.0);
  const auto noisy = oracle_frames(101, 1.0, 5);
  const auto b = smoothing_sweep(noisy.frames.frames, noisy.corpus.test, noisy.corpus.vocab);
  CHECK(b.best_fraction > 0.0);
  std::size_t gains = 0;
  for (double v : b.best_relative_change) gains += !is_masked(v) && v > 0;
  CHECK(gains > 0);
  std::ostringstream out;
  write_sweep(out, b);
  CHECK(out.str().rfind("fraction,loc_map,cls_map\n0,", 0) == 0);
}

TEST_CASE("context benefit: wired scores, infinite margin, null data") {
  const corpus::Vocabulary vocab({{"a", "x", "p", ""}, {"b", "y", "q", ""}, {"c", "z", "r", ""}});
  std::vector<VideoAnnotation> ann;
  std::vector<VideoPredictions> preds;
  for (int i = 0; i < 20; ++i) {
    const bool has_b = i % 2 == 0;
    VideoAnnotation v{testing::padded("v", i), 10, {}, ""};
    if (has_b) v.instances.push_back({1, 0, 5});
    if (i % 5 == 0) v.instances.push_back({2, 0, 5});
    ann.push_back(v);
    preds.push_back({v.video_id, {has_b ? 1.0 : 0.0, 0.5, 0.5}});
  }
  const auto r = context_benefit(preds, ann, vocab);
  CHECK(r.difference(0, 1) == 1.0);
  CHECK(r.counts[0] >= 1);
  CHECK(r.counts[1] == 0);
  CHECK(is_masked(r.difference(0, 0)));
  const auto inf = context_benefit(preds, ann, vocab, std::numeric_limits<double>::infinity());
  for (auto n : inf.counts) CHECK(n == 0);
  std::ostringstream out;
  write_benefit(out, r, vocab);
  CHECK(out.str().rfind("# margin=0\nclass_id,count\na,", 0) == 0);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<VideoAnnotation> many;
  std::vector<VideoPredictions> noise;
  for (int i = 0; i < 4000; ++i) {
    VideoAnnotation v{testing::padded("n", i), 10, {}, ""};
    for (std::size_t c = 0; c < 3; ++c) {
      if (u(rng) < 0.3) v.instances.push_back({c, 0, 5});
    }
    many.push_back(v);
    noise.push_back({v.video_id, {u(rng), u(rng), u(rng)}});
  }
  const auto null = context_benefit(noise, many, vocab, 0.05);
  for (auto n : null.counts) CHECK(n == 0);
}

TEST_CASE("context benefit: counts bounded and sign-invariant under affine maps") {
  testing::SyntheticOptions o;
  const auto d = testing::make_synthetic(o);
  auto pooled = corpus::pool_frames(d.frames.frames);
  const auto r = context_benefit(pooled, d.corpus.test, d.corpus.vocab);
  for (auto n : r.counts) CHECK(n <= o.classes - 1);
  for (auto& p : pooled) {
    for (std::size_t c = 0; c < o.classes; ++c) p.scores[c] = 4.0 * p.scores[c] + c;
  }
  CHECK(context_benefit(pooled, d.corpus.test, d.corpus.vocab).counts == r.counts);
}

TEST_CASE("overlap statistics") {
  const corpus::Vocabulary vocab({{"a", "x", "p", ""}, {"b", "y", "q", ""}, {"c", "z", "r", ""}});
  const std::vector<VideoAnnotation> disjoint = {{"v", 10, {{0, 0, 3}, {1, 4, 6}}, ""}};
  const auto z = overlap_stats(disjoint, vocab);
  CHECK(z(0, 1) == 0.0);
  CHECK(z(1, 0) == 0.0);
  CHECK(is_masked(z(0, 0)));
  CHECK(is_masked(z(2, 0)));

  const std::vector<VideoAnnotation> nested = {{"v", 10, {{0, 2, 4}, {1, 1, 6}}, ""}};
  const auto n = overlap_stats(nested, vocab);
  CHECK(n(0, 1) == 1.0);
  CHECK(n(1, 0) < 1.0);

  const std::vector<VideoAnnotation> layout = {
      {"v1", 12.37, {{0, 0.5, 4.25}, {1, 3.1, 9.9}, {2, 8.05, 12.37}, {0, 9.5, 11}}, ""},
      {"v2", 7.5, {{1, 0, 7.5}, {2, 2.2, 2.9}}, ""}};
  const auto m = overlap_stats(layout, vocab, 0.01);
  std::vector<std::vector<double>> both(3, std::vector<double>(3, 0));
  std::vector<double> own(3, 0);
  for (const auto& v : layout) {
    for (int i = 0; (i + 0.5) * 0.01 < v.duration; ++i) {
      const double t = (i + 0.5) * 0.01;
      std::vector<bool> on(3, false);
      for (const auto& in : v.instances) on[in.category] = on[in.category] || (t >= in.start && t <= in.end);
      for (std::size_t a = 0; a < 3; ++a) {
        if (!on[a]) continue;
        own[a] += 1;
        for (std::size_t b = 0; b < 3; ++b) both[a][b] += on[b];
      }
    }
  }
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      if (a != b) CHECK(m(a, b) == Approx(both[a][b] / own[a]).epsilon(1e-12));
    }
  }
}
