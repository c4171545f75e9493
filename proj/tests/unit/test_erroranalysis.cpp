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

#include <random>
#include <sstream>

#include "actdiag/erroranalysis.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace actdiag;
using namespace actdiag::errors;
using corpus::FramePredictions;
using corpus::VideoAnnotation;
using corpus::VideoPredictions;
using doctest::Approx;

namespace {

const corpus::Vocabulary& toy_vocab() {
  static const corpus::Vocabulary v(
      {{"a", "hold", "cup", ""}, {"b", "drink", "cup", ""}, {"c", "hold", "book", ""}});
  return v;
}

FramePredictions frames_at(std::string id, std::vector<double> times,
                           std::vector<std::vector<double>> rows) {
  FramePredictions fp;
  fp.video_id = std::move(id);
  fp.frame_times = std::move(times);
  fp.num_classes = rows.front().size();
  for (const auto& r : rows) fp.scores.insert(fp.scores.end(), r.begin(), r.end());
  return fp;
}

// Independent labeling of one item, written from the precedence rules.
std::size_t label_of(const VideoAnnotation& v, std::size_t c, double t,
                     const corpus::Vocabulary& vocab) {
  for (const auto& in : v.instances) {
    if (in.category == c && t >= in.start && t <= in.end) return 0;
  }
  if (oracle::near_boundary(v, c, t)) return 1;
  std::vector<std::size_t> here;
  for (const auto& in : v.instances) {
    if (t >= in.start && t <= in.end) here.push_back(in.category);
  }
  for (auto k : here) {
    if (vocab[k].object_id == vocab[c].object_id) return 2;
  }
  for (auto k : here) {
    if (vocab[k].verb_id == vocab[c].verb_id) return 3;
  }
  return here.empty() ? 5 : 4;
}

}  // namespace

TEST_CASE("typing: hand-placed scores on a three-class video") {
  // a covers [0, 6] and b covers [8, 12]; boundary of a is [0,2] u [4,8].
  const std::vector<VideoAnnotation> ann = {{"v", 12, {{0, 0, 6}, {1, 8, 12}}, ""}};
  const std::vector<FramePredictions> frames = {frames_at("v", {0, 3, 6, 9, 12},
                                                          {{0.1, 0.4, 0.0},
                                                           {0.2, 0.0, 0.9},
                                                           {0.9, 0.9, 0.0},
                                                           {0.8, 0.5, 0.8},
                                                           {0.7, 0.0, 0.0}})};
  metrics::Sampling s;
  s.frames_per_video = 5;
  const auto r = classify_top_predictions(frames, ann, toy_vocab(), s);
  CHECK(r.top_n == std::vector<std::size_t>{3, 2, 0});
  CHECK(r.fractions(0, 0) == Approx(1.0 / 3));
  CHECK(r.fractions(0, 2) == Approx(2.0 / 3));
  CHECK(r.fractions(1, 0) == 0.5);
  CHECK(r.fractions(1, 2) == 0.5);  // t=6 lies before b's boundary region
  CHECK(is_masked(r.fractions(2, 0)));

  ErrorOptions o;
  o.top_n = 2;
  const auto fixed = classify_top_predictions(frames, ann, toy_vocab(), s, o);
  CHECK(fixed.fractions(2, 3) == 0.5);  // t=3 inside a, shares the verb
  CHECK(fixed.fractions(2, 4) == 0.5);  // t=9 inside b, shares nothing

  std::ostringstream out;
  write_breakdown(out, r, toy_vocab());
  CHECK(out.str() ==
        "class_id,tp,bnd,obj,vrb,oth,fp\n"
        "a,0.3333333333333333,0,0.6666666666666666,0,0,0\n"
        "b,0.5,0,0.5,0,0,0\n"
        "c,,,,,,\n");
}

TEST_CASE("typing: boundary precedes object sharing") {
  const VideoAnnotation v{"v", 30, {{0, 3, 12}, {1, 4, 20}}, ""};
  CHECK(classify_item(v, 0, 13, toy_vocab()) == ErrorType::kBND);
  CHECK(classify_item(v, 0, 16, toy_vocab()) == ErrorType::kOBJ);
  CHECK(classify_item(v, 0, 25, toy_vocab()) == ErrorType::kFP);
  CHECK(classify_item(v, 0, 13, toy_vocab(), 0.0) == ErrorType::kOBJ);
}

TEST_CASE("typing: perfect and vacant predictions") {
  testing::SyntheticOptions o;
  auto d = testing::make_synthetic(o);
  auto perfect = d.frames.frames;
  auto vacant = d.frames.frames;
  for (std::size_t v = 0; v < perfect.size(); ++v) {
    const auto& ann = d.corpus.test[v];
    for (std::size_t f = 0; f < perfect[v].frame_count(); ++f) {
      const double t = perfect[v].frame_times[f];
      bool any = false;
      for (const auto& in : ann.instances) any = any || in.contains(t);
      for (std::size_t c = 0; c < o.classes; ++c) {
        perfect[v].row(f)[c] = ann.labeled_at(c, t) ? 1.0 : 0.0;
        vacant[v].row(f)[c] = any || oracle::near_boundary(ann, c, t) ? 0.0 : 1.0;
      }
    }
  }
  const auto p = classify_top_predictions(perfect, d.corpus.test, d.corpus.vocab);
  const auto q = classify_top_predictions(vacant, d.corpus.test, d.corpus.vocab);
  std::size_t checked = 0;
  for (std::size_t c = 0; c < o.classes; ++c) {
    if (p.top_n[c] == 0) continue;
    CHECK(p.fractions(c, 0) == 1.0);
    ++checked;
  }
  CHECK(checked > 0);
  // Enough vacant frames exist for every class's top items.
  for (std::size_t c = 0; c < o.classes; ++c) {
    if (q.top_n[c] == 0) continue;
    CHECK(q.fractions(c, 5) == 1.0);
  }
}

TEST_CASE("typing: matches exhaustive labeling, sums to one, zero width gives no bnd") {
  testing::SyntheticOptions o;
  o.frames = 41;
  const auto d = testing::make_synthetic(o);
  const auto r = classify_top_predictions(d.frames.frames, d.corpus.test, d.corpus.vocab);
  const std::size_t samples = 25;
  for (std::size_t c = 0; c < o.classes; ++c) {
    struct Item {
      double score;
      std::size_t label;
    };
    std::vector<Item> items;
    std::size_t positives = 0;
    for (std::size_t v = 0; v < d.corpus.test.size(); ++v) {
      const auto& ann = d.corpus.test[v];
      const auto& fp = d.frames.frames[v];
      for (std::size_t i = 0; i < samples; ++i) {
        const double t = ann.duration * i / (samples - 1.0);
        std::size_t best = 0;
        for (std::size_t f = 1; f < fp.frame_count(); ++f) {
          if (std::abs(fp.frame_times[f] - t) < std::abs(fp.frame_times[best] - t)) best = f;
        }
        const auto l = label_of(ann, c, t, d.corpus.vocab);
        positives += l == 0;
        items.push_back({fp.scores[best * o.classes + c], l});
      }
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const Item& a, const Item& b) { return a.score > b.score; });
    REQUIRE(r.top_n[c] == positives);
    if (positives == 0) continue;
    std::vector<double> expect(kErrorTypes, 0);
    for (std::size_t i = 0; i < positives; ++i) expect[items[i].label] += 1.0 / positives;
    double sum = 0;
    for (std::size_t k = 0; k < kErrorTypes; ++k) {
      CHECK(r.fractions(c, k) == Approx(expect[k]).epsilon(1e-12));
      sum += r.fractions(c, k);
    }
    CHECK(sum == Approx(1.0).epsilon(1e-9));
  }

  ErrorOptions zero;
  zero.alpha_fraction = 0.0;
  zero.workers = 3;
  const auto z = classify_top_predictions(d.frames.frames, d.corpus.test, d.corpus.vocab, {}, zero);
  for (std::size_t c = 0; c < o.classes; ++c) {
    if (z.top_n[c] > 0) CHECK(z.fractions(c, 1) == 0.0);
  }
}

TEST_CASE("cross confusion: zeros and single video") {
  const std::vector<VideoAnnotation> ann = {{"v", 10, {{1, 0, 5}}, ""}};
  const std::vector<VideoPredictions> zeros = {{"v", {0, 0, 0}}};
  const auto z = cross_confusion(zeros, ann, toy_vocab());
  CHECK(z(0, 1) == 0.0);
  CHECK(z(2, 1) == 0.0);
  CHECK(is_masked(z(1, 1)));
  CHECK(is_masked(z(1, 0)));
  const std::vector<VideoPredictions> one = {{"v", {0.7, 0.2, 0.1}}};
  CHECK(cross_confusion(one, ann, toy_vocab())(0, 1) == 0.7);
}

TEST_CASE("cross confusion: brute force and invariance to videos holding A") {
  testing::SyntheticOptions o;
  const auto d = testing::make_synthetic(o);
  const auto pooled = corpus::pool_frames(d.frames.frames);
  const auto m = cross_confusion(pooled, d.corpus.test, d.corpus.vocab);
  for (std::size_t a = 0; a < o.classes; ++a) {
    for (std::size_t b = 0; b < o.classes; ++b) {
      double s = 0, n = 0;
      for (std::size_t v = 0; v < pooled.size(); ++v) {
        const auto& ann = d.corpus.test[v];
        if (ann.has_category(b) && !ann.has_category(a)) {
          s += pooled[v].scores[a];
          n += 1;
        }
      }
      if (a == b || n == 0) {
        CHECK(is_masked(m(a, b)));
      } else {
        CHECK(m(a, b) == Approx(s / n).epsilon(1e-12));
      }
    }
  }

  // Extra videos holding class 0 leave column entries of row 0 unchanged.
  auto ann2 = d.corpus.test;
  auto preds2 = pooled;
  for (int i = 0; i < 5; ++i) {
    ann2.push_back({testing::padded("extra", i), 20, {{0, 1, 5}, {3, 2, 9}}, ""});
    preds2.push_back({testing::padded("extra", i), std::vector<double>(o.classes, 0.99)});
  }
  const auto m2 = cross_confusion(preds2, ann2, d.corpus.vocab);
  for (std::size_t b = 0; b < o.classes; ++b) {
    CHECK((m2(0, b) == m(0, b) || (is_masked(m2(0, b)) && is_masked(m(0, b)))));
  }
}

TEST_CASE("ablation: identical, hand values, one class randomized") {
  const corpus::Vocabulary one({{"a", "v", "o", ""}});
  const std::vector<VideoAnnotation> ann = {{"p", 10, {{0, 0, 5}}, ""}, {"n", 10, {}, ""}};
  const std::vector<VideoPredictions> good = {{"p", {0.9}}, {"n", {0.1}}};
  const std::vector<VideoPredictions> bad = {{"p", {0.1}}, {"n", {0.9}}};
  const auto r = ablation_delta(good, bad, ann, one);
  CHECK(r.first.per_class_ap[0] == 1.0);
  CHECK(r.second.per_class_ap[0] == 0.5);
  CHECK(r.delta[0] == -0.5);
  CHECK(r.relative[0] == -0.5);
  CHECK(r.largest_loss == 0u);
  std::ostringstream out;
  write_ablation(out, r, one);
  CHECK(out.str() == "class_id,ap_first,ap_second,delta,relative\na,1,0.5,-0.5,-0.5\n");

  testing::SyntheticOptions o;
  const auto d = testing::make_synthetic(o);
  const auto pooled = corpus::pool_frames(d.frames.frames);
  const auto same = ablation_delta(pooled, pooled, d.corpus.test, d.corpus.vocab);
  for (double v : same.delta) CHECK((v == 0.0 || is_masked(v)));

  auto noisy = pooled;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& p : noisy) p.scores[2] = u(rng);
  const auto diff = ablation_delta(pooled, noisy, d.corpus.test, d.corpus.vocab);
  CHECK(diff.delta[2] < 0);
  CHECK(diff.largest_loss == 2u);
  for (std::size_t c = 0; c < o.classes; ++c) {
    if (c != 2 && !is_masked(diff.delta[c])) CHECK(diff.delta[c] == 0.0);
  }

  auto fewer = pooled;
  fewer.pop_back();
  CHECK_THROWS_AS(ablation_delta(pooled, fewer, d.corpus.test, d.corpus.vocab), Error);
}
