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

#include "actdiag/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>

namespace actdiag::temporal {

std::size_t window_frames(double fraction, double duration, double frame_period) {
  if (!(fraction > 0.0) || !std::isfinite(frame_period) || !(frame_period > 0.0)) return 1;
  const double x = fraction * duration / frame_period;
  const double w = 2.0 * std::round((x - 1.0) / 2.0) + 1.0;
  return w < 1.0 ? 1 : static_cast<std::size_t>(w);
}

corpus::FramePredictions smooth_predictions(const corpus::FramePredictions& preds,
                                            double duration, double window_fraction) {
  if (window_fraction < 0.0 || window_fraction > 1.0) {
    throw Error("window fraction must lie in [0, 1]");
  }
  corpus::FramePredictions out = preds;
  const std::size_t w = window_frames(window_fraction, duration, preds.frame_period());
  if (w <= 1) return out;
  const std::size_t n = preds.frame_count(), c = preds.num_classes;
  const std::size_t half = (w - 1) / 2;
  for (std::size_t f = 0; f < n; ++f) {
    const std::size_t lo = f >= half ? f - half : 0;
    const std::size_t hi = std::min(n - 1, f + half);
    auto row = out.row(f);
    for (std::size_t j = 0; j < c; ++j) {
      double s = 0.0;
      for (std::size_t g = lo; g <= hi; ++g) s += preds.scores[g * c + j];
      row[j] = s / static_cast<double>(hi - lo + 1);
    }
  }
  return out;
}

SweepResult smoothing_sweep(std::span<const corpus::FramePredictions> frames,
                            std::span<const corpus::VideoAnnotation> annotations,
                            const corpus::Vocabulary& vocab, std::span<const double> fractions,
                            const metrics::Sampling& sampling,
                            const metrics::EvalOptions& options) {
  if (fractions.empty()) throw Error("smoothing sweep needs at least one fraction");
  std::unordered_map<std::string, double> duration;
  for (const auto& v : annotations) duration.emplace(v.video_id, v.duration);

  SweepResult out;
  out.fractions.assign(fractions.begin(), fractions.end());
  std::vector<metrics::EvalResult> loc;
  for (double fraction : fractions) {
    std::vector<corpus::FramePredictions> smoothed(frames.size());
    parallel_for(frames.size(), options.workers, [&](std::size_t i) {
      const auto it = duration.find(frames[i].video_id);
      smoothed[i] = it == duration.end() ? frames[i]
                                         : smooth_predictions(frames[i], it->second, fraction);
    });
    loc.push_back(metrics::localization_map(smoothed, annotations, vocab, sampling, options));
    const auto pooled = corpus::pool_frames(smoothed);
    out.localization_map.push_back(loc.back().mean_ap);
    out.classification_map.push_back(
        metrics::classification_map(pooled, annotations, vocab, options).mean_ap);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < fractions.size(); ++i) {
    if (out.localization_map[i] > out.localization_map[best]) best = i;
  }
  out.best_fraction = fractions[best];

  const auto zero = std::find(fractions.begin(), fractions.end(), 0.0);
  const auto base = zero != fractions.end()
                        ? loc[static_cast<std::size_t>(zero - fractions.begin())]
                        : metrics::localization_map(frames, annotations, vocab, sampling, options);
  out.best_relative_change.assign(vocab.size(), kMasked);
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    const double a = base.per_class_ap[c], b = loc[best].per_class_ap[c];
    if (!is_masked(a) && !is_masked(b) && a != 0.0) out.best_relative_change[c] = (b - a) / a;
  }
  return out;
}

ContextBenefit context_benefit(std::span<const corpus::VideoPredictions> preds,
                               std::span<const corpus::VideoAnnotation> annotations,
                               const corpus::Vocabulary& vocab, double margin) {
  const std::size_t c = vocab.size();
  std::unordered_map<std::string, const corpus::VideoPredictions*> by_id;
  for (const auto& p : preds) by_id.emplace(p.video_id, &p);
  Matrix with_sum(c, c, 0.0);  // (b, a)
  std::vector<double> with_count(c, 0.0), total(c, 0.0);
  std::vector<bool> present(c);
  double videos = 0.0;
  for (const auto& video : annotations) {
    const auto it = by_id.find(video.video_id);
    if (it == by_id.end()) throw Error("no video prediction for '" + video.video_id + "'");
    const auto& s = it->second->scores;
    if (s.size() != c) throw Error("prediction for '" + video.video_id + "' has the wrong width");
    videos += 1.0;
    for (std::size_t a = 0; a < c; ++a) total[a] += s[a];
    std::fill(present.begin(), present.end(), false);
    for (const auto& inst : video.instances) {
      const std::size_t b = inst.category;
      if (present[b]) continue;
      present[b] = true;
      with_count[b] += 1.0;
      for (std::size_t a = 0; a < c; ++a) with_sum(b, a) += s[a];
    }
  }
  ContextBenefit out;
  out.margin = margin;
  out.counts.assign(c, 0);
  out.difference = Matrix(c, c, kMasked);
  for (std::size_t b = 0; b < c; ++b) {
    const double without = videos - with_count[b];
    if (with_count[b] == 0.0 || without == 0.0) continue;
    for (std::size_t a = 0; a < c; ++a) {
      if (a == b) continue;
      const double diff =
          with_sum(b, a) / with_count[b] - (total[a] - with_sum(b, a)) / without;
      out.difference(a, b) = diff;
      if (diff > margin) ++out.counts[a];
    }
  }
  return out;
}

Matrix overlap_stats(std::span<const corpus::VideoAnnotation> train,
                     const corpus::Vocabulary& vocab, double grid_step) {
  const std::size_t c = vocab.size();
  Matrix both(c, c, 0.0);
  std::vector<double> cells(c, 0.0);
  std::vector<std::size_t> labels;
  for (const auto& video : train) {
    for (double t : metrics::midpoint_grid(video.duration, grid_step)) {
      labels.clear();
      for (const auto& inst : video.instances) {
        if (inst.contains(t) &&
            std::find(labels.begin(), labels.end(), inst.category) == labels.end()) {
          labels.push_back(inst.category);
        }
      }
      for (auto a : labels) {
        cells[a] += 1.0;
        for (auto b : labels) both(a, b) += 1.0;
      }
    }
  }
  Matrix out(c, c, kMasked);
  for (std::size_t a = 0; a < c; ++a) {
    if (cells[a] == 0.0) continue;
    for (std::size_t b = 0; b < c; ++b) {
      if (a != b) out(a, b) = both(a, b) / cells[a];
    }
  }
  return out;
}

void write_sweep(std::ostream& out, const SweepResult& sweep) {
  out << "fraction,loc_map,cls_map\n";
  for (std::size_t i = 0; i < sweep.fractions.size(); ++i) {
    out << format_double(sweep.fractions[i]) << ',' << format_double(sweep.localization_map[i])
        << ',' << format_double(sweep.classification_map[i]) << '\n';
  }
}

void write_benefit(std::ostream& out, const ContextBenefit& benefit,
                   const corpus::Vocabulary& vocab) {
  out << "# margin=" << format_double(benefit.margin) << '\n';
  out << "class_id,count\n";
  for (std::size_t a = 0; a < vocab.size(); ++a) {
    out << vocab[a].id << ',' << benefit.counts[a] << '\n';
  }
}

}  // namespace actdiag::temporal
