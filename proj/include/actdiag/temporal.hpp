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

// Temporal smoothing of frame scores, context benefit between classes, and
// class co-occurrence over time.

#ifndef ACTDIAG_TEMPORAL_HPP_
#define ACTDIAG_TEMPORAL_HPP_

#include <iosfwd>
#include <span>
#include <vector>

#include "actdiag/common.hpp"
#include "actdiag/corpus.hpp"
#include "actdiag/metrics.hpp"

namespace actdiag::temporal {

inline const std::vector<double> kDefaultFractions = {0, 0.01, 0.02, 0.04, 0.08, 0.16};

// Odd moving-average width in frames for a window of `fraction * duration`.
std::size_t window_frames(double fraction, double duration, double frame_period);

// Centered moving average per class; near the ends the average runs over the
// frames available. Fraction 0 returns an exact copy.
corpus::FramePredictions smooth_predictions(const corpus::FramePredictions& preds,
                                            double duration, double window_fraction);

struct SweepResult {
  std::vector<double> fractions;
  std::vector<double> localization_map;
  std::vector<double> classification_map;
  double best_fraction = 0.0;  // by localization mAP; first of equals
  std::vector<double> best_relative_change;  // per class, vs unsmoothed AP
};

SweepResult smoothing_sweep(std::span<const corpus::FramePredictions> frames,
                            std::span<const corpus::VideoAnnotation> annotations,
                            const corpus::Vocabulary& vocab,
                            std::span<const double> fractions = kDefaultFractions,
                            const metrics::Sampling& sampling = {},
                            const metrics::EvalOptions& options = {});

struct ContextBenefit {
  double margin = 0.0;
  std::vector<std::size_t> counts;  // per class a: classes b raising a's mean score
  Matrix difference;  // (a, b): mean score of a with b present minus without; masked if a side is empty
};

ContextBenefit context_benefit(std::span<const corpus::VideoPredictions> preds,
                               std::span<const corpus::VideoAnnotation> annotations,
                               const corpus::Vocabulary& vocab, double margin = 0.0);

// Entry (a, b): fraction of grid cells labeled a that are also labeled b.
// Diagonal and rows of classes without cells are masked.
Matrix overlap_stats(std::span<const corpus::VideoAnnotation> train,
                     const corpus::Vocabulary& vocab, double grid_step = 0.1);

// `fraction,loc_map,cls_map`
void write_sweep(std::ostream& out, const SweepResult& sweep);
// `class_id,count`
void write_benefit(std::ostream& out, const ContextBenefit& benefit,
                   const corpus::Vocabulary& vocab);

}  // namespace actdiag::temporal

#endif  // ACTDIAG_TEMPORAL_HPP_
