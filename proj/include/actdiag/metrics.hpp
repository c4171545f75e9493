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

// Interval IOU, normalized precision / AP, and classification and per-frame
// localization mAP.
//
// AP is computed per positive entry in rank order. Entries with equal scores
// are ranked negatives first (pessimistic), then by input order, so results
// are deterministic for any input.
//
// Normalized precision replaces the raw counts in tp / (tp + fp) with fixed
// reference counts:
//   P = R * n_pos / (R * n_pos + F * n_neg)
// where R is recall and F the false positive rate. With n_pos and n_neg equal
// to the list's own counts this is classical precision.

#ifndef ACTDIAG_METRICS_HPP_
#define ACTDIAG_METRICS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "actdiag/common.hpp"
#include "actdiag/corpus.hpp"

namespace actdiag::metrics {

struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
};

// Length of a ∩ b (0 when disjoint).
double overlap_length(Interval a, Interval b);

// |a ∩ b| / |a ∪ b|. Throws Error on an interval with start >= end.
double interval_iou(Interval a, Interval b);

struct NormalizationConstants {
  double n_pos = 1.0;  // average positives per class
  double n_neg = 1.0;  // average negatives per class
};

// R = F = 0 yields 0.
double normalized_precision(double recall, double fp_rate, NormalizationConstants k);

struct RankedEntry {
  double score = 0.0;
  bool positive = false;
  std::uint32_t weight = 1;  // multiplicity; a weight-w entry equals w copies
};

class RankedList {
 public:
  RankedList() = default;
  explicit RankedList(std::vector<RankedEntry> entries);

  std::span<const RankedEntry> entries() const { return entries_; }
  double positives() const { return positives_; }
  double negatives() const { return negatives_; }

 private:
  std::vector<RankedEntry> entries_;
  double positives_ = 0.0;
  double negatives_ = 0.0;
};

// Mean over positive entries of the normalized precision at that entry's
// rank; nullopt when the list holds no positives.
std::optional<double> normalized_ap(const RankedList& ranked, NormalizationConstants k);

struct EvalResult {
  std::vector<double> per_class_ap;  // kMasked where the class has no positive
  std::vector<bool> class_mask;      // true where the class was evaluated
  std::vector<double> n_pos;         // actual positives per class
  std::vector<double> n_neg;         // actual negatives per class
  NormalizationConstants constants;
  double mean_ap = kMasked;

  std::size_t evaluated_classes() const;
};

struct EvalOptions {
  // Fixed reference counts; when empty, averages over the evaluated classes of
  // the subset being scored.
  std::optional<NormalizationConstants> constants;
  unsigned workers = 1;
};

// Applies normalized_ap to one ranked list per class.
EvalResult evaluate_lists(const std::vector<RankedList>& lists, const EvalOptions& options = {});

// Video-level mAP: a video is positive for a class iff it holds any instance of
// it. Throws Error listing annotated videos without predictions.
EvalResult classification_map(std::span<const corpus::VideoPredictions> preds,
                              std::span<const corpus::VideoAnnotation> annotations,
                              const corpus::Vocabulary& vocab, const EvalOptions& options = {});

struct Sampling {
  std::size_t frames_per_video = 25;

  // frames_per_video equally spaced times covering [0, duration].
  std::vector<double> times(double duration) const;
};

// Cell midpoints (i + 0.5) * step of a fixed grid over [0, duration).
std::vector<double> midpoint_grid(double duration, double step);

// Evaluation items for per-frame localization: every (video, sampled time)
// pair, resolved to the nearest predicted frame.
class LocalizationGrid {
 public:
  struct Item {
    std::size_t video = 0;  // index into annotations()
    double time = 0.0;
    const double* scores = nullptr;  // num_classes() values
  };

  // Throws Error when an annotated video has no frame predictions and
  // CoverageError when a sampled time is farther than one frame period from
  // every predicted frame. `frames` must outlive the grid.
  LocalizationGrid(std::span<const corpus::FramePredictions> frames,
                   std::span<const corpus::VideoAnnotation> annotations,
                   const corpus::Vocabulary& vocab, const Sampling& sampling);

  std::span<const Item> items() const { return items_; }
  std::size_t num_classes() const { return num_classes_; }
  std::span<const corpus::VideoAnnotation> annotations() const { return annotations_; }
  bool positive(std::size_t item, std::size_t cls) const {
    return labels_[item * num_classes_ + cls] != 0;
  }

 private:
  std::span<const corpus::VideoAnnotation> annotations_;
  std::size_t num_classes_ = 0;
  std::vector<Item> items_;
  std::vector<std::uint8_t> labels_;
};

// Returns false to drop an (item, class) pair from that class's list.
using ItemFilter = std::function<bool(std::size_t item, std::size_t cls)>;

// Item indices entering each class's ranked list under `keep`.
std::vector<std::vector<std::size_t>> class_items(const LocalizationGrid& grid,
                                                  const ItemFilter& keep = nullptr);

EvalResult evaluate_grid(const LocalizationGrid& grid, const ItemFilter& keep = nullptr,
                         const EvalOptions& options = {});

EvalResult localization_map(std::span<const corpus::FramePredictions> frames,
                            std::span<const corpus::VideoAnnotation> annotations,
                            const corpus::Vocabulary& vocab, const Sampling& sampling = {},
                            const EvalOptions& options = {});

// Classification mAP over a fixed set of videos where each video carries a
// multiplicity, as produced by bootstrap resampling. Rankings are sorted once
// at construction; each call is linear in the number of videos.
class WeightedClassificationMap {
 public:
  WeightedClassificationMap(std::span<const corpus::VideoPredictions> preds,
                            std::span<const corpus::VideoAnnotation> videos,
                            const corpus::Vocabulary& vocab);

  std::size_t unit_count() const { return unit_count_; }

  // mAP with normalization constants recomputed from the weighted subset;
  // nullopt when no class has a positive.
  std::optional<double> operator()(std::span<const std::uint32_t> counts) const;

 private:
  struct ClassOrder {
    std::vector<std::uint32_t> order;       // videos, best score first
    std::vector<std::uint32_t> positives;   // positive videos
    std::vector<std::uint8_t> is_positive;  // aligned with order
  };
  std::size_t unit_count_ = 0;
  std::vector<ClassOrder> classes_;
};

// Writes `class_id,ap,n_pos,n_neg`.
void write_ap_table(std::ostream& out, const EvalResult& result, const corpus::Vocabulary& vocab);

}  // namespace actdiag::metrics

#endif  // ACTDIAG_METRICS_HPP_
