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

// Temporal boundary ambiguity: boundary regions around instance endpoints,
// annotator agreement, boundary-excluded localization, and the localization
// score of a perfect video classifier.
//
// For an instance [t1, t2] the boundary region is
//   [t1 - a, t1 + a] ∪ [t2 - a, t2 + a],  a = (t2 - t1) / 3,
// clipped to the video.

#ifndef ACTDIAG_BOUNDARY_HPP_
#define ACTDIAG_BOUNDARY_HPP_

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "actdiag/corpus.hpp"
#include "actdiag/metrics.hpp"
#include "actdiag/stats.hpp"

namespace actdiag::boundary {

inline constexpr double kDefaultAlphaFraction = 1.0 / 3.0;

struct BoundaryRegion {
  std::array<metrics::Interval, 2> parts;

  bool contains(double t) const {
    return (t >= parts[0].start && t <= parts[0].end) ||
           (t >= parts[1].start && t <= parts[1].end);
  }
  double width() const { return parts[0].length() + parts[1].length(); }
};

// `alpha_fraction` scales the half-width relative to the instance length;
// 0 collapses the region to the two endpoints.
BoundaryRegion boundary_region(const corpus::ActivityInstance& instance, double duration,
                               double alpha_fraction = kDefaultAlphaFraction);

// IOU of two intervals measured only outside `ignore`, in both the
// intersection and the union.
double boundary_excluded_iou(metrics::Interval reference, metrics::Interval other,
                             const BoundaryRegion& ignore);

// Fraction of the middle third of `reference` covered by `other`.
double center_coverage(metrics::Interval reference, metrics::Interval other);

enum class MatchStatus { kMatched, kUnmatchedReference, kUnmatchedReannotation };

struct AgreementRecord {
  std::string video_id;
  std::size_t category = 0;
  MatchStatus status = MatchStatus::kMatched;
  double reference_length = kMasked;  // seconds; masked for extra reannotations
  double iou = 0.0;
  double boundary_excluded_iou = 0.0;
  double start_error = kMasked;  // seconds; masked when unmatched
  double end_error = kMasked;
  double center_covered = 0.0;
};

struct AgreementSummary {
  stats::Summary iou;  // per instance, unmatched counted as 0
  stats::Summary boundary_excluded_iou;
  stats::Summary start_error;  // matched pairs only
  stats::Summary end_error;
  stats::Summary center_covered;
  double per_video_mean_iou = kMasked;  // mean of per-video mean IOU
  double fraction_over_half = kMasked;  // fraction of records with IOU > 0.5
  double category_iou_std = kMasked;    // std of per-category mean IOU
  std::size_t matched = 0;
  std::size_t unmatched_reference = 0;
  std::size_t unmatched_reannotation = 0;
  std::optional<stats::CorrelationResult> iou_vs_length;
  std::optional<stats::CorrelationResult> start_error_vs_length;
};

struct AgreementOptions {
  std::size_t permutations = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct AgreementResult {
  std::vector<AgreementRecord> records;
  AgreementSummary summary;
};

// Compares every video present in both sets. Same-category instances are
// paired greedily by decreasing IOU; leftovers on either side become
// unmatched records with IOU 0.
AgreementResult agreement(std::span<const corpus::VideoAnnotation> reference,
                          std::span<const corpus::VideoAnnotation> reannotation,
                          const AgreementOptions& options = {});

// Writes `video_id,class_id,iou,iou_noboundary,start_err,end_err,center_cov`.
void write_agreement(std::ostream& out, const AgreementResult& result,
                     const corpus::Vocabulary& vocab);

// True when t falls inside the boundary region of an instance of `category`.
bool in_boundary(const corpus::VideoAnnotation& video, std::size_t category, double t,
                 double alpha_fraction = kDefaultAlphaFraction);

// Keeps (item, class) pairs outside every same-class boundary region.
metrics::ItemFilter boundary_filter(const metrics::LocalizationGrid& grid,
                                    double alpha_fraction = kDefaultAlphaFraction);

metrics::EvalResult boundary_excluded_eval(std::span<const corpus::FramePredictions> frames,
                                           std::span<const corpus::VideoAnnotation> annotations,
                                           const corpus::Vocabulary& vocab,
                                           const metrics::Sampling& sampling = {},
                                           const metrics::EvalOptions& options = {});

// Frame predictions of a perfect video classifier: 1 for every class present
// in the video, 0 otherwise, at every sampled time.
std::vector<corpus::FramePredictions> perfect_classifier_frames(
    std::span<const corpus::VideoAnnotation> annotations, const corpus::Vocabulary& vocab,
    const metrics::Sampling& sampling);

metrics::EvalResult perfect_classifier_localization(
    std::span<const corpus::VideoAnnotation> annotations, const corpus::Vocabulary& vocab,
    const metrics::Sampling& sampling = {}, const metrics::EvalOptions& options = {});

}  // namespace actdiag::boundary

#endif  // ACTDIAG_BOUNDARY_HPP_
