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

#include "actdiag/boundary.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <ostream>
#include <unordered_map>

namespace actdiag::boundary {

using metrics::Interval;

BoundaryRegion boundary_region(const corpus::ActivityInstance& instance, double duration,
                               double alpha_fraction) {
  const double alpha = (instance.end - instance.start) * alpha_fraction;
  auto clip = [&](double lo, double hi) {
    return Interval{std::clamp(lo, 0.0, duration), std::clamp(hi, 0.0, duration)};
  };
  return {{clip(instance.start - alpha, instance.start + alpha),
           clip(instance.end - alpha, instance.end + alpha)}};
}

namespace {

double inside_boundary(Interval x, const BoundaryRegion& b) {
  return metrics::overlap_length(x, b.parts[0]) + metrics::overlap_length(x, b.parts[1]);
}

}  // namespace

double boundary_excluded_iou(Interval reference, Interval other, const BoundaryRegion& ignore) {
  const Interval inter{std::max(reference.start, other.start), std::min(reference.end, other.end)};
  const double inter_len = std::max(0.0, inter.length());
  const double inter_b = inter_len > 0.0 ? inside_boundary(inter, ignore) : 0.0;
  const double union_len = reference.length() + other.length() - inter_len;
  const double union_b =
      inside_boundary(reference, ignore) + inside_boundary(other, ignore) - inter_b;
  const double num = inter_len - inter_b;
  const double den = union_len - union_b;
  if (den <= 1e-12) return kMasked;
  return std::clamp(num / den, 0.0, 1.0);
}

double center_coverage(Interval reference, Interval other) {
  const double third = reference.length() / 3.0;
  const Interval center{reference.start + third, reference.end - third};
  if (center.length() <= 0.0) return 0.0;
  return metrics::overlap_length(center, other) / center.length();
}

AgreementResult agreement(std::span<const corpus::VideoAnnotation> reference,
                          std::span<const corpus::VideoAnnotation> reannotation,
                          const AgreementOptions& options) {
  std::unordered_map<std::string, const corpus::VideoAnnotation*> rean_by_id;
  for (const auto& v : reannotation) rean_by_id.emplace(v.video_id, &v);

  AgreementResult result;
  auto& records = result.records;
  for (const auto& ref : reference) {
    const auto it = rean_by_id.find(ref.video_id);
    if (it == rean_by_id.end()) continue;
    const auto& other = *it->second;
    std::map<std::size_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
    for (std::size_t i = 0; i < ref.instances.size(); ++i) {
      groups[ref.instances[i].category].first.push_back(i);
    }
    for (std::size_t i = 0; i < other.instances.size(); ++i) {
      groups[other.instances[i].category].second.push_back(i);
    }
    for (const auto& [category, sides] : groups) {
      const auto& [refs, reans] = sides;
      std::vector<bool> ref_used(refs.size(), false), rean_used(reans.size(), false);
      const std::size_t pairs = std::min(refs.size(), reans.size());
      for (std::size_t k = 0; k < pairs; ++k) {
        double best = -1.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < refs.size(); ++i) {
          if (ref_used[i]) continue;
          const auto& a = ref.instances[refs[i]];
          for (std::size_t j = 0; j < reans.size(); ++j) {
            if (rean_used[j]) continue;
            const auto& b = other.instances[reans[j]];
            const double iou = metrics::interval_iou({a.start, a.end}, {b.start, b.end});
            if (iou > best) {
              best = iou;
              bi = i;
              bj = j;
            }
          }
        }
        ref_used[bi] = rean_used[bj] = true;
        const auto& a = ref.instances[refs[bi]];
        const auto& b = other.instances[reans[bj]];
        AgreementRecord r;
        r.video_id = ref.video_id;
        r.category = category;
        r.reference_length = a.length();
        r.iou = best;
        r.boundary_excluded_iou = boundary_excluded_iou({a.start, a.end}, {b.start, b.end},
                                                        boundary_region(a, ref.duration));
        r.start_error = std::abs(a.start - b.start);
        r.end_error = std::abs(a.end - b.end);
        r.center_covered = center_coverage({a.start, a.end}, {b.start, b.end});
        records.push_back(r);
      }
      for (std::size_t i = 0; i < refs.size(); ++i) {
        if (ref_used[i]) continue;
        AgreementRecord r;
        r.video_id = ref.video_id;
        r.category = category;
        r.status = MatchStatus::kUnmatchedReference;
        r.reference_length = ref.instances[refs[i]].length();
        records.push_back(r);
      }
      for (std::size_t j = 0; j < reans.size(); ++j) {
        if (rean_used[j]) continue;
        AgreementRecord r;
        r.video_id = ref.video_id;
        r.category = category;
        r.status = MatchStatus::kUnmatchedReannotation;
        records.push_back(r);
      }
    }
  }

  auto& s = result.summary;
  std::vector<double> iou, nb_iou, start_err, end_err, center;
  std::vector<double> with_ref_iou, with_ref_len, matched_start, matched_len;
  std::map<std::string, std::vector<double>> by_video;
  std::map<std::size_t, std::vector<double>> by_category;
  std::size_t over_half = 0;
  for (const auto& r : records) {
    iou.push_back(r.iou);
    nb_iou.push_back(r.boundary_excluded_iou);
    center.push_back(r.center_covered);
    by_video[r.video_id].push_back(r.iou);
    by_category[r.category].push_back(r.iou);
    if (r.iou > 0.5) ++over_half;
    switch (r.status) {
      case MatchStatus::kMatched:
        ++s.matched;
        start_err.push_back(r.start_error);
        end_err.push_back(r.end_error);
        matched_start.push_back(r.start_error);
        matched_len.push_back(r.reference_length);
        with_ref_iou.push_back(r.iou);
        with_ref_len.push_back(r.reference_length);
        break;
      case MatchStatus::kUnmatchedReference:
        ++s.unmatched_reference;
        with_ref_iou.push_back(r.iou);
        with_ref_len.push_back(r.reference_length);
        break;
      case MatchStatus::kUnmatchedReannotation:
        ++s.unmatched_reannotation;
        break;
    }
  }
  s.iou = stats::summarize(iou);
  s.boundary_excluded_iou = stats::summarize(nb_iou);
  s.start_error = stats::summarize(start_err);
  s.end_error = stats::summarize(end_err);
  s.center_covered = stats::summarize(center);
  if (!records.empty()) {
    s.fraction_over_half = static_cast<double>(over_half) / static_cast<double>(records.size());
    std::vector<double> video_means, category_means;
    for (const auto& [id, v] : by_video) video_means.push_back(stats::summarize(v).mean);
    for (const auto& [c, v] : by_category) category_means.push_back(stats::summarize(v).mean);
    s.per_video_mean_iou = stats::summarize(video_means).mean;
    s.category_iou_std = stats::summarize(category_means).std;
  }
  auto correlate = [&](const std::vector<double>& x, const std::vector<double>& y,
                       std::uint64_t stream) -> std::optional<stats::CorrelationResult> {
    try {
      return stats::pearson(x, y, options.permutations, mix_seed(options.seed, stream),
                            options.workers);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  s.iou_vs_length = correlate(with_ref_iou, with_ref_len, 1);
  s.start_error_vs_length = correlate(matched_start, matched_len, 2);
  return result;
}

void write_agreement(std::ostream& out, const AgreementResult& result,
                     const corpus::Vocabulary& vocab) {
  out << "video_id,class_id,iou,iou_noboundary,start_err,end_err,center_cov\n";
  for (const auto& r : result.records) {
    out << r.video_id << ',' << vocab[r.category].id << ',' << format_double(r.iou) << ','
        << format_double(r.boundary_excluded_iou) << ',' << format_double(r.start_error) << ','
        << format_double(r.end_error) << ',' << format_double(r.center_covered) << '\n';
  }
}

bool in_boundary(const corpus::VideoAnnotation& video, std::size_t category, double t,
                 double alpha_fraction) {
  for (const auto& inst : video.instances) {
    if (inst.category != category) continue;
    if (boundary_region(inst, video.duration, alpha_fraction).contains(t)) return true;
  }
  return false;
}

metrics::ItemFilter boundary_filter(const metrics::LocalizationGrid& grid, double alpha_fraction) {
  // Precompute the excluded (item, class) cells once.
  const auto items = grid.items();
  const std::size_t num_classes = grid.num_classes();
  auto excluded = std::make_shared<std::vector<std::uint8_t>>(items.size() * num_classes, 0);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& video = grid.annotations()[items[i].video];
    for (const auto& inst : video.instances) {
      if (boundary_region(inst, video.duration, alpha_fraction).contains(items[i].time)) {
        (*excluded)[i * num_classes + inst.category] = 1;
      }
    }
  }
  return [excluded, num_classes](std::size_t item, std::size_t cls) {
    return (*excluded)[item * num_classes + cls] == 0;
  };
}

metrics::EvalResult boundary_excluded_eval(std::span<const corpus::FramePredictions> frames,
                                           std::span<const corpus::VideoAnnotation> annotations,
                                           const corpus::Vocabulary& vocab,
                                           const metrics::Sampling& sampling,
                                           const metrics::EvalOptions& options) {
  const metrics::LocalizationGrid grid(frames, annotations, vocab, sampling);
  return metrics::evaluate_grid(grid, boundary_filter(grid), options);
}

std::vector<corpus::FramePredictions> perfect_classifier_frames(
    std::span<const corpus::VideoAnnotation> annotations, const corpus::Vocabulary& vocab,
    const metrics::Sampling& sampling) {
  std::vector<corpus::FramePredictions> out;
  out.reserve(annotations.size());
  for (const auto& video : annotations) {
    corpus::FramePredictions fp;
    fp.video_id = video.video_id;
    fp.num_classes = vocab.size();
    fp.frame_times = sampling.times(video.duration);
    std::vector<double> row(vocab.size(), 0.0);
    for (const auto& inst : video.instances) row[inst.category] = 1.0;
    for (std::size_t f = 0; f < fp.frame_times.size(); ++f) {
      fp.scores.insert(fp.scores.end(), row.begin(), row.end());
    }
    out.push_back(std::move(fp));
  }
  return out;
}

metrics::EvalResult perfect_classifier_localization(
    std::span<const corpus::VideoAnnotation> annotations, const corpus::Vocabulary& vocab,
    const metrics::Sampling& sampling, const metrics::EvalOptions& options) {
  const auto frames = perfect_classifier_frames(annotations, vocab, sampling);
  return metrics::localization_map(frames, annotations, vocab, sampling, options);
}

}  // namespace actdiag::boundary
