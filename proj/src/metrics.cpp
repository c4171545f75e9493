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

#include "actdiag/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace actdiag::metrics {

double overlap_length(Interval a, Interval b) {
  return std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

double interval_iou(Interval a, Interval b) {
  if (!(a.start < a.end) || !(b.start < b.end)) {
    throw Error("interval_iou: degenerate interval (start >= end)");
  }
  const double inter = overlap_length(a, b);
  const double uni = a.length() + b.length() - inter;
  return inter / uni;
}

double normalized_precision(double recall, double fp_rate, NormalizationConstants k) {
  const double tp = recall * k.n_pos;
  const double fp = fp_rate * k.n_neg;
  if (tp + fp <= 0.0) return 0.0;
  return tp / (tp + fp);
}

RankedList::RankedList(std::vector<RankedEntry> entries) : entries_(std::move(entries)) {
  std::stable_sort(entries_.begin(), entries_.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return !a.positive && b.positive;
  });
  for (const auto& e : entries_) {
    (e.positive ? positives_ : negatives_) += e.weight;
  }
}

std::optional<double> normalized_ap(const RankedList& ranked, NormalizationConstants k) {
  const double total_pos = ranked.positives();
  const double total_neg = ranked.negatives();
  if (total_pos <= 0.0) return std::nullopt;
  double tp = 0.0, fp = 0.0, sum = 0.0;
  for (const auto& e : ranked.entries()) {
    if (!e.positive) {
      fp += e.weight;
      continue;
    }
    const double fp_rate = total_neg > 0.0 ? fp / total_neg : 0.0;
    for (std::uint32_t j = 0; j < e.weight; ++j) {
      tp += 1.0;
      sum += normalized_precision(tp / total_pos, fp_rate, k);
    }
  }
  return sum / total_pos;
}

std::size_t EvalResult::evaluated_classes() const {
  return static_cast<std::size_t>(std::count(class_mask.begin(), class_mask.end(), true));
}

EvalResult evaluate_lists(const std::vector<RankedList>& lists, const EvalOptions& options) {
  const std::size_t n = lists.size();
  EvalResult result;
  result.per_class_ap.assign(n, kMasked);
  result.class_mask.assign(n, false);
  result.n_pos.resize(n);
  result.n_neg.resize(n);
  double sum_pos = 0.0, sum_neg = 0.0;
  std::size_t evaluated = 0;
  for (std::size_t c = 0; c < n; ++c) {
    result.n_pos[c] = lists[c].positives();
    result.n_neg[c] = lists[c].negatives();
    if (result.n_pos[c] > 0.0) {
      result.class_mask[c] = true;
      sum_pos += result.n_pos[c];
      sum_neg += result.n_neg[c];
      ++evaluated;
    }
  }
  if (options.constants) {
    result.constants = *options.constants;
  } else if (evaluated > 0) {
    result.constants = {sum_pos / static_cast<double>(evaluated),
                        sum_neg / static_cast<double>(evaluated)};
  }
  parallel_for(n, options.workers, [&](std::size_t c) {
    if (!result.class_mask[c]) return;
    result.per_class_ap[c] = *normalized_ap(lists[c], result.constants);
  });
  if (evaluated > 0) {
    double total = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (result.class_mask[c]) total += result.per_class_ap[c];
    }
    result.mean_ap = total / static_cast<double>(evaluated);
  }
  return result;
}

namespace {

template <class T>
std::unordered_map<std::string, const T*> index_by_id(std::span<const T> items) {
  std::unordered_map<std::string, const T*> out;
  out.reserve(items.size());
  for (const auto& item : items) out.emplace(item.video_id, &item);
  return out;
}

[[noreturn]] void throw_missing(const std::vector<std::string>& missing, const char* what) {
  std::string msg = std::string("missing ") + what + " for " + std::to_string(missing.size()) +
                    " annotated video(s):";
  for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
  if (missing.size() > 20) msg += " ...";
  throw Error(msg);
}

}  // namespace

EvalResult classification_map(std::span<const corpus::VideoPredictions> preds,
                              std::span<const corpus::VideoAnnotation> annotations,
                              const corpus::Vocabulary& vocab, const EvalOptions& options) {
  const auto by_id = index_by_id(preds);
  const std::size_t num_classes = vocab.size();
  std::vector<const corpus::VideoPredictions*> rows;
  std::vector<std::string> missing;
  for (const auto& video : annotations) {
    const auto it = by_id.find(video.video_id);
    if (it == by_id.end()) {
      missing.push_back(video.video_id);
      continue;
    }
    if (it->second->scores.size() != num_classes) {
      throw Error("prediction for '" + video.video_id + "' has the wrong width");
    }
    rows.push_back(it->second);
  }
  if (!missing.empty()) throw_missing(missing, "video predictions");

  std::vector<std::vector<std::uint8_t>> present(annotations.size(),
                                                 std::vector<std::uint8_t>(num_classes, 0));
  for (std::size_t v = 0; v < annotations.size(); ++v) {
    for (const auto& inst : annotations[v].instances) present[v][inst.category] = 1;
  }
  std::vector<RankedList> lists(num_classes);
  parallel_for(num_classes, options.workers, [&](std::size_t c) {
    std::vector<RankedEntry> entries;
    entries.reserve(annotations.size());
    for (std::size_t v = 0; v < annotations.size(); ++v) {
      entries.push_back({rows[v]->scores[c], present[v][c] != 0, 1});
    }
    lists[c] = RankedList(std::move(entries));
  });
  return evaluate_lists(lists, options);
}

std::vector<double> Sampling::times(double duration) const {
  std::vector<double> out(frames_per_video);
  if (frames_per_video == 1) {
    out[0] = duration / 2.0;
    return out;
  }
  const double denom = static_cast<double>(frames_per_video - 1);
  for (std::size_t i = 0; i < frames_per_video; ++i) {
    out[i] = duration * static_cast<double>(i) / denom;
  }
  return out;
}

std::vector<double> midpoint_grid(double duration, double step) {
  if (!(step > 0.0)) throw Error("grid step must be positive");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * step;
    if (t >= duration) break;
    out.push_back(t);
  }
  return out;
}

LocalizationGrid::LocalizationGrid(std::span<const corpus::FramePredictions> frames,
                                   std::span<const corpus::VideoAnnotation> annotations,
                                   const corpus::Vocabulary& vocab, const Sampling& sampling)
    : annotations_(annotations), num_classes_(vocab.size()) {
  if (sampling.frames_per_video == 0) throw Error("sampling needs at least one frame per video");
  const auto by_id = index_by_id(frames);
  std::vector<std::string> missing;
  for (const auto& video : annotations) {
    if (!by_id.count(video.video_id)) missing.push_back(video.video_id);
  }
  if (!missing.empty()) throw_missing(missing, "frame predictions");

  items_.reserve(annotations.size() * sampling.frames_per_video);
  labels_.reserve(annotations.size() * sampling.frames_per_video * num_classes_);
  for (std::size_t v = 0; v < annotations.size(); ++v) {
    const auto& video = annotations[v];
    const auto* fp = by_id.at(video.video_id);
    if (fp->num_classes != num_classes_) {
      throw Error("frame predictions for '" + video.video_id + "' have the wrong width");
    }
    for (double t : sampling.times(video.duration)) {
      const auto frame = fp->nearest_frame(t);
      if (!frame) {
        throw CoverageError("no predicted frame within one frame period of t=" +
                            format_double(t) + "s in video '" + video.video_id + "'");
      }
      items_.push_back({v, t, fp->row(*frame).data()});
      const std::size_t base = labels_.size();
      labels_.resize(base + num_classes_, 0);
      for (const auto& inst : video.instances) {
        if (inst.contains(t)) labels_[base + inst.category] = 1;
      }
    }
  }
}

std::vector<std::vector<std::size_t>> class_items(const LocalizationGrid& grid,
                                                  const ItemFilter& keep) {
  const std::size_t n_items = grid.items().size();
  std::vector<std::vector<std::size_t>> out(grid.num_classes());
  for (std::size_t c = 0; c < grid.num_classes(); ++c) {
    auto& list = out[c];
    list.reserve(n_items);
    for (std::size_t i = 0; i < n_items; ++i) {
      if (!keep || keep(i, c)) list.push_back(i);
    }
  }
  return out;
}

EvalResult evaluate_grid(const LocalizationGrid& grid, const ItemFilter& keep,
                         const EvalOptions& options) {
  const auto items = grid.items();
  std::vector<RankedList> lists(grid.num_classes());
  parallel_for(grid.num_classes(), options.workers, [&](std::size_t c) {
    std::vector<RankedEntry> entries;
    entries.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (keep && !keep(i, c)) continue;
      entries.push_back({items[i].scores[c], grid.positive(i, c), 1});
    }
    lists[c] = RankedList(std::move(entries));
  });
  return evaluate_lists(lists, options);
}

EvalResult localization_map(std::span<const corpus::FramePredictions> frames,
                            std::span<const corpus::VideoAnnotation> annotations,
                            const corpus::Vocabulary& vocab, const Sampling& sampling,
                            const EvalOptions& options) {
  const LocalizationGrid grid(frames, annotations, vocab, sampling);
  return evaluate_grid(grid, nullptr, options);
}

WeightedClassificationMap::WeightedClassificationMap(
    std::span<const corpus::VideoPredictions> preds,
    std::span<const corpus::VideoAnnotation> videos, const corpus::Vocabulary& vocab)
    : unit_count_(videos.size()), classes_(vocab.size()) {
  const auto by_id = index_by_id(preds);
  std::vector<const corpus::VideoPredictions*> rows;
  std::vector<std::string> missing;
  for (const auto& v : videos) {
    const auto it = by_id.find(v.video_id);
    if (it == by_id.end()) {
      missing.push_back(v.video_id);
    } else {
      rows.push_back(it->second);
    }
  }
  if (!missing.empty()) throw_missing(missing, "video predictions");
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    auto& cls = classes_[c];
    std::vector<std::uint8_t> present(videos.size(), 0);
    for (std::size_t v = 0; v < videos.size(); ++v) {
      present[v] = videos[v].has_category(c) ? 1 : 0;
      if (present[v]) cls.positives.push_back(static_cast<std::uint32_t>(v));
    }
    cls.order.resize(videos.size());
    std::iota(cls.order.begin(), cls.order.end(), 0u);
    std::stable_sort(cls.order.begin(), cls.order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double sa = rows[a]->scores[c], sb = rows[b]->scores[c];
      if (sa != sb) return sa > sb;
      return !present[a] && present[b];
    });
    cls.is_positive.resize(videos.size());
    for (std::size_t i = 0; i < videos.size(); ++i) cls.is_positive[i] = present[cls.order[i]];
  }
}

std::optional<double> WeightedClassificationMap::operator()(
    std::span<const std::uint32_t> counts) const {
  double total = 0.0;
  for (auto n : counts) total += n;
  std::vector<double> pos(classes_.size(), 0.0);
  double sum_pos = 0.0, sum_neg = 0.0;
  std::size_t evaluated = 0;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    double p = 0.0;
    for (auto v : classes_[c].positives) p += counts[v];
    pos[c] = p;
    if (p > 0.0) {
      sum_pos += p;
      sum_neg += total - p;
      ++evaluated;
    }
  }
  if (evaluated == 0) return std::nullopt;
  const NormalizationConstants k{sum_pos / static_cast<double>(evaluated),
                                 sum_neg / static_cast<double>(evaluated)};
  double map_sum = 0.0;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const double total_pos = pos[c];
    if (total_pos <= 0.0) continue;
    const double total_neg = total - total_pos;
    const auto& cls = classes_[c];
    double tp = 0.0, fp = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < cls.order.size(); ++i) {
      const std::uint32_t w = counts[cls.order[i]];
      if (w == 0) continue;
      if (!cls.is_positive[i]) {
        fp += w;
        continue;
      }
      const double fp_rate = total_neg > 0.0 ? fp / total_neg : 0.0;
      for (std::uint32_t j = 0; j < w; ++j) {
        tp += 1.0;
        sum += normalized_precision(tp / total_pos, fp_rate, k);
      }
    }
    map_sum += sum / total_pos;
  }
  return map_sum / static_cast<double>(evaluated);
}

void write_ap_table(std::ostream& out, const EvalResult& result, const corpus::Vocabulary& vocab) {
  out << "class_id,ap,n_pos,n_neg\n";
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    out << vocab[c].id << ',' << format_double(result.per_class_ap[c]) << ','
        << format_double(result.n_pos[c]) << ',' << format_double(result.n_neg[c]) << '\n';
  }
}

}  // namespace actdiag::metrics
