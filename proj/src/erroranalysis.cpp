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

#include "actdiag/erroranalysis.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace actdiag::errors {

ErrorType classify_item(const corpus::VideoAnnotation& video, std::size_t cls, double t,
                        const corpus::Vocabulary& vocab, double alpha_fraction) {
  if (video.labeled_at(cls, t)) return ErrorType::kTP;
  if (boundary::in_boundary(video, cls, t, alpha_fraction)) return ErrorType::kBND;
  bool obj = false, vrb = false, other = false;
  for (const auto& inst : video.instances) {
    if (!inst.contains(t)) continue;
    other = true;
    obj = obj || vocab.object_of(inst.category) == vocab.object_of(cls);
    vrb = vrb || vocab.verb_of(inst.category) == vocab.verb_of(cls);
  }
  if (obj) return ErrorType::kOBJ;
  if (vrb) return ErrorType::kVRB;
  if (other) return ErrorType::kOTH;
  return ErrorType::kFP;
}

ErrorBreakdown classify_top_predictions(std::span<const corpus::FramePredictions> frames,
                                        std::span<const corpus::VideoAnnotation> annotations,
                                        const corpus::Vocabulary& vocab,
                                        const metrics::Sampling& sampling,
                                        const ErrorOptions& options) {
  const metrics::LocalizationGrid grid(frames, annotations, vocab, sampling);
  const auto items = grid.items();
  const std::size_t num_classes = vocab.size();
  ErrorBreakdown out;
  out.fractions = Matrix(num_classes, kErrorTypes, kMasked);
  out.top_n.assign(num_classes, 0);
  parallel_for(num_classes, options.workers, [&](std::size_t c) {
    std::size_t n = 0;
    if (options.top_n) {
      n = *options.top_n;
    } else {
      for (std::size_t i = 0; i < items.size(); ++i) n += grid.positive(i, c) ? 1 : 0;
    }
    n = std::min(n, items.size());
    out.top_n[c] = n;
    if (n == 0) return;
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double sa = items[a].scores[c], sb = items[b].scores[c];
                        return sa != sb ? sa > sb : a < b;
                      });
    std::array<std::size_t, kErrorTypes> counts{};
    for (std::size_t r = 0; r < n; ++r) {
      const auto& item = items[order[r]];
      const auto type = classify_item(annotations[item.video], c, item.time, vocab,
                                      options.alpha_fraction);
      ++counts[static_cast<std::size_t>(type)];
    }
    for (std::size_t k = 0; k < kErrorTypes; ++k) {
      out.fractions(c, k) = static_cast<double>(counts[k]) / static_cast<double>(n);
    }
  });
  return out;
}

Matrix cross_confusion(std::span<const corpus::VideoPredictions> preds,
                       std::span<const corpus::VideoAnnotation> annotations,
                       const corpus::Vocabulary& vocab) {
  const std::size_t c = vocab.size();
  std::unordered_map<std::string, const corpus::VideoPredictions*> by_id;
  for (const auto& p : preds) by_id.emplace(p.video_id, &p);
  Matrix sum(c, c, 0.0), count(c, c, 0.0);
  std::vector<std::uint8_t> present(c);
  std::vector<std::size_t> labels;
  for (const auto& video : annotations) {
    const auto it = by_id.find(video.video_id);
    if (it == by_id.end()) throw Error("no video prediction for '" + video.video_id + "'");
    const auto& scores = it->second->scores;
    if (scores.size() != c) throw Error("prediction for '" + video.video_id + "' has the wrong width");
    std::fill(present.begin(), present.end(), 0);
    labels.clear();
    for (const auto& inst : video.instances) {
      if (!present[inst.category]) labels.push_back(inst.category);
      present[inst.category] = 1;
    }
    for (std::size_t a = 0; a < c; ++a) {
      if (present[a]) continue;
      for (auto b : labels) {
        sum(a, b) += scores[a];
        count(a, b) += 1.0;
      }
    }
  }
  Matrix out(c, c, kMasked);
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = 0; b < c; ++b) {
      if (a != b && count(a, b) > 0.0) out(a, b) = sum(a, b) / count(a, b);
    }
  }
  return out;
}

AblationResult ablation_delta(std::span<const corpus::VideoPredictions> first,
                              std::span<const corpus::VideoPredictions> second,
                              std::span<const corpus::VideoAnnotation> annotations,
                              const corpus::Vocabulary& vocab,
                              const metrics::EvalOptions& options) {
  std::set<std::string> ids_first, ids_second;
  for (const auto& p : first) ids_first.insert(p.video_id);
  for (const auto& p : second) ids_second.insert(p.video_id);
  if (ids_first != ids_second) {
    throw Error("prediction sets cover different videos (" + std::to_string(ids_first.size()) +
                " vs " + std::to_string(ids_second.size()) + ")");
  }
  AblationResult r;
  r.first = metrics::classification_map(first, annotations, vocab, options);
  r.second = metrics::classification_map(second, annotations, vocab, options);
  const std::size_t c = vocab.size();
  r.delta.assign(c, kMasked);
  r.relative.assign(c, kMasked);
  for (std::size_t k = 0; k < c; ++k) {
    const double a = r.first.per_class_ap[k], b = r.second.per_class_ap[k];
    if (is_masked(a) || is_masked(b)) continue;
    r.delta[k] = b - a;
    if (a != 0.0) r.relative[k] = (b - a) / a;
    if (!r.largest_gain || r.delta[k] > r.delta[*r.largest_gain]) r.largest_gain = k;
    if (!r.largest_loss || r.delta[k] < r.delta[*r.largest_loss]) r.largest_loss = k;
  }
  return r;
}

void write_breakdown(std::ostream& out, const ErrorBreakdown& breakdown,
                     const corpus::Vocabulary& vocab) {
  out << "class_id";
  for (const char* name : kErrorNames) out << ',' << name;
  out << '\n';
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    out << vocab[c].id;
    for (std::size_t k = 0; k < kErrorTypes; ++k) {
      out << ',' << format_double(breakdown.fractions(c, k));
    }
    out << '\n';
  }
}

void write_class_matrix(std::ostream& out, const Matrix& m, const corpus::Vocabulary& vocab) {
  out << "class_id";
  for (std::size_t c = 0; c < m.cols; ++c) out << ',' << vocab[c].id;
  out << '\n';
  for (std::size_t r = 0; r < m.rows; ++r) {
    out << vocab[r].id;
    for (std::size_t c = 0; c < m.cols; ++c) out << ',' << format_double(m(r, c));
    out << '\n';
  }
}

void write_ablation(std::ostream& out, const AblationResult& result,
                    const corpus::Vocabulary& vocab) {
  out << "class_id,ap_first,ap_second,delta,relative\n";
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    out << vocab[c].id << ',' << format_double(result.first.per_class_ap[c]) << ','
        << format_double(result.second.per_class_ap[c]) << ',' << format_double(result.delta[c])
        << ',' << format_double(result.relative[c]) << '\n';
  }
}

}  // namespace actdiag::errors
