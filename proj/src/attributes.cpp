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

#include "actdiag/attributes.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <unordered_map>

#include "actdiag/metrics.hpp"
#include "actdiag/stats.hpp"

namespace actdiag::attributes {

using corpus::AuxiliaryRecord;
using corpus::Pose;

std::size_t confident_keypoints(const Pose& pose) {
  std::size_t n = 0;
  for (const auto& k : pose.keypoints) {
    if (k.confidence > kConfidenceThreshold) ++n;
  }
  return n;
}

namespace {

// Centers and scales to unit Frobenius norm; false when all points coincide.
bool normalize(std::vector<double>& x, std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cx += x[i];
    cy += y[i];
  }
  cx /= m;
  cy /= m;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] -= cx;
    y[i] -= cy;
    ss += x[i] * x[i] + y[i] * y[i];
  }
  const double norm = std::sqrt(ss);
  if (!(norm > 1e-12)) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] /= norm;
    y[i] /= norm;
  }
  return true;
}

std::optional<double> try_procrustes(const Pose& a, const Pose& b) {
  if (a.keypoints.size() != b.keypoints.size()) return std::nullopt;
  std::vector<double> xa, ya, xb, yb;
  for (std::size_t i = 0; i < a.keypoints.size(); ++i) {
    const auto& ka = a.keypoints[i];
    const auto& kb = b.keypoints[i];
    if (ka.confidence > kConfidenceThreshold && kb.confidence > kConfidenceThreshold) {
      xa.push_back(ka.x);
      ya.push_back(ka.y);
      xb.push_back(kb.x);
      yb.push_back(kb.y);
    }
  }
  if (xa.size() < 2) return std::nullopt;
  if (!normalize(xa, ya) || !normalize(xb, yb)) return std::nullopt;
  // In complex form the best rotation + scale of q onto p is z = <q, p>.
  // Summing the residuals directly avoids the cancellation in 1 - |z|^2, and
  // averaging both directions keeps the result exactly symmetric.
  auto residual = [](const std::vector<double>& px, const std::vector<double>& py,
                     const std::vector<double>& qx, const std::vector<double>& qy) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      re += qx[i] * px[i] + qy[i] * py[i];
      im += qx[i] * py[i] - qy[i] * px[i];
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double dx = px[i] - (re * qx[i] - im * qy[i]);
      const double dy = py[i] - (re * qy[i] + im * qx[i]);
      ss += dx * dx + dy * dy;
    }
    return ss;
  };
  const double ss = 0.5 * (residual(xa, ya, xb, yb) + residual(xb, yb, xa, ya));
  return std::sqrt(ss / static_cast<double>(xa.size()));
}

// Mean of dist(i, j) over `total` index pairs, enumerated when total fits in
// max_pairs and sampled with per-draw streams otherwise.
template <class PairAt, class Draw>
std::optional<double> mean_over_pairs(std::size_t total, std::size_t max_pairs,
                                      std::uint64_t seed, PairAt pair_at, Draw draw) {
  double sum = 0.0;
  std::size_t n = 0;
  auto add = [&](std::optional<double> d) {
    if (d) {
      sum += *d;
      ++n;
    }
  };
  if (total <= max_pairs) {
    for (std::size_t p = 0; p < total; ++p) add(pair_at(p));
  } else {
    for (std::size_t p = 0; p < max_pairs; ++p) {
      std::mt19937_64 rng(mix_seed(seed, p));
      add(draw(rng));
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::vector<const Pose*> alignable(std::span<const Pose> poses) {
  std::vector<const Pose*> out;
  for (const auto& p : poses) {
    if (confident_keypoints(p) >= 2) out.push_back(&p);
  }
  return out;
}

std::optional<double> variability(const std::vector<const Pose*>& poses, std::size_t max_pairs,
                                  std::uint64_t seed) {
  const std::size_t n = poses.size();
  if (n < 2) return std::nullopt;
  // Row-major walk over the strict upper triangle.
  std::vector<std::size_t> row_start(n, 0);
  for (std::size_t i = 1; i < n; ++i) row_start[i] = row_start[i - 1] + (n - i);
  const std::size_t total = n * (n - 1) / 2;
  auto pair_at = [&](std::size_t p) {
    const auto it = std::upper_bound(row_start.begin(), row_start.end(), p);
    const auto i = static_cast<std::size_t>(it - row_start.begin()) - 1;
    const std::size_t j = i + 1 + (p - row_start[i]);
    return try_procrustes(*poses[i], *poses[j]);
  };
  auto draw = [&](std::mt19937_64& rng) {
    const std::size_t i = stats::draw_index(rng, n);
    std::size_t j = stats::draw_index(rng, n - 1);
    if (j >= i) ++j;
    return try_procrustes(*poses[i], *poses[j]);
  };
  return mean_over_pairs(total, max_pairs, seed, pair_at, draw);
}

std::optional<double> between(const std::vector<const Pose*>& a,
                              const std::vector<const Pose*>& b, std::size_t max_pairs,
                              std::uint64_t seed) {
  if (a.empty() || b.empty()) return std::nullopt;
  auto pair_at = [&](std::size_t p) {
    return try_procrustes(*a[p / b.size()], *b[p % b.size()]);
  };
  auto draw = [&](std::mt19937_64& rng) {
    const std::size_t i = stats::draw_index(rng, a.size());
    const std::size_t j = stats::draw_index(rng, b.size());
    return try_procrustes(*a[i], *b[j]);
  };
  return mean_over_pairs(a.size() * b.size(), max_pairs, seed, pair_at, draw);
}

std::unordered_map<std::string, std::vector<const AuxiliaryRecord*>> group_by_video(
    std::span<const AuxiliaryRecord> auxiliary) {
  std::unordered_map<std::string, std::vector<const AuxiliaryRecord*>> out;
  for (const auto& r : auxiliary) out[r.video_id].push_back(&r);
  return out;
}

double mean_or_masked(double sum, std::size_t n) {
  return n == 0 ? kMasked : sum / static_cast<double>(n);
}

}  // namespace

double procrustes_distance(const Pose& a, const Pose& b) {
  if (a.keypoints.size() != b.keypoints.size()) {
    throw Error("procrustes: keypoint count mismatch");
  }
  const auto d = try_procrustes(a, b);
  if (!d) throw Error("procrustes: fewer than 2 shared confident keypoints");
  return *d;
}

std::optional<double> pose_variability(std::span<const Pose> poses, std::size_t max_pairs,
                                       std::uint64_t seed) {
  return variability(alignable(poses), max_pairs, seed);
}

Matrix cross_category_pose_similarity(const std::vector<std::vector<Pose>>& poses,
                                      std::size_t max_pairs, std::uint64_t seed,
                                      unsigned workers) {
  const std::size_t c = poses.size();
  std::vector<std::vector<const Pose*>> usable(c);
  for (std::size_t i = 0; i < c; ++i) usable[i] = alignable(poses[i]);
  Matrix out(c, c, kMasked);
  parallel_for(c, workers, [&](std::size_t i) {
    for (std::size_t j = i; j < c; ++j) {
      const auto d = i == j ? variability(usable[i], max_pairs, mix_seed(seed, i))
                            : between(usable[i], usable[j], max_pairs, mix_seed(seed, i, j));
      if (d) out(i, j) = *d;
    }
  });
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < i; ++j) out(i, j) = out(j, i);
  }
  return out;
}

std::vector<std::vector<Pose>> poses_by_category(std::span<const corpus::VideoAnnotation> videos,
                                                 std::span<const AuxiliaryRecord> auxiliary,
                                                 const corpus::Vocabulary& vocab) {
  const auto aux = group_by_video(auxiliary);
  std::vector<std::vector<Pose>> out(vocab.size());
  for (const auto& video : videos) {
    const auto it = aux.find(video.video_id);
    if (it == aux.end()) continue;
    for (const auto* r : it->second) {
      if (!r->pose) continue;
      std::vector<bool> seen(vocab.size(), false);
      for (const auto& inst : video.instances) {
        if (seen[inst.category] || !inst.contains(r->frame_time)) continue;
        seen[inst.category] = true;
        out[inst.category].push_back(*r->pose);
      }
    }
  }
  return out;
}

std::vector<CategoryAttributes> category_attributes(
    std::span<const corpus::VideoAnnotation> train, std::span<const AuxiliaryRecord> auxiliary,
    const corpus::Vocabulary& vocab, const AttributeOptions& options) {
  const std::size_t c = vocab.size();
  std::vector<CategoryAttributes> rows(c);
  std::vector<double> extent_sum(c, 0.0), overlapped(c, 0.0), motion_sum(c, 0.0);
  std::vector<std::size_t> motion_n(c, 0);
  std::vector<std::size_t> object_members(vocab.object_count(), 0);
  std::vector<std::size_t> verb_members(vocab.verb_count(), 0);
  for (std::size_t i = 0; i < c; ++i) {
    ++object_members[vocab.object_of(i)];
    ++verb_members[vocab.verb_of(i)];
  }
  for (std::size_t i = 0; i < c; ++i) {
    rows[i].class_id = vocab[i].id;
    rows[i].object_complexity = static_cast<double>(object_members[vocab.object_of(i)] - 1);
    rows[i].verb_complexity = static_cast<double>(verb_members[vocab.verb_of(i)] - 1);
  }

  const auto aux = group_by_video(auxiliary);
  std::vector<std::size_t> labels;
  for (const auto& video : train) {
    for (const auto& inst : video.instances) {
      rows[inst.category].train_examples += 1;
      extent_sum[inst.category] += inst.length();
    }
    for (double t : metrics::midpoint_grid(video.duration, options.grid_step)) {
      labels.clear();
      for (const auto& inst : video.instances) {
        if (inst.contains(t) &&
            std::find(labels.begin(), labels.end(), inst.category) == labels.end()) {
          labels.push_back(inst.category);
        }
      }
      for (auto l : labels) {
        rows[l].train_frames += 1;
        if (labels.size() > 1) overlapped[l] += 1;
      }
    }
    const auto it = aux.find(video.video_id);
    if (it == aux.end()) continue;
    for (const auto* r : it->second) {
      if (!r->motion) continue;
      for (std::size_t k = 0; k < c; ++k) {
        const bool hit = options.whole_video_motion ? video.has_category(k)
                                                    : video.labeled_at(k, r->frame_time);
        if (hit) {
          motion_sum[k] += *r->motion;
          ++motion_n[k];
        }
      }
    }
  }
  for (std::size_t i = 0; i < c; ++i) {
    if (rows[i].train_examples > 0) rows[i].avg_extent = extent_sum[i] / rows[i].train_examples;
    if (rows[i].train_frames > 0) rows[i].overlap_rate = overlapped[i] / rows[i].train_frames;
    rows[i].motion = mean_or_masked(motion_sum[i], motion_n[i]);
  }

  const auto poses = poses_by_category(train, auxiliary, vocab);
  parallel_for(c, options.workers, [&](std::size_t i) {
    if (const auto v = pose_variability(poses[i], options.max_pairs, mix_seed(options.seed, i))) {
      rows[i].pose_variability = *v;
    }
  });
  return rows;
}

std::vector<VideoAttributes> video_attributes(std::span<const corpus::VideoAnnotation> videos,
                                              std::span<const AuxiliaryRecord> auxiliary) {
  const auto aux = group_by_video(auxiliary);
  std::vector<VideoAttributes> out;
  out.reserve(videos.size());
  for (const auto& video : videos) {
    VideoAttributes row;
    row.video_id = video.video_id;
    row.num_actions = static_cast<double>(video.instances.size());
    const auto it = aux.find(video.video_id);
    if (it != aux.end()) {
      double height = 0.0, motion = 0.0;
      std::size_t boxes = 0, motions = 0, counts = 0;
      bool multi = false;
      for (const auto* r : it->second) {
        if (r->person_box) {
          height += r->person_box->h;
          ++boxes;
        }
        if (r->person_count) {
          ++counts;
          multi = multi || *r->person_count > 1;
        }
        if (r->motion) {
          motion += *r->motion;
          ++motions;
        }
      }
      row.person_size = mean_or_masked(height, boxes);
      row.mean_motion = mean_or_masked(motion, motions);
      if (counts > 0) row.multi_person = multi ? 1.0 : 0.0;
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_category_attributes(std::ostream& out, std::span<const CategoryAttributes> rows) {
  out << "class_id,train_examples,train_frames,avg_extent,object_complexity,verb_complexity,"
         "motion,pose_variability,overlap_rate\n";
  for (const auto& r : rows) {
    out << r.class_id << ',' << format_double(r.train_examples) << ','
        << format_double(r.train_frames) << ',' << format_double(r.avg_extent) << ','
        << format_double(r.object_complexity) << ',' << format_double(r.verb_complexity) << ','
        << format_double(r.motion) << ',' << format_double(r.pose_variability) << ','
        << format_double(r.overlap_rate) << '\n';
  }
}

void write_video_attributes(std::ostream& out, std::span<const VideoAttributes> rows) {
  out << "video_id,num_actions,person_size,multi_person,mean_motion\n";
  for (const auto& r : rows) {
    out << r.video_id << ',' << format_double(r.num_actions) << ','
        << format_double(r.person_size) << ',' << format_double(r.multi_person) << ','
        << format_double(r.mean_motion) << '\n';
  }
}

}  // namespace actdiag::attributes
