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

// Per-category and per-video attributes, and Procrustes pose comparison.

#ifndef ACTDIAG_ATTRIBUTES_HPP_
#define ACTDIAG_ATTRIBUTES_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "actdiag/common.hpp"
#include "actdiag/corpus.hpp"

namespace actdiag::attributes {

// Keypoints at or below this confidence are ignored.
inline constexpr double kConfidenceThreshold = 0.1;

std::size_t confident_keypoints(const corpus::Pose& pose);

// Root-mean-square keypoint residual after the best translation, rotation
// and uniform scale, on centered unit-norm configurations of the keypoints
// confident in both poses. Reflections are not allowed. Throws Error with
// fewer than 2 shared confident keypoints or a degenerate configuration.
double procrustes_distance(const corpus::Pose& a, const corpus::Pose& b);

// Mean distance over all pose pairs, or over `max_pairs` sampled pairs when
// there are more. Pairs without a defined distance are skipped; nullopt when
// no pair remains.
std::optional<double> pose_variability(std::span<const corpus::Pose> poses,
                                       std::size_t max_pairs = 10000, std::uint64_t seed = 0);

// Entry (i, j): mean distance between poses of category i and category j,
// sampled the same way. The diagonal is pose_variability. Masked when
// undefined.
Matrix cross_category_pose_similarity(const std::vector<std::vector<corpus::Pose>>& poses,
                                      std::size_t max_pairs = 10000, std::uint64_t seed = 0,
                                      unsigned workers = 1);

// Poses of auxiliary records falling inside an instance of each category.
std::vector<std::vector<corpus::Pose>> poses_by_category(
    std::span<const corpus::VideoAnnotation> videos,
    std::span<const corpus::AuxiliaryRecord> auxiliary, const corpus::Vocabulary& vocab);

struct CategoryAttributes {
  std::string class_id;
  double train_examples = 0;  // instances
  double train_frames = 0;    // grid cells covered
  double avg_extent = kMasked;
  double object_complexity = 0;  // other categories sharing the object
  double verb_complexity = 0;
  double motion = kMasked;
  double pose_variability = kMasked;
  double overlap_rate = kMasked;  // covered cells also covered by another class
};

struct AttributeOptions {
  double grid_step = 0.1;
  std::size_t max_pairs = 10000;
  std::uint64_t seed = 0;
  bool whole_video_motion = false;  // average motion over whole videos
  unsigned workers = 1;
};

std::vector<CategoryAttributes> category_attributes(
    std::span<const corpus::VideoAnnotation> train,
    std::span<const corpus::AuxiliaryRecord> auxiliary, const corpus::Vocabulary& vocab,
    const AttributeOptions& options = {});

struct VideoAttributes {
  std::string video_id;
  double num_actions = 0;
  double person_size = kMasked;  // mean box height, pixels
  double multi_person = kMasked;  // 1 when any frame has more than one person
  double mean_motion = kMasked;
};

std::vector<VideoAttributes> video_attributes(std::span<const corpus::VideoAnnotation> videos,
                                              std::span<const corpus::AuxiliaryRecord> auxiliary);

void write_category_attributes(std::ostream& out, std::span<const CategoryAttributes> rows);
void write_video_attributes(std::ostream& out, std::span<const VideoAttributes> rows);

}  // namespace actdiag::attributes

#endif  // ACTDIAG_ATTRIBUTES_HPP_
