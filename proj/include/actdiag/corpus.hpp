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

// Data model and file formats for vocabularies, annotations, predictions and
// auxiliary per-frame records.
//
// File formats:
//   vocabulary.csv   header `class_id,verb_id,object_id,description`, one
//                    category per line. Optional `#verbs=a,b,...` and
//                    `#objects=a,b,...` lines declare the closed component
//                    sets; without them the sets are inferred.
//   annotations.csv  `video_id,duration_seconds,actions[,dataset]` where
//                    actions is a `;`-joined list of `class_id start end`.
//                    A leading header row starting with `video_id` is skipped.
//   predictions      video mode: `video_id s_1 ... s_C`
//                    frame mode: `video_id frame s_1 ... s_C`, where `frame`
//                    is a time in seconds, or a frame index when the file
//                    carries a `#fps=R` header line.
//   auxiliary.jsonl  one JSON object per line, see AuxiliaryRecord.

#ifndef ACTDIAG_CORPUS_HPP_
#define ACTDIAG_CORPUS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "actdiag/common.hpp"

namespace actdiag::corpus {

struct ActivityCategory {
  std::string id;
  std::string verb_id;
  std::string object_id;
  std::string description;

  bool operator==(const ActivityCategory&) const = default;
};

// Categories sorted by id; that order is the column order of every score
// matrix in the toolkit.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Sorts the categories canonically. Throws Error on duplicate ids or on a
  // component id missing from a non-empty declared set.
  Vocabulary(std::vector<ActivityCategory> categories,
             std::vector<std::string> declared_verbs = {},
             std::vector<std::string> declared_objects = {});

  std::size_t size() const { return categories_.size(); }
  const std::vector<ActivityCategory>& categories() const { return categories_; }
  const ActivityCategory& operator[](std::size_t i) const { return categories_[i]; }

  std::size_t verb_count() const { return verbs_.size(); }
  std::size_t object_count() const { return objects_.size(); }
  const std::vector<std::string>& verbs() const { return verbs_; }
  const std::vector<std::string>& objects() const { return objects_; }

  // Component index of category i into verbs() / objects().
  std::size_t verb_of(std::size_t i) const { return verb_index_[i]; }
  std::size_t object_of(std::size_t i) const { return object_index_[i]; }

  std::optional<std::size_t> index_of(std::string_view id) const;

  bool operator==(const Vocabulary& other) const {
    return categories_ == other.categories_ && verbs_ == other.verbs_ &&
           objects_ == other.objects_;
  }

 private:
  std::vector<ActivityCategory> categories_;
  std::vector<std::string> verbs_;
  std::vector<std::string> objects_;
  std::vector<std::size_t> verb_index_;
  std::vector<std::size_t> object_index_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct ActivityInstance {
  std::size_t category = 0;  // index into the vocabulary
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool contains(double t) const { return t >= start && t <= end; }
  bool operator==(const ActivityInstance&) const = default;
};

struct VideoAnnotation {
  std::string video_id;
  double duration = 0.0;
  std::vector<ActivityInstance> instances;
  std::string dataset;

  // Whether any instance of `category` covers time t (closed intervals).
  bool labeled_at(std::size_t category, double t) const;
  bool has_category(std::size_t category) const;

  bool operator==(const VideoAnnotation&) const = default;
};

// Dense per-frame scores for one video; row-major frames x categories.
struct FramePredictions {
  std::string video_id;
  std::vector<double> frame_times;
  std::size_t num_classes = 0;
  std::vector<double> scores;

  std::size_t frame_count() const { return frame_times.size(); }
  std::span<const double> row(std::size_t f) const {
    return {scores.data() + f * num_classes, num_classes};
  }
  std::span<double> row(std::size_t f) {
    return {scores.data() + f * num_classes, num_classes};
  }
  // Median spacing of consecutive frames; +inf for a single frame.
  double frame_period() const;
  // Nearest frame to t, or nullopt when it is farther than one frame period.
  std::optional<std::size_t> nearest_frame(double t) const;

  bool operator==(const FramePredictions&) const = default;
};

struct VideoPredictions {
  std::string video_id;
  std::vector<double> scores;

  bool operator==(const VideoPredictions&) const = default;
};

enum class PredictionMode { kVideo, kFrame };

struct PredictionSet {
  PredictionMode mode = PredictionMode::kVideo;
  std::vector<VideoPredictions> videos;  // filled in video mode
  std::vector<FramePredictions> frames;  // filled in frame mode

  std::vector<std::string> video_ids() const;
  bool operator==(const PredictionSet&) const = default;
};

struct PersonBox {
  double x = 0, y = 0, w = 0, h = 0;
  bool operator==(const PersonBox&) const = default;
};

struct Keypoint {
  double x = 0, y = 0, confidence = 0;
  bool operator==(const Keypoint&) const = default;
};

struct Pose {
  std::vector<Keypoint> keypoints;
  bool operator==(const Pose&) const = default;
};

struct AuxiliaryRecord {
  std::string video_id;
  double frame_time = 0.0;
  std::optional<PersonBox> person_box;
  std::optional<int> person_count;
  std::optional<double> motion;
  std::optional<Pose> pose;

  bool operator==(const AuxiliaryRecord&) const = default;
};

// Train/test split over one vocabulary.
struct Corpus {
  Vocabulary vocab;
  std::vector<VideoAnnotation> train;
  std::vector<VideoAnnotation> test;
};

Vocabulary load_vocabulary(std::istream& in, std::string_view source = "vocabulary");
std::vector<VideoAnnotation> load_annotations(std::istream& in, const Vocabulary& vocab,
                                              std::string_view source = "annotations");
PredictionSet load_predictions(std::istream& in, const Vocabulary& vocab,
                               PredictionMode mode,
                               std::string_view source = "predictions");
// Picks the mode from the column count of the first data row.
PredictionSet load_predictions_auto(std::istream& in, const Vocabulary& vocab,
                                    std::string_view source = "predictions");
std::vector<AuxiliaryRecord> load_auxiliary(std::istream& in,
                                            std::string_view source = "auxiliary");

void write_vocabulary(std::ostream& out, const Vocabulary& vocab);
void write_annotations(std::ostream& out, const std::vector<VideoAnnotation>& videos,
                       const Vocabulary& vocab);
void write_predictions(std::ostream& out, const PredictionSet& preds);
void write_auxiliary(std::ostream& out, const std::vector<AuxiliaryRecord>& records);

// Importers for the public Charades v1 release files
// (Charades_v1_classes.txt, Charades_v1_mapping.txt, Charades_v1_{train,test}.csv).
Vocabulary import_charades_vocabulary(std::istream& classes, std::istream& mapping);
std::vector<VideoAnnotation> import_charades_annotations(std::istream& csv,
                                                         const Vocabulary& vocab);

struct ValidationReport {
  std::vector<std::string> missing_predictions;      // annotated, no prediction
  std::vector<std::string> unannotated_predictions;  // predicted, no annotation
  std::size_t auxiliary_videos = 0;                  // annotated videos with aux
  double auxiliary_coverage = 0.0;                   // fraction of annotated videos

  bool clean() const {
    return missing_predictions.empty() && unannotated_predictions.empty();
  }
};

ValidationReport validate_corpus(std::span<const VideoAnnotation> annotations,
                                 const PredictionSet& predictions,
                                 std::span<const AuxiliaryRecord> auxiliary);

// Max-pools frame scores into one vector per video.
std::vector<VideoPredictions> pool_frames(std::span<const FramePredictions> frames);

// Video-level view of any prediction set (frame sets are max-pooled).
std::vector<VideoPredictions> video_level(const PredictionSet& preds);

}  // namespace actdiag::corpus

#endif  // ACTDIAG_CORPUS_HPP_
