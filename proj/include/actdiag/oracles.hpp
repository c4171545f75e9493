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

// Oracles that see one kind of ground-truth side information (objects,
// verbs, neighboring activities, intent cluster, pose cluster) and predict
// video-level class scores, plus the clustering kernels they rely on.

#ifndef ACTDIAG_ORACLES_HPP_
#define ACTDIAG_ORACLES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "actdiag/common.hpp"
#include "actdiag/corpus.hpp"
#include "actdiag/metrics.hpp"

namespace actdiag::oracles {

// Video-level oracle scores. `fallback` marks videos that received the prior
// because the side information was missing.
struct OracleOutput {
  std::vector<corpus::VideoPredictions> videos;
  std::vector<bool> fallback;

  std::size_t fallback_count() const;
};

// 1 for every category whose object (verb) occurs in the video.
std::vector<double> object_oracle(const corpus::VideoAnnotation& video,
                                  const corpus::Vocabulary& vocab);
std::vector<double> verb_oracle(const corpus::VideoAnnotation& video,
                                const corpus::Vocabulary& vocab);
OracleOutput object_oracle(std::span<const corpus::VideoAnnotation> videos,
                           const corpus::Vocabulary& vocab);
OracleOutput verb_oracle(std::span<const corpus::VideoAnnotation> videos,
                         const corpus::Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Temporal context

// Categories of the instance that most recently ended strictly before t and
// of the next one to start strictly after t. Ties go to the lower category.
struct TemporalContext {
  std::optional<std::size_t> previous;
  std::optional<std::size_t> next;
};
TemporalContext temporal_context(const corpus::VideoAnnotation& video, double t);

// Class frequencies over labeled sample frames, overall and conditioned on
// the previous / next activity, with additive smoothing.
struct TransitionStats {
  std::size_t num_classes = 0;
  double smoothing = 1.0;
  std::vector<double> prior_counts;  // raw counts
  Matrix previous_counts;            // row: previous activity, column: class
  Matrix next_counts;                // row: next activity, column: class

  double prior(std::size_t a) const;
  double given_previous(std::size_t previous, std::size_t a) const;
  double given_next(std::size_t next, std::size_t a) const;

  // p(a | previous) * p(a | next); a missing side uses the prior.
  std::vector<double> frame_scores(const TemporalContext& context) const;
};

TransitionStats build_temporal_stats(std::span<const corpus::VideoAnnotation> train,
                                     const corpus::Vocabulary& vocab,
                                     const metrics::Sampling& sampling = {},
                                     double smoothing = 1.0);

// Max-pool of frame_scores over the given frame times.
std::vector<double> apply_temporal_oracle(const TransitionStats& stats,
                                          const corpus::VideoAnnotation& video,
                                          std::span<const double> frame_times);
OracleOutput temporal_oracle(const TransitionStats& stats,
                             std::span<const corpus::VideoAnnotation> videos,
                             const metrics::Sampling& sampling = {});

// ---------------------------------------------------------------------------
// Clustering

struct KMeansOptions {
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // largest centroid movement at convergence
  std::size_t restarts = 1;
  unsigned workers = 1;
};

struct KMeansResult {
  Matrix centroids;  // k x dim
  std::vector<std::size_t> assignment;
  double objective = 0.0;          // sum of squared distances
  std::vector<double> history;     // objective after each assignment step
  std::size_t iterations = 0;
};

// Lloyd iterations from a seeded greedy k-means++ start; the best of
// `restarts` runs is kept. Empty clusters keep their previous centroid.
// Throws Error unless 1 <= k <= rows.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

struct SpectralResult {
  std::vector<std::size_t> assignment;  // zero vectors get cluster `k`
  std::size_t k = 0;
  bool degenerate = false;  // all nonzero vectors point the same way
};

// Cosine-affinity spectral clustering of nonnegative vectors (rows of
// `vectors`) with the symmetric normalized Laplacian. Throws Error when fewer
// than k vectors are nonzero.
SpectralResult spectral_cluster(const Matrix& vectors, std::size_t k, std::uint64_t seed,
                                unsigned workers = 1);

// ---------------------------------------------------------------------------
// Intent oracle

struct IntentClusters {
  std::size_t k = 0;
  std::vector<std::string> video_ids;   // training videos
  std::vector<std::size_t> assignment;  // cluster per training video
  Matrix distributions;                 // k x classes, mean member label vector
  std::vector<std::size_t> sizes;
  std::vector<double> prior;            // mean label vector over all videos
  bool degenerate = false;
};

std::vector<double> label_vector(const corpus::VideoAnnotation& video, std::size_t num_classes);

IntentClusters build_intent_clusters(std::span<const corpus::VideoAnnotation> train,
                                     const corpus::Vocabulary& vocab, std::size_t k,
                                     std::uint64_t seed, unsigned workers = 1);

// Cluster whose mean label vector is most cosine-similar to the video's
// labels; nullopt for a video without labels.
std::optional<std::size_t> nearest_intent_cluster(const IntentClusters& clusters,
                                                  const corpus::VideoAnnotation& video);
OracleOutput intent_oracle(const IntentClusters& clusters,
                           std::span<const corpus::VideoAnnotation> videos);

// ---------------------------------------------------------------------------
// Pose oracle

// Similarity transform of the confident keypoints of `pose` onto `reference`
// (2 * keypoints values, x then y per keypoint); other keypoints take the
// reference coordinates. Returns nullopt when the pose is not alignable.
std::optional<std::vector<double>> align_to_reference(const corpus::Pose& pose,
                                                      std::span<const double> reference);

// Iterated mean of aligned poses, centered with unit norm.
std::vector<double> reference_pose(std::span<const corpus::Pose> poses);

struct PoseClusters {
  std::vector<double> reference;
  KMeansResult kmeans;
  Matrix distributions;      // clusters x classes, mean frame label indicator
  std::vector<double> prior;  // mean label indicator over all posed frames
};

struct PoseOracleOptions {
  std::size_t k = 500;
  std::uint64_t seed = 0;
  KMeansOptions kmeans;
};

// Clusters the poses of training frames; k is capped at the frame count.
// Throws Error when no training frame carries an alignable pose.
PoseClusters build_pose_clusters(std::span<const corpus::VideoAnnotation> train,
                                 std::span<const corpus::AuxiliaryRecord> auxiliary,
                                 const corpus::Vocabulary& vocab,
                                 const PoseOracleOptions& options = {});

// Max-pool over frames of the nearest cluster's distribution; nullopt when no
// frame is alignable.
std::optional<std::vector<double>> apply_pose_oracle(const PoseClusters& clusters,
                                                     std::span<const corpus::Pose> frames);
OracleOutput pose_oracle(const PoseClusters& clusters,
                         std::span<const corpus::VideoAnnotation> videos,
                         std::span<const corpus::AuxiliaryRecord> auxiliary);

// ---------------------------------------------------------------------------
// Combination

// Per class: logistic of the scores standardized over the set (zero variance
// maps to 0.5).
std::vector<corpus::VideoPredictions> squash(std::span<const corpus::VideoPredictions> baseline);

// Elementwise product of the squashed baseline with the oracle scores.
// Throws Error unless both cover the same videos.
std::vector<corpus::VideoPredictions> combine(std::span<const corpus::VideoPredictions> oracle,
                                              std::span<const corpus::VideoPredictions> baseline);

}  // namespace actdiag::oracles

#endif  // ACTDIAG_ORACLES_HPP_
