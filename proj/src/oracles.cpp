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

#include "actdiag/oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "actdiag/attributes.hpp"
#include "actdiag/stats.hpp"

namespace actdiag::oracles {

using corpus::VideoAnnotation;
using corpus::VideoPredictions;

std::size_t OracleOutput::fallback_count() const {
  return static_cast<std::size_t>(std::count(fallback.begin(), fallback.end(), true));
}

namespace {

template <class Fn>
OracleOutput per_video(std::span<const VideoAnnotation> videos, Fn fn) {
  OracleOutput out;
  out.videos.reserve(videos.size());
  for (const auto& v : videos) out.videos.push_back({v.video_id, fn(v)});
  out.fallback.assign(videos.size(), false);
  return out;
}

}  // namespace

std::vector<double> object_oracle(const VideoAnnotation& video, const corpus::Vocabulary& vocab) {
  std::vector<bool> seen(vocab.object_count(), false);
  for (const auto& inst : video.instances) seen[vocab.object_of(inst.category)] = true;
  std::vector<double> out(vocab.size(), 0.0);
  for (std::size_t c = 0; c < vocab.size(); ++c) out[c] = seen[vocab.object_of(c)] ? 1.0 : 0.0;
  return out;
}

std::vector<double> verb_oracle(const VideoAnnotation& video, const corpus::Vocabulary& vocab) {
  std::vector<bool> seen(vocab.verb_count(), false);
  for (const auto& inst : video.instances) seen[vocab.verb_of(inst.category)] = true;
  std::vector<double> out(vocab.size(), 0.0);
  for (std::size_t c = 0; c < vocab.size(); ++c) out[c] = seen[vocab.verb_of(c)] ? 1.0 : 0.0;
  return out;
}

OracleOutput object_oracle(std::span<const VideoAnnotation> videos,
                           const corpus::Vocabulary& vocab) {
  return per_video(videos, [&](const VideoAnnotation& v) { return object_oracle(v, vocab); });
}

OracleOutput verb_oracle(std::span<const VideoAnnotation> videos,
                         const corpus::Vocabulary& vocab) {
  return per_video(videos, [&](const VideoAnnotation& v) { return verb_oracle(v, vocab); });
}

// ---------------------------------------------------------------------------

TemporalContext temporal_context(const VideoAnnotation& video, double t) {
  TemporalContext ctx;
  double best_end = 0.0, best_start = 0.0;
  for (const auto& inst : video.instances) {
    if (inst.end < t) {
      if (!ctx.previous || inst.end > best_end ||
          (inst.end == best_end && inst.category < *ctx.previous)) {
        ctx.previous = inst.category;
        best_end = inst.end;
      }
    }
    if (inst.start > t) {
      if (!ctx.next || inst.start < best_start ||
          (inst.start == best_start && inst.category < *ctx.next)) {
        ctx.next = inst.category;
        best_start = inst.start;
      }
    }
  }
  return ctx;
}

namespace {

double smoothed(double count, double total, double smoothing, std::size_t classes) {
  return (count + smoothing) / (total + static_cast<double>(classes) * smoothing);
}

double row_total(const Matrix& m, std::size_t r) {
  double s = 0.0;
  for (std::size_t c = 0; c < m.cols; ++c) s += m(r, c);
  return s;
}

}  // namespace

double TransitionStats::prior(std::size_t a) const {
  double total = 0.0;
  for (double v : prior_counts) total += v;
  return smoothed(prior_counts[a], total, smoothing, num_classes);
}

double TransitionStats::given_previous(std::size_t previous, std::size_t a) const {
  return smoothed(previous_counts(previous, a), row_total(previous_counts, previous), smoothing,
                  num_classes);
}

double TransitionStats::given_next(std::size_t next, std::size_t a) const {
  return smoothed(next_counts(next, a), row_total(next_counts, next), smoothing, num_classes);
}

std::vector<double> TransitionStats::frame_scores(const TemporalContext& context) const {
  const double c = static_cast<double>(num_classes);
  double prior_total = 0.0;
  for (double v : prior_counts) prior_total += v;
  // A conditional row with no mass and no smoothing is undefined; use the prior.
  auto row = [&](const Matrix& m, std::optional<std::size_t> cond) {
    std::vector<double> p(num_classes);
    const bool usable = cond && row_total(m, *cond) + c * smoothing > 0.0;
    const double total = usable ? row_total(m, *cond) : prior_total;
    for (std::size_t a = 0; a < num_classes; ++a) {
      const double count = usable ? m(*cond, a) : prior_counts[a];
      p[a] = smoothed(count, total, smoothing, num_classes);
    }
    return p;
  };
  auto out = row(previous_counts, context.previous);
  const auto nxt = row(next_counts, context.next);
  for (std::size_t a = 0; a < num_classes; ++a) out[a] *= nxt[a];
  return out;
}

TransitionStats build_temporal_stats(std::span<const VideoAnnotation> train,
                                     const corpus::Vocabulary& vocab,
                                     const metrics::Sampling& sampling, double smoothing) {
  const std::size_t c = vocab.size();
  TransitionStats s;
  s.num_classes = c;
  s.smoothing = smoothing;
  s.prior_counts.assign(c, 0.0);
  s.previous_counts = Matrix(c, c, 0.0);
  s.next_counts = Matrix(c, c, 0.0);
  std::vector<std::size_t> labels;
  for (const auto& video : train) {
    for (double t : sampling.times(video.duration)) {
      labels.clear();
      for (const auto& inst : video.instances) {
        if (inst.contains(t) &&
            std::find(labels.begin(), labels.end(), inst.category) == labels.end()) {
          labels.push_back(inst.category);
        }
      }
      if (labels.empty()) continue;
      const auto ctx = temporal_context(video, t);
      for (auto a : labels) {
        s.prior_counts[a] += 1.0;
        if (ctx.previous) s.previous_counts(*ctx.previous, a) += 1.0;
        if (ctx.next) s.next_counts(*ctx.next, a) += 1.0;
      }
    }
  }
  return s;
}

std::vector<double> apply_temporal_oracle(const TransitionStats& stats,
                                          const VideoAnnotation& video,
                                          std::span<const double> frame_times) {
  std::vector<double> out(stats.num_classes, 0.0);
  for (double t : frame_times) {
    const auto f = stats.frame_scores(temporal_context(video, t));
    for (std::size_t a = 0; a < out.size(); ++a) out[a] = std::max(out[a], f[a]);
  }
  return out;
}

OracleOutput temporal_oracle(const TransitionStats& stats,
                             std::span<const VideoAnnotation> videos,
                             const metrics::Sampling& sampling) {
  return per_video(videos, [&](const VideoAnnotation& v) {
    const auto times = sampling.times(v.duration);
    return apply_temporal_oracle(stats, v, times);
  });
}

// ---------------------------------------------------------------------------

namespace {

double sqdist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double x = a[i] - b[i];
    s += x * x;
  }
  return s;
}

const double* row_ptr(const Matrix& m, std::size_t r) { return m.values.data() + r * m.cols; }

// Nearest centroid per point (ties to the lower index); returns the objective.
double assign_points(const Matrix& points, const Matrix& centroids,
                     std::vector<std::size_t>& assignment, std::vector<double>& dist,
                     unsigned workers) {
  const std::size_t n = points.rows, d = points.cols, k = centroids.rows;
  constexpr std::size_t kChunk = 512;
  parallel_for((n + kChunk - 1) / kChunk, workers, [&](std::size_t chunk) {
    const std::size_t end = std::min(n, (chunk + 1) * kChunk);
    for (std::size_t i = chunk * kChunk; i < end; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double s = sqdist(row_ptr(points, i), row_ptr(centroids, c), d);
        if (s < best) {
          best = s;
          arg = c;
        }
      }
      assignment[i] = arg;
      dist[i] = best;
    }
  });
  double total = 0.0;
  for (double v : dist) total += v;
  return total;
}

// Greedy k-means++: each new center is the best of several D^2-weighted draws.
Matrix greedy_init(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.rows, d = points.cols;
  Matrix centers(k, d);
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  auto set_center = [&](std::size_t c, std::size_t i) {
    std::copy_n(row_ptr(points, i), d, centers.values.begin() + static_cast<std::ptrdiff_t>(c * d));
  };
  std::size_t first = stats::draw_index(rng, n);
  set_center(0, first);
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = sqdist(row_ptr(points, i), row_ptr(points, first), d);
  std::vector<double> cumulative(n), candidate(n), best_closest(n);
  for (std::size_t c = 1; c < k; ++c) {
    std::partial_sum(closest.begin(), closest.end(), cumulative.begin());
    const double potential = cumulative.back();
    double best_potential = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      std::size_t idx;
      if (potential > 0.0) {
        std::uniform_real_distribution<double> u(0.0, potential);
        const double r = u(rng);
        idx = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
        idx = std::min(idx, n - 1);
      } else {
        idx = stats::draw_index(rng, n);
      }
      double pot = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        candidate[i] = std::min(closest[i], sqdist(row_ptr(points, i), row_ptr(points, idx), d));
        pot += candidate[i];
      }
      if (pot < best_potential) {
        best_potential = pot;
        best_index = idx;
        best_closest.swap(candidate);
      }
    }
    set_center(c, best_index);
    closest.swap(best_closest);
  }
  return centers;
}

KMeansResult kmeans_once(const Matrix& points, std::size_t k, std::uint64_t seed,
                         const KMeansOptions& options) {
  const std::size_t n = points.rows, d = points.cols;
  std::mt19937_64 rng(seed);
  KMeansResult r;
  r.centroids = greedy_init(points, k, rng);
  r.assignment.assign(n, 0);
  std::vector<double> dist(n);
  std::vector<double> sums(k * d);
  std::vector<std::size_t> counts(k);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    r.history.push_back(assign_points(points, r.centroids, r.assignment, dist, options.workers));
    ++r.iterations;
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = r.assignment[i];
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += points(i, j);
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      double m2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double v = sums[c * d + j] / static_cast<double>(counts[c]);
        m2 += (v - r.centroids(c, j)) * (v - r.centroids(c, j));
        r.centroids(c, j) = v;
      }
      movement = std::max(movement, std::sqrt(m2));
    }
    if (movement < options.tolerance) break;
  }
  r.objective = assign_points(points, r.centroids, r.assignment, dist, options.workers);
  r.history.push_back(r.objective);
  return r;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (k < 1 || k > points.rows) {
    throw Error("kmeans needs 1 <= k <= points (k=" + std::to_string(k) +
                ", points=" + std::to_string(points.rows) + ")");
  }
  KMeansResult best;
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    auto run = kmeans_once(points, k, mix_seed(seed, r), options);
    if (r == 0 || run.objective < best.objective) best = std::move(run);
  }
  return best;
}

SpectralResult spectral_cluster(const Matrix& vectors, std::size_t k, std::uint64_t seed,
                                unsigned workers) {
  const std::size_t n = vectors.rows, dim = vectors.cols;
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      if (vectors(i, j) < 0.0) throw Error("spectral clustering needs nonnegative vectors");
      s += vectors(i, j) * vectors(i, j);
    }
    if (s > 0.0) nonzero.push_back(i);
  }
  const std::size_t m = nonzero.size();
  if (k < 1 || m < k) {
    throw Error("spectral clustering needs at least k nonzero vectors (k=" + std::to_string(k) +
                ", nonzero=" + std::to_string(m) + ")");
  }
  SpectralResult result;
  result.k = k;
  result.assignment.assign(n, k);

  Eigen::MatrixXd x(m, dim);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < dim; ++j) x(r, j) = vectors(nonzero[r], j);
    x.row(r) /= x.row(r).norm();
  }
  if (k == m) {
    for (std::size_t r = 0; r < m; ++r) result.assignment[nonzero[r]] = r;
    return result;
  }
  bool identical = true;
  for (std::size_t r = 1; r < m && identical; ++r) {
    identical = (x.row(r) - x.row(0)).cwiseAbs().maxCoeff() <= 1e-12;
  }
  if (identical) {
    for (std::size_t r = 0; r < m; ++r) result.assignment[nonzero[r]] = 0;
    result.degenerate = true;
    return result;
  }

  // Affinity W = X X^T (unit diagonal); the top eigenvectors of
  // D^-1/2 W D^-1/2 = Y Y^T are the bottom ones of the normalized Laplacian.
  const Eigen::VectorXd degree = x * (x.transpose() * Eigen::VectorXd::Ones(m));
  const Eigen::MatrixXd y = degree.cwiseInverse().cwiseSqrt().asDiagonal() * x;
  Eigen::MatrixXd embed;
  bool low_rank = false;
  if (k <= dim) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(y.transpose() * y);
    const auto& values = es.eigenvalues();
    const double top = values(dim - 1);
    if (values(dim - k) > 1e-10 * top) {
      embed.resize(m, k);
      for (std::size_t c = 0; c < k; ++c) {
        const auto col = dim - 1 - c;
        embed.col(c) = y * es.eigenvectors().col(col) / std::sqrt(values(col));
      }
      low_rank = true;
    }
  }
  if (!low_rank) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(y * y.transpose());
    embed.resize(m, k);
    for (std::size_t c = 0; c < k; ++c) embed.col(c) = es.eigenvectors().col(m - 1 - c);
  }
  Matrix points(m, k);
  for (std::size_t r = 0; r < m; ++r) {
    const double norm = embed.row(r).norm();
    for (std::size_t c = 0; c < k; ++c) points(r, c) = norm > 0.0 ? embed(r, c) / norm : 0.0;
  }
  KMeansOptions options;
  options.restarts = 10;
  options.workers = workers;
  const auto km = kmeans(points, k, seed, options);
  // Relabel clusters by first appearance.
  std::vector<std::size_t> relabel(k, k);
  std::size_t next = 0;
  for (std::size_t r = 0; r < m; ++r) {
    auto& label = relabel[km.assignment[r]];
    if (label == k) label = next++;
    result.assignment[nonzero[r]] = label;
  }
  return result;
}

// ---------------------------------------------------------------------------

std::vector<double> label_vector(const VideoAnnotation& video, std::size_t num_classes) {
  std::vector<double> v(num_classes, 0.0);
  for (const auto& inst : video.instances) v[inst.category] = 1.0;
  return v;
}

IntentClusters build_intent_clusters(std::span<const VideoAnnotation> train,
                                     const corpus::Vocabulary& vocab, std::size_t k,
                                     std::uint64_t seed, unsigned workers) {
  const std::size_t c = vocab.size();
  Matrix labels(train.size(), c);
  IntentClusters out;
  out.k = k;
  out.prior.assign(c, 0.0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    out.video_ids.push_back(train[i].video_id);
    const auto v = label_vector(train[i], c);
    for (std::size_t j = 0; j < c; ++j) {
      labels(i, j) = v[j];
      out.prior[j] += v[j];
    }
  }
  if (!train.empty()) {
    for (auto& p : out.prior) p /= static_cast<double>(train.size());
  }
  const auto sc = spectral_cluster(labels, k, seed, workers);
  out.assignment = sc.assignment;
  out.degenerate = sc.degenerate;
  out.distributions = Matrix(k, c, 0.0);
  out.sizes.assign(k, 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const std::size_t a = sc.assignment[i];
    if (a >= k) continue;
    ++out.sizes[a];
    for (std::size_t j = 0; j < c; ++j) out.distributions(a, j) += labels(i, j);
  }
  for (std::size_t a = 0; a < k; ++a) {
    if (out.sizes[a] == 0) continue;
    for (std::size_t j = 0; j < c; ++j) {
      out.distributions(a, j) /= static_cast<double>(out.sizes[a]);
    }
  }
  return out;
}

std::optional<std::size_t> nearest_intent_cluster(const IntentClusters& clusters,
                                                  const VideoAnnotation& video) {
  const std::size_t c = clusters.distributions.cols;
  const auto v = label_vector(video, c);
  double vnorm = 0.0;
  for (double x : v) vnorm += x * x;
  if (vnorm == 0.0) return std::nullopt;
  std::optional<std::size_t> best;
  double best_sim = -1.0;
  for (std::size_t a = 0; a < clusters.distributions.rows; ++a) {
    double dot = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      dot += v[j] * clusters.distributions(a, j);
      norm += clusters.distributions(a, j) * clusters.distributions(a, j);
    }
    if (norm == 0.0) continue;
    const double sim = dot / std::sqrt(norm * vnorm);
    if (sim > best_sim) {
      best_sim = sim;
      best = a;
    }
  }
  return best;
}

OracleOutput intent_oracle(const IntentClusters& clusters,
                           std::span<const VideoAnnotation> videos) {
  OracleOutput out;
  const std::size_t c = clusters.distributions.cols;
  for (const auto& v : videos) {
    const auto a = nearest_intent_cluster(clusters, v);
    std::vector<double> scores = clusters.prior;
    if (a) {
      for (std::size_t j = 0; j < c; ++j) scores[j] = clusters.distributions(*a, j);
    }
    out.videos.push_back({v.video_id, std::move(scores)});
    out.fallback.push_back(!a);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<std::vector<double>> align_to_reference(const corpus::Pose& pose,
                                                      std::span<const double> reference) {
  const std::size_t kp = pose.keypoints.size();
  if (reference.size() != 2 * kp) throw Error("pose and reference keypoint counts differ");
  using C = std::complex<double>;
  std::vector<std::size_t> used;
  C mean_b = 0.0, mean_a = 0.0;
  for (std::size_t i = 0; i < kp; ++i) {
    const auto& k = pose.keypoints[i];
    if (k.confidence <= attributes::kConfidenceThreshold) continue;
    used.push_back(i);
    mean_b += C(k.x, k.y);
    mean_a += C(reference[2 * i], reference[2 * i + 1]);
  }
  if (used.size() < 2) return std::nullopt;
  mean_b /= static_cast<double>(used.size());
  mean_a /= static_cast<double>(used.size());
  C num = 0.0;
  double den = 0.0;
  for (auto i : used) {
    const C b = C(pose.keypoints[i].x, pose.keypoints[i].y) - mean_b;
    const C a = C(reference[2 * i], reference[2 * i + 1]) - mean_a;
    num += std::conj(b) * a;
    den += std::norm(b);
  }
  if (!(den > 0.0)) return std::nullopt;
  const C z = num / den;
  std::vector<double> out(reference.begin(), reference.end());
  for (auto i : used) {
    const C p = z * (C(pose.keypoints[i].x, pose.keypoints[i].y) - mean_b) + mean_a;
    out[2 * i] = p.real();
    out[2 * i + 1] = p.imag();
  }
  return out;
}

namespace {

void center_unit(std::vector<double>& v) {
  const std::size_t kp = v.size() / 2;
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < kp; ++i) {
    cx += v[2 * i];
    cy += v[2 * i + 1];
  }
  cx /= static_cast<double>(kp);
  cy /= static_cast<double>(kp);
  double ss = 0.0;
  for (std::size_t i = 0; i < kp; ++i) {
    v[2 * i] -= cx;
    v[2 * i + 1] -= cy;
    ss += v[2 * i] * v[2 * i] + v[2 * i + 1] * v[2 * i + 1];
  }
  const double norm = std::sqrt(ss);
  if (norm > 0.0) {
    for (auto& x : v) x /= norm;
  }
}

}  // namespace

std::vector<double> reference_pose(std::span<const corpus::Pose> poses) {
  const corpus::Pose* seed = nullptr;
  std::size_t seed_count = 0;
  for (const auto& p : poses) {
    const auto n = attributes::confident_keypoints(p);
    if (n >= 2 && n > seed_count) {
      seed = &p;
      seed_count = n;
    }
  }
  if (!seed) throw Error("no alignable pose");
  const std::size_t kp = seed->keypoints.size();
  double cx = 0.0, cy = 0.0;
  for (const auto& k : seed->keypoints) {
    if (k.confidence > attributes::kConfidenceThreshold) {
      cx += k.x;
      cy += k.y;
    }
  }
  cx /= static_cast<double>(seed_count);
  cy /= static_cast<double>(seed_count);
  std::vector<double> ref(2 * kp);
  for (std::size_t i = 0; i < kp; ++i) {
    const auto& k = seed->keypoints[i];
    const bool ok = k.confidence > attributes::kConfidenceThreshold;
    ref[2 * i] = ok ? k.x : cx;
    ref[2 * i + 1] = ok ? k.y : cy;
  }
  center_unit(ref);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<double> mean(2 * kp, 0.0);
    std::size_t n = 0;
    for (const auto& p : poses) {
      if (p.keypoints.size() != kp) continue;
      const auto aligned = align_to_reference(p, ref);
      if (!aligned) continue;
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += (*aligned)[j];
      ++n;
    }
    for (auto& v : mean) v /= static_cast<double>(n);
    center_unit(mean);
    double change = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) change = std::max(change, std::abs(mean[j] - ref[j]));
    ref.swap(mean);
    if (change < 1e-10) break;
  }
  return ref;
}

PoseClusters build_pose_clusters(std::span<const VideoAnnotation> train,
                                 std::span<const corpus::AuxiliaryRecord> auxiliary,
                                 const corpus::Vocabulary& vocab,
                                 const PoseOracleOptions& options) {
  std::unordered_map<std::string, const VideoAnnotation*> by_id;
  for (const auto& v : train) by_id.emplace(v.video_id, &v);
  std::vector<corpus::Pose> poses;
  std::vector<std::pair<const VideoAnnotation*, double>> frames;
  for (const auto& r : auxiliary) {
    if (!r.pose || attributes::confident_keypoints(*r.pose) < 2) continue;
    const auto it = by_id.find(r.video_id);
    if (it == by_id.end()) continue;
    poses.push_back(*r.pose);
    frames.emplace_back(it->second, r.frame_time);
  }
  if (poses.empty()) throw Error("no training frame carries an alignable pose");

  PoseClusters out;
  out.reference = reference_pose(poses);
  const std::size_t dim = out.reference.size();
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (poses[i].keypoints.size() * 2 != dim) continue;
    if (auto a = align_to_reference(poses[i], out.reference)) {
      rows.push_back(std::move(*a));
      kept.push_back(i);
    }
  }
  if (rows.empty()) throw Error("no training frame carries an alignable pose");
  Matrix points(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(),
              points.values.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  const std::size_t k = std::min(options.k, rows.size());
  out.kmeans = kmeans(points, k, options.seed, options.kmeans);

  const std::size_t c = vocab.size();
  out.distributions = Matrix(k, c, 0.0);
  out.prior.assign(c, 0.0);
  std::vector<std::size_t> sizes(k, 0);
  std::vector<bool> seen(c);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& [video, t] = frames[kept[i]];
    const std::size_t a = out.kmeans.assignment[i];
    ++sizes[a];
    std::fill(seen.begin(), seen.end(), false);
    for (const auto& inst : video->instances) {
      if (seen[inst.category] || !inst.contains(t)) continue;
      seen[inst.category] = true;
      out.distributions(a, inst.category) += 1.0;
      out.prior[inst.category] += 1.0;
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    if (sizes[a] == 0) continue;
    for (std::size_t j = 0; j < c; ++j) out.distributions(a, j) /= static_cast<double>(sizes[a]);
  }
  for (auto& p : out.prior) p /= static_cast<double>(kept.size());
  return out;
}

std::optional<std::vector<double>> apply_pose_oracle(const PoseClusters& clusters,
                                                     std::span<const corpus::Pose> frames) {
  const auto& centroids = clusters.kmeans.centroids;
  const std::size_t c = clusters.distributions.cols;
  std::vector<double> out(c, 0.0);
  bool any = false;
  for (const auto& pose : frames) {
    if (pose.keypoints.size() * 2 != clusters.reference.size()) continue;
    const auto v = align_to_reference(pose, clusters.reference);
    if (!v) continue;
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t a = 0; a < centroids.rows; ++a) {
      const double d = sqdist(v->data(), row_ptr(centroids, a), centroids.cols);
      if (d < best) {
        best = d;
        arg = a;
      }
    }
    for (std::size_t j = 0; j < c; ++j) out[j] = std::max(out[j], clusters.distributions(arg, j));
    any = true;
  }
  if (!any) return std::nullopt;
  return out;
}

OracleOutput pose_oracle(const PoseClusters& clusters, std::span<const VideoAnnotation> videos,
                         std::span<const corpus::AuxiliaryRecord> auxiliary) {
  std::unordered_map<std::string, std::vector<corpus::Pose>> by_video;
  for (const auto& r : auxiliary) {
    if (r.pose) by_video[r.video_id].push_back(*r.pose);
  }
  OracleOutput out;
  for (const auto& v : videos) {
    std::optional<std::vector<double>> scores;
    if (const auto it = by_video.find(v.video_id); it != by_video.end()) {
      scores = apply_pose_oracle(clusters, it->second);
    }
    out.fallback.push_back(!scores);
    out.videos.push_back({v.video_id, scores ? std::move(*scores) : clusters.prior});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<VideoPredictions> squash(std::span<const VideoPredictions> baseline) {
  std::vector<VideoPredictions> out(baseline.begin(), baseline.end());
  if (baseline.empty()) return out;
  const std::size_t c = baseline.front().scores.size();
  const double n = static_cast<double>(baseline.size());
  for (std::size_t j = 0; j < c; ++j) {
    double mean = 0.0;
    bool constant = true;
    for (const auto& v : baseline) {
      mean += v.scores[j];
      constant = constant && v.scores[j] == baseline.front().scores[j];
    }
    mean /= n;
    double ss = 0.0;
    for (const auto& v : baseline) ss += (v.scores[j] - mean) * (v.scores[j] - mean);
    const double sd = std::sqrt(ss / n);
    for (auto& v : out) {
      const double z = !constant && sd > 0.0 ? (v.scores[j] - mean) / sd : 0.0;
      v.scores[j] = 1.0 / (1.0 + std::exp(-z));
    }
  }
  return out;
}

std::vector<VideoPredictions> combine(std::span<const VideoPredictions> oracle,
                                      std::span<const VideoPredictions> baseline) {
  std::unordered_map<std::string, const VideoPredictions*> by_id;
  for (const auto& o : oracle) by_id.emplace(o.video_id, &o);
  if (by_id.size() != baseline.size()) {
    throw Error("oracle and baseline cover different videos (" + std::to_string(by_id.size()) +
                " vs " + std::to_string(baseline.size()) + ")");
  }
  auto out = squash(baseline);
  for (auto& v : out) {
    const auto it = by_id.find(v.video_id);
    if (it == by_id.end()) throw Error("oracle has no scores for '" + v.video_id + "'");
    if (it->second->scores.size() != v.scores.size()) {
      throw Error("oracle and baseline widths differ for '" + v.video_id + "'");
    }
    for (std::size_t j = 0; j < v.scores.size(); ++j) v.scores[j] *= it->second->scores[j];
  }
  return out;
}

}  // namespace actdiag::oracles
