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

// Typing of top-ranked frame predictions, cross-category confusion, and
// per-class comparison of two prediction sets.

#ifndef ACTDIAG_ERRORANALYSIS_HPP_
#define ACTDIAG_ERRORANALYSIS_HPP_

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "actdiag/boundary.hpp"
#include "actdiag/common.hpp"
#include "actdiag/corpus.hpp"
#include "actdiag/metrics.hpp"

namespace actdiag::errors {

// In precedence order: the first matching type wins.
enum class ErrorType { kTP, kBND, kOBJ, kVRB, kOTH, kFP };
inline constexpr std::size_t kErrorTypes = 6;
inline constexpr std::array<const char*, kErrorTypes> kErrorNames = {"tp",  "bnd", "obj",
                                                                     "vrb", "oth", "fp"};

// Type of a prediction for class `cls` at time t of `video`.
ErrorType classify_item(const corpus::VideoAnnotation& video, std::size_t cls, double t,
                        const corpus::Vocabulary& vocab,
                        double alpha_fraction = boundary::kDefaultAlphaFraction);

struct ErrorBreakdown {
  Matrix fractions;               // classes x kErrorTypes; masked rows when nothing typed
  std::vector<std::size_t> top_n;  // items typed per class
};

struct ErrorOptions {
  std::optional<std::size_t> top_n;  // default: the class's positive item count
  double alpha_fraction = boundary::kDefaultAlphaFraction;
  unsigned workers = 1;
};

// Types each class's top_n highest-scored localization items. Equal scores
// keep grid order.
ErrorBreakdown classify_top_predictions(std::span<const corpus::FramePredictions> frames,
                                        std::span<const corpus::VideoAnnotation> annotations,
                                        const corpus::Vocabulary& vocab,
                                        const metrics::Sampling& sampling = {},
                                        const ErrorOptions& options = {});

// Entry (a, b): mean score of a over videos containing b but not a. Masked
// on the diagonal and where no video qualifies.
Matrix cross_confusion(std::span<const corpus::VideoPredictions> preds,
                       std::span<const corpus::VideoAnnotation> annotations,
                       const corpus::Vocabulary& vocab);

struct AblationResult {
  metrics::EvalResult first;
  metrics::EvalResult second;
  std::vector<double> delta;     // second - first
  std::vector<double> relative;  // delta / first; masked when first is 0 or masked
  std::optional<std::size_t> largest_gain;
  std::optional<std::size_t> largest_loss;
};

// Throws Error unless both sets cover the same videos.
AblationResult ablation_delta(std::span<const corpus::VideoPredictions> first,
                              std::span<const corpus::VideoPredictions> second,
                              std::span<const corpus::VideoAnnotation> annotations,
                              const corpus::Vocabulary& vocab,
                              const metrics::EvalOptions& options = {});

// `class_id,tp,bnd,obj,vrb,oth,fp`
void write_breakdown(std::ostream& out, const ErrorBreakdown& breakdown,
                     const corpus::Vocabulary& vocab);
// Dense matrix with class ids as row and column labels.
void write_class_matrix(std::ostream& out, const Matrix& m, const corpus::Vocabulary& vocab);
// `class_id,ap_first,ap_second,delta,relative`
void write_ablation(std::ostream& out, const AblationResult& result,
                    const corpus::Vocabulary& vocab);

}  // namespace actdiag::errors

#endif  // ACTDIAG_ERRORANALYSIS_HPP_
