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

#include "actdiag/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "actdiag/attributes.hpp"
#include "actdiag/boundary.hpp"
#include "actdiag/erroranalysis.hpp"
#include "actdiag/oracles.hpp"
#include "actdiag/stats.hpp"

namespace actdiag::report {

namespace fs = std::filesystem;
using corpus::VideoAnnotation;
using corpus::VideoPredictions;

const Table* DiagnosticReport::find(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<const Suggestion*> DiagnosticReport::triggered() const {
  std::vector<const Suggestion*> out;
  for (const auto& s : suggestions) {
    if (s.triggered) out.push_back(&s);
  }
  return out;
}

std::vector<Rule> default_rules() {
  return {
      {"boundary", "boundary_gain_points", 1.0,
       "predictions are boundary-sensitive; consider fluid-boundary training"},
      {"object_confusion", "neg_rho_ap_object_complexity", 0.3,
       "confusion among same-object classes; add fine-grained discrimination"},
      {"smoothing", "smoothing_best_fraction", 0.0, "add temporal aggregation"},
      {"person_size", "person_size_interior_peak", 0.5, "add person-centered cropping"},
      {"temporal_context", "temporal_oracle_gain_points", 5.0, "add sequence modeling"},
  };
}

std::vector<Suggestion> suggest(const DiagnosticReport& report, std::span<const Rule> rules) {
  std::vector<Suggestion> out;
  for (const auto& rule : rules) {
    Suggestion s;
    s.rule = rule.id;
    s.quantity = rule.quantity;
    s.threshold = rule.threshold;
    s.text = rule.text;
    if (const auto it = report.quantities.find(rule.quantity); it != report.quantities.end()) {
      s.value = it->second;
    }
    s.triggered = !is_masked(s.value) && s.value > rule.threshold;
    out.push_back(std::move(s));
  }
  return out;
}

void check_method_name(std::string_view name) {
  const bool ok = !name.empty() && std::all_of(name.begin(), name.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
  });
  if (!ok || name == "." || name == "..") {
    throw Error("invalid method name '" + std::string(name) +
                "': use letters, digits, '-', '_' or '.'");
  }
}

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Inputs load_inputs(const RunConfig& config) {
  std::vector<fs::path> paths = {config.vocabulary, config.train, config.test};
  for (const auto& m : config.methods) paths.push_back(m.path);
  if (config.auxiliary) paths.push_back(*config.auxiliary);
  if (config.reannotations) paths.push_back(*config.reannotations);
  for (const auto& p : paths) {
    if (!fs::exists(p)) throw Error("missing input '" + p.string() + "'");
  }
  std::set<std::string> names;
  for (const auto& m : config.methods) {
    check_method_name(m.name);
    if (!names.insert(m.name).second) throw Error("duplicate method name '" + m.name + "'");
  }

  Inputs in;
  auto vin = open_input(config.vocabulary);
  in.corpus.vocab = corpus::load_vocabulary(vin, config.vocabulary.string());
  auto trin = open_input(config.train);
  in.corpus.train = corpus::load_annotations(trin, in.corpus.vocab, config.train.string());
  auto tein = open_input(config.test);
  in.corpus.test = corpus::load_annotations(tein, in.corpus.vocab, config.test.string());
  for (const auto& m : config.methods) {
    auto pin = open_input(m.path);
    in.methods.push_back({m.name, corpus::load_predictions_auto(pin, in.corpus.vocab,
                                                                m.path.string())});
  }
  if (config.auxiliary) {
    auto ain = open_input(*config.auxiliary);
    in.auxiliary = corpus::load_auxiliary(ain, config.auxiliary->string());
  }
  if (config.reannotations) {
    auto rin = open_input(*config.reannotations);
    in.reannotations =
        corpus::load_annotations(rin, in.corpus.vocab, config.reannotations->string());
  }
  return in;
}

namespace {

// Stream tags for seeds derived from the run seed.
enum Stream : std::uint64_t {
  kMapInterval = 1,
  kBinInterval,
  kCorrelation,
  kAgreement,
  kAttributes,
  kSimilarity,
  kIntent,
  kPose,
};

struct MethodData {
  std::string name;
  const corpus::PredictionSet* preds = nullptr;
  std::vector<VideoPredictions> video;
  metrics::EvalResult cls;
  std::optional<metrics::EvalResult> loc;
  std::optional<metrics::EvalResult> loc_noboundary;
  std::optional<Matrix> confusion;

  bool has_frames() const { return preds->mode == corpus::PredictionMode::kFrame; }
};

std::vector<Cell> matrix_row(const std::string& label, const Matrix& m, std::size_t r) {
  std::vector<Cell> row = {label};
  for (std::size_t c = 0; c < m.cols; ++c) row.emplace_back(m(r, c));
  return row;
}

class Builder {
 public:
  Builder(const Inputs& in, const ReportOptions& opt)
      : in_(in), opt_(opt), vocab_(in.corpus.vocab), test_(in.corpus.test),
        train_(in.corpus.train) {
    eval_.workers = opt.workers;
    for (const auto& name : opt.only) {
      if (std::find(kSections.begin(), kSections.end(), name) == kSections.end()) {
        throw Error("unknown report section '" + name + "'");
      }
    }
    if (opt.only.empty()) {
      enabled_.insert(kSections.begin(), kSections.end());
    } else {
      enabled_.insert(opt.only.begin(), opt.only.end());
    }
    if (enabled_.count("curves") || enabled_.count("correlations")) enabled_.insert("attributes");
    for (const char* s : {"boundary", "errors", "curves", "correlations", "smoothing", "context",
                          "oracles", "suggestions"}) {
      if (enabled_.count(s)) enabled_.insert("evaluation");
    }
    if (enabled_.count("evaluation")) {
      enabled_.insert("validation");
      if (in.methods.empty()) throw Error("at least one prediction set is required");
    }
  }

  DiagnosticReport run() {
    section("validation", [&] { validation(); });
    section("evaluation", [&] { evaluation(); });
    section("boundary", [&] { boundary(); });
    section("agreement", [&] { agreement(); });
    section("errors", [&] { errors(); });
    section("attributes", [&] { attributes(); });
    section("curves", [&] { curves(); });
    section("correlations", [&] { correlations(); });
    section("smoothing", [&] { smoothing(); });
    section("context", [&] { context(); });
    section("overlap", [&] { overlap(); });
    section("oracles", [&] { oracles(); });
    section("suggestions", [&] {
      r_.suggestions = suggest(r_, opt_.rules);
      auto& s = table("suggestions", "Suggestions",
                      {"rule", "quantity", "value", "threshold", "triggered", "text"});
      for (const auto& sg : r_.suggestions) {
        s.rows.push_back({sg.rule, sg.quantity, sg.value, sg.threshold,
                          std::string(sg.triggered ? "yes" : "no"), sg.text});
      }
    });
    auto& q = table("quantities", "Summary quantities", {"quantity", "value"});
    for (const auto& [k, v] : r_.quantities) q.rows.push_back({k, v});
    auto& sec = table("sections", "Sections", {"section", "status"});
    for (const auto& [k, v] : r_.sections) sec.rows.push_back({k, v});
    r_.tables.assign(std::make_move_iterator(tables_.begin()),
                     std::make_move_iterator(tables_.end()));
    return std::move(r_);
  }

 private:
  struct Skip {
    std::string reason;
  };

  template <class Fn>
  void section(const std::string& name, Fn fn) {
    if (!enabled_.count(name)) return;
    try {
      fn();
      r_.sections.emplace_back(name, "ok");
    } catch (const Skip& s) {
      r_.sections.emplace_back(name, "skipped: " + s.reason);
    } catch (const std::exception& e) {
      throw Error(name + ": " + e.what());
    }
  }

  Table& table(std::string name, std::string title, std::vector<std::string> columns) {
    tables_.push_back({std::move(name), std::move(title), std::move(columns), {}});
    return tables_.back();
  }

  std::vector<std::string> class_columns() const {
    std::vector<std::string> cols = {"class_id"};
    for (const auto& c : vocab_.categories()) cols.push_back(c.id);
    return cols;
  }

  void add_matrix(std::string name, std::string title, const Matrix& m) {
    auto& t = table(std::move(name), std::move(title), class_columns());
    for (std::size_t r = 0; r < m.rows; ++r) t.rows.push_back(matrix_row(vocab_[r].id, m, r));
  }

  void quantity(const std::string& key, double v) { r_.quantities[key] = v; }

  std::vector<MethodData*> frame_methods() {
    std::vector<MethodData*> out;
    for (auto& m : methods_) {
      if (m.has_frames()) out.push_back(&m);
    }
    if (out.empty()) throw Skip{"no frame predictions"};
    return out;
  }

  std::optional<stats::ConfidenceInterval> map_interval(
      std::span<const VideoPredictions> preds, std::span<const VideoAnnotation> videos,
      std::uint64_t seed) {
    if (opt_.resamples == 0 || videos.size() < 2) return std::nullopt;
    const metrics::WeightedClassificationMap statistic(preds, videos, vocab_);
    stats::BootstrapOptions b;
    b.resamples = opt_.resamples;
    b.seed = seed;
    b.workers = opt_.workers;
    try {
      return stats::bootstrap_ci(
          videos.size(), [&](std::span<const std::uint32_t> counts) { return statistic(counts); },
          b);
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  // -------------------------------------------------------------------------

  void validation() {
    auto& t = table("validation", "Input coverage",
                    {"method", "mode", "missing_predictions", "unannotated_predictions",
                     "auxiliary_coverage"});
    for (const auto& m : in_.methods) {
      const auto v = corpus::validate_corpus(test_, m.predictions, in_.auxiliary);
      t.rows.push_back({m.name,
                        std::string(m.predictions.mode == corpus::PredictionMode::kFrame
                                        ? "frame"
                                        : "video"),
                        static_cast<double>(v.missing_predictions.size()),
                        static_cast<double>(v.unannotated_predictions.size()),
                        v.auxiliary_coverage});
      quantity("auxiliary_coverage", v.auxiliary_coverage);
      if (!v.missing_predictions.empty()) {
        throw Error("method '" + m.name + "' has no predictions for " +
                    std::to_string(v.missing_predictions.size()) + " test video(s), first '" +
                    v.missing_predictions.front() + "'");
      }
    }
    quantity("test_videos", static_cast<double>(test_.size()));
    quantity("train_videos", static_cast<double>(train_.size()));
  }

  void evaluation() {
    auto& t = table("evaluation", "Classification and localization mAP",
                    {"method", "mode", "cls_map", "cls_map_low", "cls_map_high", "loc_map"});
    for (std::size_t i = 0; i < in_.methods.size(); ++i) {
      MethodData m;
      m.name = in_.methods[i].name;
      m.preds = &in_.methods[i].predictions;
      m.video = corpus::video_level(*m.preds);
      m.cls = metrics::classification_map(m.video, test_, vocab_, eval_);
      if (m.has_frames()) {
        m.loc = metrics::localization_map(m.preds->frames, test_, vocab_, opt_.sampling, eval_);
      }
      const auto ci = map_interval(m.video, test_, mix_seed(opt_.seed, kMapInterval, i));
      const double low = ci ? ci->low : kMasked, high = ci ? ci->high : kMasked;
      const double loc = m.loc ? m.loc->mean_ap : kMasked;
      t.rows.push_back({m.name, std::string(m.has_frames() ? "frame" : "video"), m.cls.mean_ap,
                        low, high, loc});
      quantity(m.name + ".cls_map", m.cls.mean_ap);
      quantity(m.name + ".cls_map_low", low);
      quantity(m.name + ".cls_map_high", high);
      if (m.loc) quantity(m.name + ".loc_map", loc);
      methods_.push_back(std::move(m));
    }
  }

  void boundary() {
    const auto perfect =
        boundary::perfect_classifier_localization(test_, vocab_, opt_.sampling, eval_);
    quantity("perfect_classifier_loc_map", perfect.mean_ap);
    auto& t = table("boundary", "Localization mAP with boundary regions excluded",
                    {"method", "loc_map", "loc_map_noboundary", "gain_points"});
    bool any = false;
    for (auto& m : methods_) {
      if (m.has_frames()) {
        any = true;
        m.loc_noboundary =
            boundary::boundary_excluded_eval(m.preds->frames, test_, vocab_, opt_.sampling, eval_);
        const double gain = 100.0 * (m.loc_noboundary->mean_ap - m.loc->mean_ap);
        t.rows.push_back({m.name, m.loc->mean_ap, m.loc_noboundary->mean_ap, gain});
        quantity(m.name + ".loc_map_noboundary", m.loc_noboundary->mean_ap);
        quantity(m.name + ".boundary_gain_points", gain);
        if (&m == &methods_.front()) quantity("boundary_gain_points", gain);
      }
      auto& ap = table("ap_" + m.name, "Per-class AP: " + m.name,
                       {"class_id", "n_pos_videos", "cls_ap", "loc_ap", "loc_ap_noboundary"});
      for (std::size_t c = 0; c < vocab_.size(); ++c) {
        ap.rows.push_back({vocab_[c].id, m.cls.n_pos[c], m.cls.per_class_ap[c],
                           m.loc ? m.loc->per_class_ap[c] : kMasked,
                           m.loc_noboundary ? m.loc_noboundary->per_class_ap[c] : kMasked});
      }
    }
    auto& p = table("perfect_classifier", "Localization AP of a perfect video classifier",
                    {"class_id", "loc_ap"});
    for (std::size_t c = 0; c < vocab_.size(); ++c) {
      p.rows.push_back({vocab_[c].id, perfect.per_class_ap[c]});
    }
    if (!any) throw Skip{"no frame predictions"};
  }

  void agreement() {
    if (!in_.reannotations) throw Skip{"no reannotations"};
    boundary::AgreementOptions o;
    o.permutations = opt_.permutations;
    o.seed = mix_seed(opt_.seed, kAgreement);
    o.workers = opt_.workers;
    const auto result = boundary::agreement(test_, *in_.reannotations, o);
    auto& t = table("agreement", "Annotator agreement per instance",
                    {"video_id", "class_id", "status", "iou", "iou_noboundary", "start_err",
                     "end_err", "center_cov"});
    for (const auto& rec : result.records) {
      const char* status = rec.status == boundary::MatchStatus::kMatched ? "matched"
                           : rec.status == boundary::MatchStatus::kUnmatchedReference
                               ? "unmatched_reference"
                               : "unmatched_reannotation";
      t.rows.push_back({rec.video_id, vocab_[rec.category].id, std::string(status), rec.iou,
                        rec.boundary_excluded_iou, rec.start_error, rec.end_error,
                        rec.center_covered});
    }
    const auto& s = result.summary;
    quantity("agreement.mean_iou", s.iou.mean);
    quantity("agreement.median_iou", s.iou.median);
    quantity("agreement.per_video_mean_iou", s.per_video_mean_iou);
    quantity("agreement.mean_iou_noboundary", s.boundary_excluded_iou.mean);
    quantity("agreement.fraction_over_half", s.fraction_over_half);
    quantity("agreement.center_coverage", s.center_covered.mean);
    quantity("agreement.mean_start_error", s.start_error.mean);
    quantity("agreement.mean_end_error", s.end_error.mean);
    quantity("agreement.category_iou_std", s.category_iou_std);
    quantity("agreement.matched", static_cast<double>(s.matched));
    quantity("agreement.unmatched_reference", static_cast<double>(s.unmatched_reference));
    quantity("agreement.unmatched_reannotation", static_cast<double>(s.unmatched_reannotation));
    if (s.iou_vs_length) {
      quantity("agreement.iou_vs_length.rho", s.iou_vs_length->rho);
      quantity("agreement.iou_vs_length.p", s.iou_vs_length->p_value);
    }
    if (s.start_error_vs_length) {
      quantity("agreement.start_error_vs_length.rho", s.start_error_vs_length->rho);
      quantity("agreement.start_error_vs_length.p", s.start_error_vs_length->p_value);
    }
  }

  void errors() {
    for (auto& m : methods_) {
      m.confusion = errors::cross_confusion(m.video, test_, vocab_);
      add_matrix("confusion_" + m.name, "Mean score of row class when only column class is present: " + m.name,
                 *m.confusion);
    }
    const auto frames = frame_methods();
    std::vector<std::string> cols = {"method"};
    for (const char* n : errors::kErrorNames) cols.emplace_back(n);
    auto& summary = table("errors_summary", "Top-prediction error types, mean over classes", cols);
    for (auto* m : frames) {
      errors::ErrorOptions o;
      o.workers = opt_.workers;
      const auto b = errors::classify_top_predictions(m->preds->frames, test_, vocab_,
                                                      opt_.sampling, o);
      std::vector<std::string> ecols = {"class_id"};
      for (const char* n : errors::kErrorNames) ecols.emplace_back(n);
      auto& t = table("errors_" + m->name, "Top-prediction error types: " + m->name, ecols);
      std::vector<Cell> mean_row = {m->name};
      for (std::size_t r = 0; r < vocab_.size(); ++r) {
        t.rows.push_back(matrix_row(vocab_[r].id, b.fractions, r));
      }
      for (std::size_t k = 0; k < errors::kErrorTypes; ++k) {
        std::vector<double> col;
        for (std::size_t r = 0; r < vocab_.size(); ++r) col.push_back(b.fractions(r, k));
        const double mean = stats::summarize(col).mean;
        mean_row.emplace_back(mean);
        quantity(m->name + ".errors." + errors::kErrorNames[k], mean);
      }
      summary.rows.push_back(std::move(mean_row));
    }
  }

  void attributes() {
    attributes::AttributeOptions o;
    o.max_pairs = opt_.max_pairs;
    o.seed = mix_seed(opt_.seed, kAttributes);
    o.workers = opt_.workers;
    categories_ = attributes::category_attributes(train_, in_.auxiliary, vocab_, o);
    auto& t = table("category_attributes", "Category attributes (training split)",
                    {"class_id", "train_examples", "train_frames", "avg_extent",
                     "object_complexity", "verb_complexity", "motion", "pose_variability",
                     "overlap_rate"});
    for (const auto& c : categories_) {
      t.rows.push_back({c.class_id, c.train_examples, c.train_frames, c.avg_extent,
                        c.object_complexity, c.verb_complexity, c.motion, c.pose_variability,
                        c.overlap_rate});
    }
    videos_ = attributes::video_attributes(test_, in_.auxiliary);
    auto& v = table("video_attributes", "Video attributes (test split)",
                    {"video_id", "num_actions", "person_size", "multi_person", "mean_motion"});
    for (const auto& a : videos_) {
      v.rows.push_back({a.video_id, a.num_actions, a.person_size, a.multi_person, a.mean_motion});
    }
    const auto poses = attributes::poses_by_category(train_, in_.auxiliary, vocab_);
    const bool any_pose = std::any_of(poses.begin(), poses.end(),
                                      [](const auto& p) { return !p.empty(); });
    if (any_pose) {
      add_matrix("pose_similarity", "Mean Procrustes distance between category poses",
                 attributes::cross_category_pose_similarity(
                     poses, opt_.similarity_max_pairs, mix_seed(opt_.seed, kSimilarity),
                     opt_.workers));
    } else {
      r_.sections.emplace_back("attributes.pose_similarity", "skipped: no auxiliary poses");
    }
  }

  static std::vector<std::pair<std::string, double attributes::CategoryAttributes::*>>
  category_fields() {
    using A = attributes::CategoryAttributes;
    return {{"train_examples", &A::train_examples},   {"train_frames", &A::train_frames},
            {"avg_extent", &A::avg_extent},           {"object_complexity", &A::object_complexity},
            {"verb_complexity", &A::verb_complexity}, {"motion", &A::motion},
            {"pose_variability", &A::pose_variability}, {"overlap_rate", &A::overlap_rate}};
  }

  static std::vector<std::pair<std::string, double attributes::VideoAttributes::*>>
  video_fields() {
    using V = attributes::VideoAttributes;
    return {{"num_actions", &V::num_actions},
            {"person_size", &V::person_size},
            {"multi_person", &V::multi_person},
            {"mean_motion", &V::mean_motion}};
  }

  void curves() {
    for (std::size_t mi = 0; mi < methods_.size(); ++mi) {
      const auto& m = methods_[mi];
      for (const auto& [attr, field] : category_fields()) {
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t c = 0; c < vocab_.size(); ++c) {
          const double x = categories_[c].*field, y = m.cls.per_class_ap[c];
          if (!is_masked(x) && !is_masked(y)) pairs.emplace_back(x, y);
        }
        if (pairs.empty()) continue;
        const auto curve = stats::bin_by_attribute(pairs, std::min(opt_.bins, pairs.size()));
        auto& t = table("curve_" + m.name + "_" + attr, "Class AP vs " + attr + ": " + m.name,
                        {"x_center", "y_mean", "y_std", "n"});
        for (const auto& b : curve.bins) {
          t.rows.push_back({b.x_center, b.y_mean, b.y_std, static_cast<double>(b.n)});
        }
      }
      for (std::size_t ai = 0; ai < video_fields().size(); ++ai) {
        video_curve(mi, ai);
      }
    }
  }

  // mAP of the videos in each attribute bin; bootstrap intervals for the
  // primary method only.
  void video_curve(std::size_t mi, std::size_t ai) {
    const auto& m = methods_[mi];
    const auto [attr, field] = video_fields()[ai];
    std::vector<std::size_t> members;
    std::vector<double> x;
    for (std::size_t v = 0; v < videos_.size(); ++v) {
      const double value = videos_[v].*field;
      if (!is_masked(value)) {
        members.push_back(v);
        x.push_back(value);
      }
    }
    if (members.empty()) {
      if (mi == 0) r_.sections.emplace_back("curves." + attr, "skipped: attribute absent");
      return;
    }
    std::vector<double> distinct = x;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<std::size_t> bin(x.size());
    std::size_t k;
    if (distinct.size() <= opt_.bins) {
      k = distinct.size();
      for (std::size_t i = 0; i < x.size(); ++i) {
        bin[i] = static_cast<std::size_t>(
            std::lower_bound(distinct.begin(), distinct.end(), x[i]) - distinct.begin());
      }
    } else {
      k = opt_.bins;
      bin = stats::assign_bins(x, k, stats::BinMode::kQuantile);
    }
    auto& t = table("video_curve_" + m.name + "_" + attr, "Video mAP vs " + attr + ": " + m.name,
                    {"x_center", "map", "ci_low", "ci_high", "n"});
    std::vector<double> maps(k, kMasked);
    for (std::size_t b = 0; b < k; ++b) {
      std::vector<VideoAnnotation> subset;
      double xs = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (bin[i] != b) continue;
        subset.push_back(test_[members[i]]);
        xs += x[i];
      }
      if (subset.empty()) continue;
      const auto eval = metrics::classification_map(m.video, subset, vocab_, eval_);
      maps[b] = eval.mean_ap;
      std::optional<stats::ConfidenceInterval> ci;
      if (mi == 0 && !is_masked(eval.mean_ap)) {
        ci = map_interval(m.video, subset, mix_seed(opt_.seed, kBinInterval, ai * 1000 + b));
      }
      t.rows.push_back({xs / static_cast<double>(subset.size()), eval.mean_ap,
                        ci ? ci->low : kMasked, ci ? ci->high : kMasked,
                        static_cast<double>(subset.size())});
    }
    if (mi == 0 && attr == "person_size") {
      std::optional<std::size_t> peak;
      std::size_t defined = 0;
      for (std::size_t b = 0; b < k; ++b) {
        if (is_masked(maps[b])) continue;
        ++defined;
        if (!peak || maps[b] > maps[*peak]) peak = b;
      }
      if (defined >= 3) {
        quantity("person_size_interior_peak", *peak > 0 && *peak + 1 < k ? 1.0 : 0.0);
      }
    }
  }

  const Matrix& overlap_matrix() {
    if (!overlap_) overlap_ = temporal::overlap_stats(train_, vocab_);
    return *overlap_;
  }

  void correlations() {
    auto& t = table("correlations", "Pearson correlations with permutation p-values (two-sided)",
                    {"method", "x", "y", "rho", "p_value", "n"});
    for (std::size_t mi = 0; mi < methods_.size(); ++mi) {
      const auto& m = methods_[mi];
      const auto fields = category_fields();
      for (std::size_t a = 0; a < fields.size(); ++a) {
        std::vector<double> x, y;
        for (std::size_t c = 0; c < vocab_.size(); ++c) {
          const double xv = categories_[c].*(fields[a].second), yv = m.cls.per_class_ap[c];
          if (!is_masked(xv) && !is_masked(yv)) {
            x.push_back(xv);
            y.push_back(yv);
          }
        }
        try {
          const auto r = stats::pearson(x, y, opt_.permutations,
                                        mix_seed(opt_.seed, kCorrelation, mi * 100 + a),
                                        opt_.workers);
          t.rows.push_back({m.name, fields[a].first, std::string("cls_ap"), r.rho, r.p_value,
                            static_cast<double>(r.n)});
          if (mi == 0 && fields[a].first == "object_complexity") {
            quantity("neg_rho_ap_object_complexity", -r.rho);
          }
        } catch (const Error&) {
          // Undefined correlation (too few classes or constant attribute).
        }
      }
      if (m.confusion) {
        const auto& ov = overlap_matrix();
        std::vector<double> x, y;
        for (std::size_t a = 0; a < vocab_.size(); ++a) {
          for (std::size_t b = 0; b < vocab_.size(); ++b) {
            if (!is_masked(ov(a, b)) && !is_masked((*m.confusion)(a, b))) {
              x.push_back(ov(a, b));
              y.push_back((*m.confusion)(a, b));
            }
          }
        }
        try {
          const auto r = stats::pearson(x, y, opt_.permutations,
                                        mix_seed(opt_.seed, kCorrelation, mi * 100 + 99),
                                        opt_.workers);
          t.rows.push_back({m.name, std::string("training_overlap"), std::string("confusion"),
                            r.rho, r.p_value, static_cast<double>(r.n)});
        } catch (const Error&) {
        }
      }
    }
  }

  void smoothing() {
    const auto frames = frame_methods();
    auto& summary = table("smoothing_summary", "Temporal smoothing sweep",
                          {"method", "best_fraction", "loc_map_unsmoothed", "loc_map_best"});
    for (auto* m : frames) {
      const auto s = temporal::smoothing_sweep(m->preds->frames, test_, vocab_, opt_.fractions,
                                               opt_.sampling, eval_);
      auto& t = table("smoothing_" + m->name, "Smoothing sweep: " + m->name,
                      {"fraction", "loc_map", "cls_map"});
      double best = kMasked;
      for (std::size_t i = 0; i < s.fractions.size(); ++i) {
        t.rows.push_back({s.fractions[i], s.localization_map[i], s.classification_map[i]});
        if (s.fractions[i] == s.best_fraction) best = s.localization_map[i];
      }
      summary.rows.push_back({m->name, s.best_fraction, m->loc->mean_ap, best});
      quantity(m->name + ".smoothing_best_fraction", s.best_fraction);
      if (m == &methods_.front()) quantity("smoothing_best_fraction", s.best_fraction);
    }
  }

  void context() {
    auto& summary = table("context_summary", "Context benefit",
                          {"method", "margin", "mean_count", "max_count"});
    for (const auto& m : methods_) {
      const auto b = temporal::context_benefit(m.video, test_, vocab_, opt_.context_margin);
      auto& t = table("context_" + m.name, "Classes raising each class's mean score: " + m.name,
                      {"class_id", "count"});
      double sum = 0.0, mx = 0.0;
      for (std::size_t c = 0; c < vocab_.size(); ++c) {
        const auto n = static_cast<double>(b.counts[c]);
        t.rows.push_back({vocab_[c].id, n});
        sum += n;
        mx = std::max(mx, n);
      }
      const double mean = vocab_.size() ? sum / static_cast<double>(vocab_.size()) : kMasked;
      summary.rows.push_back({m.name, opt_.context_margin, mean, mx});
      quantity(m.name + ".context_mean_count", mean);
    }
  }

  void overlap() {
    add_matrix("overlap", "Fraction of training frames of the row class also labeled with the column class",
               overlap_matrix());
  }

  void oracle_rows(Table& t, const std::string& name, const oracles::OracleOutput& o) {
    const double alone = metrics::classification_map(o.videos, test_, vocab_, eval_).mean_ap;
    quantity("oracle." + name + ".map", alone);
    for (const auto& m : methods_) {
      const auto combined = oracles::combine(o.videos, m.video);
      const double map = metrics::classification_map(combined, test_, vocab_, eval_).mean_ap;
      const double gain = 100.0 * (map - m.cls.mean_ap);
      t.rows.push_back({name, m.name, static_cast<double>(o.fallback_count()), alone,
                        m.cls.mean_ap, map, gain});
      quantity("oracle." + name + "." + m.name + ".combined_map", map);
      if (name == "temporal" && &m == &methods_.front()) {
        quantity("temporal_oracle_gain_points", gain);
      }
    }
  }

  void oracles() {
    auto& t = table("oracles", "Oracles alone and combined with each method",
                    {"oracle", "method", "fallback_videos", "oracle_map", "baseline_map",
                     "combined_map", "gain_points"});
    oracle_rows(t, "object", oracles::object_oracle(test_, vocab_));
    oracle_rows(t, "verb", oracles::verb_oracle(test_, vocab_));
    const auto stats = oracles::build_temporal_stats(train_, vocab_, opt_.sampling);
    oracle_rows(t, "temporal", oracles::temporal_oracle(stats, test_, opt_.sampling));
    for (std::size_t i = 0; i < opt_.intent_ks.size(); ++i) {
      const std::size_t k = opt_.intent_ks[i];
      const std::string name = "intent_" + std::to_string(k);
      try {
        const auto clusters = oracles::build_intent_clusters(
            train_, vocab_, k, mix_seed(opt_.seed, kIntent, i), opt_.workers);
        oracle_rows(t, name, oracles::intent_oracle(clusters, test_));
      } catch (const Error& e) {
        r_.sections.emplace_back("oracles." + name, std::string("skipped: ") + e.what());
      }
    }
    const bool any_pose = std::any_of(in_.auxiliary.begin(), in_.auxiliary.end(),
                                      [](const auto& r) { return r.pose.has_value(); });
    if (!any_pose) {
      r_.sections.emplace_back("oracles.pose", "skipped: no auxiliary poses");
      return;
    }
    oracles::PoseOracleOptions po;
    po.k = opt_.pose_k;
    po.seed = mix_seed(opt_.seed, kPose);
    po.kmeans.workers = opt_.workers;
    try {
      const auto clusters = oracles::build_pose_clusters(train_, in_.auxiliary, vocab_, po);
      oracle_rows(t, "pose", oracles::pose_oracle(clusters, test_, in_.auxiliary));
    } catch (const Error& e) {
      r_.sections.emplace_back("oracles.pose", std::string("skipped: ") + e.what());
    }
  }

  const Inputs& in_;
  const ReportOptions& opt_;
  const corpus::Vocabulary& vocab_;
  const std::vector<VideoAnnotation>& test_;
  const std::vector<VideoAnnotation>& train_;
  metrics::EvalOptions eval_;
  std::vector<MethodData> methods_;
  std::vector<attributes::CategoryAttributes> categories_;
  std::vector<attributes::VideoAttributes> videos_;
  std::optional<Matrix> overlap_;
  std::set<std::string> enabled_;
  std::deque<Table> tables_;  // stable references while sections append
  DiagnosticReport r_;
};

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return format_double(std::get<double>(c));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void markdown_table(std::ostream& out, const Table& t) {
  out << '|';
  for (const auto& c : t.columns) out << ' ' << c << " |";
  out << "\n|";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << " --- |";
  out << '\n';
  for (const auto& row : t.rows) {
    out << '|';
    for (const auto& c : row) {
      const auto text = cell_text(c);
      out << ' ' << (text.empty() ? "-" : text) << " |";
    }
    out << '\n';
  }
  out << '\n';
}

}  // namespace

DiagnosticReport build_report(const Inputs& inputs, const ReportOptions& options) {
  for (const auto& m : inputs.methods) check_method_name(m.name);
  return Builder(inputs, options).run();
}

std::string render_csv(const Table& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << csv_field(table.columns[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << csv_field(cell_text(row[i]));
    }
    out << '\n';
  }
  return out.str();
}

std::string render_json(const DiagnosticReport& report) {
  using nlohmann::json;
  auto number = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["tables"] = json::object();
  for (const auto& t : report.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json r = json::array();
      for (const auto& c : row) {
        if (const auto* s = std::get_if<std::string>(&c)) {
          r.push_back(*s);
        } else {
          r.push_back(number(std::get<double>(c)));
        }
      }
      rows.push_back(std::move(r));
    }
    j["tables"][t.name] = {{"title", t.title}, {"columns", t.columns}, {"rows", std::move(rows)}};
  }
  j["quantities"] = json::object();
  for (const auto& [k, v] : report.quantities) j["quantities"][k] = number(v);
  j["suggestions"] = json::array();
  for (const auto& s : report.suggestions) {
    j["suggestions"].push_back({{"rule", s.rule},
                                {"quantity", s.quantity},
                                {"value", number(s.value)},
                                {"threshold", number(s.threshold)},
                                {"triggered", s.triggered},
                                {"text", s.text}});
  }
  j["sections"] = json::array();
  for (const auto& [k, v] : report.sections) j["sections"].push_back({{"section", k}, {"status", v}});
  return j.dump(1) + "\n";
}

std::string render_summary(const DiagnosticReport& report) {
  std::ostringstream out;
  out << "# Diagnostic summary\n\n";
  auto show = [&](const char* heading, std::string_view name) {
    const auto* t = report.find(name);
    if (!t || t->rows.empty()) return;
    out << "## " << heading << "\n\n";
    markdown_table(out, *t);
  };
  show("Sections", "sections");
  show("Evaluation", "evaluation");
  show("Boundary-excluded localization", "boundary");
  show("Error types of top predictions", "errors_summary");
  show("Correlations", "correlations");
  show("Temporal smoothing", "smoothing_summary");
  show("Context benefit", "context_summary");
  show("Oracles", "oracles");
  show("Suggestions", "suggestions");
  if (const auto* q = report.find("quantities")) {
    out << "## All summary quantities\n\n";
    markdown_table(out, *q);
  }
  const auto fired = report.triggered();
  out << "## Triggered suggestions\n\n";
  if (fired.empty()) out << "None.\n";
  for (const auto* s : fired) {
    out << "- " << s->text << " (" << s->quantity << " = " << format_double(s->value) << " > "
        << format_double(s->threshold) << ")\n";
  }
  return out.str();
}

void write_bundle(const DiagnosticReport& report, const fs::path& dir) {
  const fs::path target = fs::absolute(dir);
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".partial");
  if (fs::exists(target) && !(fs::is_directory(target) && fs::exists(target / "report.json"))) {
    throw Error("refusing to replace '" + target.string() + "': not a report directory");
  }
  fs::remove_all(tmp);
  try {
    fs::create_directories(tmp);
    auto write = [&](const fs::path& name, const std::string& text) {
      std::ofstream f(tmp / name, std::ios::binary);
      f << text;
      if (!f) throw Error("cannot write '" + (tmp / name).string() + "'");
    };
    for (const auto& t : report.tables) write(t.name + ".csv", render_csv(t));
    write("report.json", render_json(report));
    write("summary.md", render_summary(report));
    if (fs::exists(target)) fs::remove_all(target);
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
}

DiagnosticReport run_report(const RunConfig& config) {
  if (config.output.empty()) throw Error("an output directory is required");
  const auto inputs = load_inputs(config);
  auto report = build_report(inputs, config.options);
  write_bundle(report, config.output);
  return report;
}

}  // namespace actdiag::report
