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

#include "actdiag/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace actdiag::corpus {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t begin = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > begin) out.push_back(s.substr(begin, i - begin));
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Reads lines, tracking 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  std::size_t number() const { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<std::string> parse_declaration(std::string_view value) {
  std::vector<std::string> out;
  for (auto part : split(value, ',')) {
    part = trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::size_t component_index(const std::vector<std::string>& sorted,
                            const std::string& id) {
  return static_cast<std::size_t>(
      std::lower_bound(sorted.begin(), sorted.end(), id) - sorted.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<ActivityCategory> categories,
                       std::vector<std::string> declared_verbs,
                       std::vector<std::string> declared_objects)
    : categories_(std::move(categories)) {
  std::stable_sort(categories_.begin(), categories_.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (!by_id_.emplace(categories_[i].id, i).second) {
      throw Error("duplicate category id '" + categories_[i].id + "'");
    }
  }
  std::vector<std::string> used_verbs, used_objects;
  for (const auto& c : categories_) {
    used_verbs.push_back(c.verb_id);
    used_objects.push_back(c.object_id);
  }
  verbs_ = sorted_unique(declared_verbs.empty() ? used_verbs : declared_verbs);
  objects_ = sorted_unique(declared_objects.empty() ? used_objects : declared_objects);
  for (const auto& c : categories_) {
    const auto v = component_index(verbs_, c.verb_id);
    if (v == verbs_.size() || verbs_[v] != c.verb_id) {
      throw Error("category '" + c.id + "' references unknown verb '" + c.verb_id + "'");
    }
    const auto o = component_index(objects_, c.object_id);
    if (o == objects_.size() || objects_[o] != c.object_id) {
      throw Error("category '" + c.id + "' references unknown object '" +
                  c.object_id + "'");
    }
    verb_index_.push_back(v);
    object_index_.push_back(o);
  }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

Vocabulary load_vocabulary(std::istream& in, std::string_view source) {
  LineReader reader(in);
  std::string line;
  bool seen_header = false;
  std::vector<ActivityCategory> categories;
  std::vector<std::size_t> line_of;
  std::vector<std::string> verbs, objects;
  std::set<std::string> seen;
  while (reader.next(line)) {
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      if (text.starts_with("#verbs=")) {
        verbs = parse_declaration(text.substr(7));
      } else if (text.starts_with("#objects=")) {
        objects = parse_declaration(text.substr(9));
      }
      continue;
    }
    if (!seen_header) {
      const auto fields = split(text, ',');
      if (fields.size() < 3 || trim(fields[0]) != "class_id") {
        throw ParseError(source, reader.number(),
                         "missing header 'class_id,verb_id,object_id,description'");
      }
      seen_header = true;
      continue;
    }
    auto fields = split(text, ',');
    if (fields.size() < 3) {
      throw ParseError(source, reader.number(),
                       "malformed line: expected class_id,verb_id,object_id,description");
    }
    ActivityCategory c;
    c.id = std::string(trim(fields[0]));
    c.verb_id = std::string(trim(fields[1]));
    c.object_id = std::string(trim(fields[2]));
    if (fields.size() > 3) {
      // The description is free text and may contain commas.
      const auto offset = static_cast<std::size_t>(fields[3].data() - text.data());
      c.description = std::string(trim(text.substr(offset)));
    }
    if (c.id.empty() || c.verb_id.empty() || c.object_id.empty()) {
      throw ParseError(source, reader.number(), "malformed line: empty identifier");
    }
    if (!seen.insert(c.id).second) {
      throw ParseError(source, reader.number(), "duplicate id '" + c.id + "'");
    }
    categories.push_back(std::move(c));
    line_of.push_back(reader.number());
  }
  if (categories.empty()) throw ParseError(source, reader.number(), "empty vocabulary");
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const auto& c = categories[i];
    if (!verbs.empty() && std::find(verbs.begin(), verbs.end(), c.verb_id) == verbs.end()) {
      throw ParseError(source, line_of[i], "unknown verb reference '" + c.verb_id + "'");
    }
    if (!objects.empty() &&
        std::find(objects.begin(), objects.end(), c.object_id) == objects.end()) {
      throw ParseError(source, line_of[i], "unknown object reference '" + c.object_id + "'");
    }
  }
  return Vocabulary(std::move(categories), std::move(verbs), std::move(objects));
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  out << "#verbs=";
  for (std::size_t i = 0; i < vocab.verbs().size(); ++i) {
    out << (i ? "," : "") << vocab.verbs()[i];
  }
  out << "\n#objects=";
  for (std::size_t i = 0; i < vocab.objects().size(); ++i) {
    out << (i ? "," : "") << vocab.objects()[i];
  }
  out << "\nclass_id,verb_id,object_id,description\n";
  for (const auto& c : vocab.categories()) {
    out << c.id << ',' << c.verb_id << ',' << c.object_id << ',' << c.description << '\n';
  }
}

// ---------------------------------------------------------------------------
// Annotations

bool VideoAnnotation::labeled_at(std::size_t category, double t) const {
  for (const auto& inst : instances) {
    if (inst.category == category && inst.contains(t)) return true;
  }
  return false;
}

bool VideoAnnotation::has_category(std::size_t category) const {
  return std::any_of(instances.begin(), instances.end(),
                     [&](const auto& i) { return i.category == category; });
}

std::vector<VideoAnnotation> load_annotations(std::istream& in, const Vocabulary& vocab,
                                              std::string_view source) {
  LineReader reader(in);
  std::string line;
  std::vector<VideoAnnotation> videos;
  std::unordered_set<std::string> seen;
  bool first = true;
  while (reader.next(line)) {
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (first) {
      first = false;
      if (text.starts_with("video_id,")) continue;
    }
    const auto fields = split(text, ',');
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError(source, reader.number(),
                       "malformed line: expected video_id,duration_seconds,actions");
    }
    VideoAnnotation video;
    video.video_id = std::string(trim(fields[0]));
    if (video.video_id.empty()) throw ParseError(source, reader.number(), "empty video id");
    const auto duration = parse_number(fields[1]);
    if (!duration || !std::isfinite(*duration)) {
      throw ParseError(source, reader.number(), "non-numeric duration");
    }
    if (*duration <= 0) throw ParseError(source, reader.number(), "duration must be > 0");
    video.duration = *duration;
    if (fields.size() == 4) video.dataset = std::string(trim(fields[3]));
    const auto actions = trim(fields[2]);
    if (!actions.empty()) {
      for (auto item : split(actions, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto parts = split_ws(item);
        if (parts.size() != 3) {
          throw ParseError(source, reader.number(),
                           "malformed action '" + std::string(item) + "'");
        }
        const auto cat = vocab.index_of(parts[0]);
        if (!cat) {
          throw ParseError(source, reader.number(),
                           "unknown category id '" + std::string(parts[0]) + "'");
        }
        const auto start = parse_number(parts[1]);
        const auto end = parse_number(parts[2]);
        if (!start || !end || !std::isfinite(*start) || !std::isfinite(*end)) {
          throw ParseError(source, reader.number(), "non-numeric timestamp");
        }
        if (*start >= *end) throw ParseError(source, reader.number(), "start >= end");
        ActivityInstance inst{*cat, std::max(0.0, *start), std::min(video.duration, *end)};
        if (inst.start >= inst.end) {
          throw ParseError(source, reader.number(), "instance lies outside the video");
        }
        video.instances.push_back(inst);
      }
    }
    if (!seen.insert(video.video_id).second) {
      throw ParseError(source, reader.number(), "duplicate video id '" + video.video_id + "'");
    }
    videos.push_back(std::move(video));
  }
  return videos;
}

void write_annotations(std::ostream& out, const std::vector<VideoAnnotation>& videos,
                       const Vocabulary& vocab) {
  const bool with_dataset = std::any_of(videos.begin(), videos.end(),
                                        [](const auto& v) { return !v.dataset.empty(); });
  out << "video_id,duration_seconds,actions" << (with_dataset ? ",dataset" : "") << '\n';
  for (const auto& v : videos) {
    out << v.video_id << ',' << format_double(v.duration) << ',';
    for (std::size_t i = 0; i < v.instances.size(); ++i) {
      const auto& inst = v.instances[i];
      out << (i ? ";" : "") << vocab[inst.category].id << ' ' << format_double(inst.start)
          << ' ' << format_double(inst.end);
    }
    if (with_dataset) out << ',' << v.dataset;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Predictions

double FramePredictions::frame_period() const {
  if (frame_times.size() < 2) return std::numeric_limits<double>::infinity();
  std::vector<double> gaps(frame_times.size() - 1);
  for (std::size_t i = 1; i < frame_times.size(); ++i) {
    gaps[i - 1] = frame_times[i] - frame_times[i - 1];
  }
  const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return *mid;
}

std::optional<std::size_t> FramePredictions::nearest_frame(double t) const {
  if (frame_times.empty()) return std::nullopt;
  const auto it = std::lower_bound(frame_times.begin(), frame_times.end(), t);
  std::size_t best;
  if (it == frame_times.end()) {
    best = frame_times.size() - 1;
  } else if (it == frame_times.begin()) {
    best = 0;
  } else {
    const auto hi = static_cast<std::size_t>(it - frame_times.begin());
    best = (t - frame_times[hi - 1] <= frame_times[hi] - t) ? hi - 1 : hi;
  }
  const double period = frame_period();
  if (std::abs(frame_times[best] - t) > period * (1.0 + 1e-9) + 1e-9) return std::nullopt;
  return best;
}

std::vector<std::string> PredictionSet::video_ids() const {
  std::vector<std::string> ids;
  if (mode == PredictionMode::kVideo) {
    for (const auto& v : videos) ids.push_back(v.video_id);
  } else {
    for (const auto& f : frames) ids.push_back(f.video_id);
  }
  return ids;
}

namespace {

std::vector<double> parse_scores(std::span<const std::string_view> tokens,
                                 std::string_view source, std::size_t line) {
  std::vector<double> scores;
  scores.reserve(tokens.size());
  for (const auto tok : tokens) {
    const auto v = parse_number(tok);
    if (!v) throw ParseError(source, line, "non-numeric score '" + std::string(tok) + "'");
    if (!std::isfinite(*v)) throw ParseError(source, line, "non-finite score");
    scores.push_back(*v);
  }
  return scores;
}

}  // namespace

PredictionSet load_predictions(std::istream& in, const Vocabulary& vocab, PredictionMode mode,
                               std::string_view source) {
  LineReader reader(in);
  std::string line;
  PredictionSet set;
  set.mode = mode;
  std::optional<double> fps;
  std::unordered_map<std::string, std::size_t> index;
  const std::size_t width = vocab.size();
  const std::size_t lead = mode == PredictionMode::kVideo ? 1 : 2;
  while (reader.next(line)) {
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      if (text.starts_with("#fps=")) {
        const auto v = parse_number(text.substr(5));
        if (!v || !(*v > 0) || !std::isfinite(*v)) {
          throw ParseError(source, reader.number(), "invalid fps header");
        }
        fps = *v;
      }
      continue;
    }
    const auto tokens = split_ws(text);
    if (tokens.size() != lead + width) {
      throw ParseError(source, reader.number(),
                       "width mismatch: expected " + std::to_string(width) + " scores, got " +
                           std::to_string(tokens.size() < lead ? 0 : tokens.size() - lead));
    }
    std::string id(tokens[0]);
    auto scores = parse_scores(std::span(tokens).subspan(lead), source, reader.number());
    if (mode == PredictionMode::kVideo) {
      if (!index.emplace(id, set.videos.size()).second) {
        throw ParseError(source, reader.number(), "duplicate video id '" + id + "'");
      }
      set.videos.push_back({std::move(id), std::move(scores)});
      continue;
    }
    const auto frame = parse_number(tokens[1]);
    if (!frame || !std::isfinite(*frame)) {
      throw ParseError(source, reader.number(), "non-numeric frame index");
    }
    const double time = fps ? *frame / *fps : *frame;
    auto [it, inserted] = index.emplace(id, set.frames.size());
    if (inserted) {
      FramePredictions fp;
      fp.video_id = id;
      fp.num_classes = width;
      set.frames.push_back(std::move(fp));
    }
    auto& fp = set.frames[it->second];
    if (!fp.frame_times.empty() && time <= fp.frame_times.back()) {
      throw ParseError(source, reader.number(),
                       "frame index decreasing within video '" + id + "'");
    }
    fp.frame_times.push_back(time);
    fp.scores.insert(fp.scores.end(), scores.begin(), scores.end());
  }
  return set;
}

PredictionSet load_predictions_auto(std::istream& in, const Vocabulary& vocab,
                                    std::string_view source) {
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  PredictionMode mode = PredictionMode::kVideo;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    const auto text = trim(std::string_view(content).substr(pos, end - pos));
    pos = end + 1;
    if (text.empty() || text.front() == '#') continue;
    if (split_ws(text).size() == vocab.size() + 2) mode = PredictionMode::kFrame;
    break;
  }
  std::istringstream stream(std::move(content));
  return load_predictions(stream, vocab, mode, source);
}

void write_predictions(std::ostream& out, const PredictionSet& preds) {
  if (preds.mode == PredictionMode::kVideo) {
    for (const auto& v : preds.videos) {
      out << v.video_id;
      for (double s : v.scores) out << ' ' << format_double(s);
      out << '\n';
    }
    return;
  }
  for (const auto& f : preds.frames) {
    for (std::size_t i = 0; i < f.frame_count(); ++i) {
      out << f.video_id << ' ' << format_double(f.frame_times[i]);
      for (double s : f.row(i)) out << ' ' << format_double(s);
      out << '\n';
    }
  }
}

std::vector<VideoPredictions> pool_frames(std::span<const FramePredictions> frames) {
  std::vector<VideoPredictions> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    VideoPredictions v{f.video_id, std::vector<double>(f.num_classes, 0.0)};
    if (f.frame_count() > 0) {
      auto first = f.row(0);
      std::copy(first.begin(), first.end(), v.scores.begin());
      for (std::size_t i = 1; i < f.frame_count(); ++i) {
        auto r = f.row(i);
        for (std::size_t c = 0; c < f.num_classes; ++c) v.scores[c] = std::max(v.scores[c], r[c]);
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<VideoPredictions> video_level(const PredictionSet& preds) {
  if (preds.mode == PredictionMode::kVideo) return preds.videos;
  return pool_frames(preds.frames);
}

// ---------------------------------------------------------------------------
// Auxiliary

std::vector<AuxiliaryRecord> load_auxiliary(std::istream& in, std::string_view source) {
  LineReader reader(in);
  std::string line;
  std::vector<AuxiliaryRecord> records;
  std::optional<std::size_t> keypoint_count;
  auto finite = [&](const nlohmann::json& j, const char* what) {
    if (!j.is_number()) throw ParseError(source, reader.number(), std::string(what) + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(source, reader.number(), std::string(what) + " must be finite");
    return v;
  };
  while (reader.next(line)) {
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, reader.number(), std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("video_id") || !j["video_id"].is_string()) {
      throw ParseError(source, reader.number(), "record needs a string video_id");
    }
    if (!j.contains("frame_time")) throw ParseError(source, reader.number(), "record needs frame_time");
    AuxiliaryRecord r;
    r.video_id = j["video_id"].get<std::string>();
    r.frame_time = finite(j["frame_time"], "frame_time");
    if (j.contains("person_box") && !j["person_box"].is_null()) {
      const auto& b = j["person_box"];
      if (!b.is_array() || b.size() != 4) {
        throw ParseError(source, reader.number(), "person_box must be [x, y, w, h]");
      }
      r.person_box = PersonBox{finite(b[0], "person_box"), finite(b[1], "person_box"),
                               finite(b[2], "person_box"), finite(b[3], "person_box")};
    }
    if (j.contains("person_count") && !j["person_count"].is_null()) {
      if (!j["person_count"].is_number_integer()) {
        throw ParseError(source, reader.number(), "person_count must be an integer");
      }
      r.person_count = j["person_count"].get<int>();
    }
    if (j.contains("motion") && !j["motion"].is_null()) r.motion = finite(j["motion"], "motion");
    if (j.contains("pose") && !j["pose"].is_null()) {
      const auto& p = j["pose"];
      if (!p.is_array()) throw ParseError(source, reader.number(), "pose must be a list");
      Pose pose;
      for (const auto& kp : p) {
        if (!kp.is_array() || kp.size() != 3) {
          throw ParseError(source, reader.number(), "keypoint must be [x, y, confidence]");
        }
        pose.keypoints.push_back(
            {finite(kp[0], "keypoint"), finite(kp[1], "keypoint"), finite(kp[2], "keypoint")});
      }
      if (keypoint_count && *keypoint_count != pose.keypoints.size()) {
        throw ParseError(source, reader.number(), "pose keypoint count differs from earlier records");
      }
      keypoint_count = pose.keypoints.size();
      r.pose = std::move(pose);
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_auxiliary(std::ostream& out, const std::vector<AuxiliaryRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["video_id"] = r.video_id;
    j["frame_time"] = r.frame_time;
    if (r.person_box) {
      j["person_box"] = {r.person_box->x, r.person_box->y, r.person_box->w, r.person_box->h};
    }
    if (r.person_count) j["person_count"] = *r.person_count;
    if (r.motion) j["motion"] = *r.motion;
    if (r.pose) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& kp : r.pose->keypoints) arr.push_back({kp.x, kp.y, kp.confidence});
      j["pose"] = std::move(arr);
    }
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Charades import

Vocabulary import_charades_vocabulary(std::istream& classes, std::istream& mapping) {
  std::map<std::string, ActivityCategory> by_id;
  LineReader cr(classes);
  std::string line;
  while (cr.next(line)) {
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto space = text.find(' ');
    if (space == std::string_view::npos) {
      throw ParseError("Charades_v1_classes.txt", cr.number(), "malformed class line");
    }
    auto& c = by_id[std::string(text.substr(0, space))];
    c.id = std::string(text.substr(0, space));
    c.description = std::string(trim(text.substr(space + 1)));
  }
  LineReader mr(mapping);
  while (mr.next(line)) {
    const auto tokens = split_ws(trim(line));
    if (tokens.empty()) continue;
    if (tokens.size() != 3) {
      throw ParseError("Charades_v1_mapping.txt", mr.number(), "expected 'class object verb'");
    }
    const auto it = by_id.find(std::string(tokens[0]));
    if (it == by_id.end()) {
      throw ParseError("Charades_v1_mapping.txt", mr.number(), "unknown class id");
    }
    it->second.object_id = std::string(tokens[1]);
    it->second.verb_id = std::string(tokens[2]);
  }
  std::vector<ActivityCategory> cats;
  for (auto& [id, c] : by_id) {
    if (c.verb_id.empty()) throw Error("class '" + id + "' has no verb/object mapping");
    cats.push_back(std::move(c));
  }
  return Vocabulary(std::move(cats));
}

namespace {

// RFC 4180 style record reader supporting quoted fields with embedded
// newlines and doubled quotes.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string field;
  bool quoted = false, any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

std::vector<VideoAnnotation> import_charades_annotations(std::istream& csv,
                                                         const Vocabulary& vocab) {
  constexpr std::string_view kSource = "Charades csv";
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!read_csv_record(csv, fields, line)) throw ParseError(kSource, 1, "empty file");
  auto column = [&](std::string_view name) {
    const auto it = std::find(fields.begin(), fields.end(), name);
    if (it == fields.end()) throw ParseError(kSource, 1, "missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - fields.begin());
  };
  const auto id_col = column("id");
  const auto actions_col = column("actions");
  const auto length_col = column("length");
  std::ostringstream converted;
  converted << "video_id,duration_seconds,actions\n";
  std::vector<std::size_t> source_lines;
  while (read_csv_record(csv, fields, line)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    const auto need = std::max({id_col, actions_col, length_col});
    if (fields.size() <= need) throw ParseError(kSource, line + 1, "too few columns");
    // The release holds a few zero-length actions and actions past the
    // reported length; those are dropped.
    const auto length = parse_number(fields[length_col]);
    std::string actions;
    for (auto item : split(fields[actions_col], ';')) {
      const auto parts = split_ws(trim(item));
      if (parts.size() == 3 && length) {
        const auto start = parse_number(parts[1]), end = parse_number(parts[2]);
        if (start && end && (*start >= *end || *start >= *length)) continue;
      }
      if (!actions.empty()) actions += ';';
      actions += trim(item);
    }
    converted << fields[id_col] << ',' << fields[length_col] << ',' << actions << ",Charades\n";
  }
  std::istringstream in(converted.str());
  return load_annotations(in, vocab, kSource);
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_corpus(std::span<const VideoAnnotation> annotations,
                                 const PredictionSet& predictions,
                                 std::span<const AuxiliaryRecord> auxiliary) {
  ValidationReport report;
  const auto pred_ids = predictions.video_ids();
  const std::unordered_set<std::string> predicted(pred_ids.begin(), pred_ids.end());
  std::unordered_set<std::string> annotated;
  for (const auto& v : annotations) {
    annotated.insert(v.video_id);
    if (!predicted.count(v.video_id)) report.missing_predictions.push_back(v.video_id);
  }
  for (const auto& id : pred_ids) {
    if (!annotated.count(id)) report.unannotated_predictions.push_back(id);
  }
  std::unordered_set<std::string> with_aux;
  for (const auto& r : auxiliary) {
    if (annotated.count(r.video_id)) with_aux.insert(r.video_id);
  }
  report.auxiliary_videos = with_aux.size();
  report.auxiliary_coverage =
      annotations.empty() ? 0.0
                          : static_cast<double>(with_aux.size()) / static_cast<double>(annotations.size());
  return report;
}

}  // namespace actdiag::corpus
