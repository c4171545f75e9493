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

// Full diagnostic run: every analysis over one corpus and a set of named
// prediction files, collected into tables, summary quantities and
// threshold-rule suggestions, and written as a bundle of
// summary.md + report.json + one CSV per table.

#ifndef ACTDIAG_REPORT_HPP_
#define ACTDIAG_REPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "actdiag/corpus.hpp"
#include "actdiag/metrics.hpp"
#include "actdiag/temporal.hpp"

namespace actdiag::report {

using Cell = std::variant<std::string, double>;

struct Table {
  std::string name;  // also the CSV file stem
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Fires when the named quantity is present and strictly above threshold.
struct Rule {
  std::string id;
  std::string quantity;
  double threshold = 0.0;
  std::string text;
};

struct Suggestion {
  std::string rule;
  std::string quantity;
  double value = kMasked;
  double threshold = 0.0;
  bool triggered = false;
  std::string text;
};

struct DiagnosticReport {
  std::vector<Table> tables;
  std::map<std::string, double> quantities;
  std::vector<Suggestion> suggestions;
  std::vector<std::pair<std::string, std::string>> sections;  // name, "ok" or "skipped: ..."

  const Table* find(std::string_view name) const;
  std::vector<const Suggestion*> triggered() const;
};

// Section names in execution order.
inline const std::vector<std::string> kSections = {
    "validation", "evaluation", "boundary", "agreement", "errors",  "attributes", "curves",
    "correlations", "smoothing", "context", "overlap", "oracles", "suggestions"};

// Default thresholds:
//   boundary-excluded localization gain     > 1 mAP point
//   -rho(class AP, object complexity)       > 0.3
//   best smoothing fraction                 > 0
//   person-size peak in an interior bin     > 0.5 (indicator)
//   temporal oracle gain over the baseline  > 5 mAP points
std::vector<Rule> default_rules();

// Evaluates every rule against report.quantities.
std::vector<Suggestion> suggest(const DiagnosticReport& report, std::span<const Rule> rules);

struct NamedPredictions {
  std::string name;
  corpus::PredictionSet predictions;
};

struct Inputs {
  corpus::Corpus corpus;
  std::vector<NamedPredictions> methods;  // the first is the primary method
  std::vector<corpus::AuxiliaryRecord> auxiliary;
  std::optional<std::vector<corpus::VideoAnnotation>> reannotations;
};

struct ReportOptions {
  std::uint64_t seed = 0;
  metrics::Sampling sampling;
  std::vector<double> fractions = temporal::kDefaultFractions;
  std::vector<std::size_t> intent_ks = {30, 50};
  std::size_t pose_k = 500;
  std::size_t bins = 6;
  std::size_t resamples = 10000;
  std::size_t permutations = 10000;
  std::size_t max_pairs = 10000;
  std::size_t similarity_max_pairs = 1000;
  double context_margin = 0.0;
  std::vector<Rule> rules = default_rules();
  // Subset of kSections to run; empty runs everything. Sections the chosen
  // ones depend on run too.
  std::vector<std::string> only;
  unsigned workers = 1;  // never affects results
};

struct MethodPath {
  std::string name;
  std::filesystem::path path;
};

struct RunConfig {
  std::filesystem::path vocabulary;
  std::filesystem::path train;
  std::filesystem::path test;
  std::vector<MethodPath> methods;
  std::optional<std::filesystem::path> auxiliary;
  std::optional<std::filesystem::path> reannotations;
  std::filesystem::path output;
  ReportOptions options;
};

// Method names become file names: letters, digits, '-', '_' and '.' only.
void check_method_name(std::string_view name);

// Throws Error naming the first missing path. Prediction sets may be empty
// when only corpus sections are requested.
Inputs load_inputs(const RunConfig& config);

DiagnosticReport build_report(const Inputs& inputs, const ReportOptions& options);

std::string render_summary(const DiagnosticReport& report);
std::string render_json(const DiagnosticReport& report);
std::string render_csv(const Table& table);

// Writes the bundle into a sibling temporary directory and renames it into
// place; an existing directory is replaced only if it holds a report.json.
void write_bundle(const DiagnosticReport& report, const std::filesystem::path& dir);

DiagnosticReport run_report(const RunConfig& config);

}  // namespace actdiag::report

#endif  // ACTDIAG_REPORT_HPP_
