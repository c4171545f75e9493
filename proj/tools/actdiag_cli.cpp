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

// actdiag: command line front end. Every subcommand runs a subset of the
// diagnostic report; `report` runs all of it and writes a bundle.

#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "actdiag/report.hpp"

namespace {

using actdiag::report::RunConfig;

struct Args {
  std::string vocab, train, test, aux, reannotations, out;
  std::vector<std::string> preds;
  std::optional<std::uint64_t> seed;
  std::size_t frames_per_video = 25;
  std::size_t resamples = 10000;
  std::size_t permutations = 10000;
  unsigned workers = 1;
};

void add_common(CLI::App* cmd, Args& a) {
  cmd->add_option("--vocab", a.vocab, "vocabulary CSV")->required();
  cmd->add_option("--train", a.train, "training annotations CSV")->required();
  cmd->add_option("--test", a.test, "test annotations CSV")->required();
  cmd->add_option("--pred", a.preds, "named prediction file NAME=PATH (repeatable)");
  cmd->add_option("--aux", a.aux, "auxiliary JSONL");
  cmd->add_option("--reannotations", a.reannotations, "second annotation pass of the test videos");
  cmd->add_option("--seed", a.seed, "random seed");
  cmd->add_option("--frames-per-video", a.frames_per_video, "sampled frames per video")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--resamples", a.resamples, "bootstrap resamples (0 disables intervals)");
  cmd->add_option("--permutations", a.permutations, "permutations per correlation test");
  cmd->add_option("--workers", a.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "output directory");
}

RunConfig make_config(const Args& a) {
  RunConfig c;
  c.vocabulary = a.vocab;
  c.train = a.train;
  c.test = a.test;
  for (const auto& p : a.preds) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) {
      throw actdiag::Error("--pred expects NAME=PATH, got '" + p + "'");
    }
    c.methods.push_back({p.substr(0, eq), p.substr(eq + 1)});
  }
  if (!a.aux.empty()) c.auxiliary = a.aux;
  if (!a.reannotations.empty()) c.reannotations = a.reannotations;
  c.output = a.out;
  c.options.seed = a.seed.value_or(0);
  c.options.sampling.frames_per_video = a.frames_per_video;
  c.options.resamples = a.resamples;
  c.options.permutations = a.permutations;
  c.options.workers = a.workers;
  return c;
}

int run(const std::string& command, const Args& a) {
  static const std::map<std::string, std::vector<std::string>> sections = {
      {"validate", {"validation"}},
      {"eval", {"evaluation"}},
      {"boundary", {"boundary"}},
      {"agreement", {"agreement"}},
      {"errors", {"errors"}},
      {"attributes", {"attributes"}},
      {"correlate", {"curves", "correlations"}},
      {"oracles", {"oracles"}},
      {"smooth", {"smoothing"}},
      {"context", {"context", "overlap"}},
      {"report", {}},
  };
  auto config = make_config(a);
  if (command == "report") {
    if (!a.seed) throw actdiag::Error("report requires --seed");
    if (a.out.empty()) throw actdiag::Error("report requires --out");
    if (config.methods.empty()) throw actdiag::Error("report requires at least one --pred");
  }
  if (command == "agreement" && !config.reannotations) {
    throw actdiag::Error("agreement requires --reannotations");
  }
  config.options.only = sections.at(command);
  const auto inputs = actdiag::report::load_inputs(config);
  const auto report = actdiag::report::build_report(inputs, config.options);
  if (!a.out.empty()) {
    actdiag::report::write_bundle(report, config.output);
    for (const auto* s : report.triggered()) std::cout << "suggestion: " << s->text << '\n';
    std::cout << "wrote " << config.output.string() << '\n';
    return 0;
  }
  for (const auto& t : report.tables) {
    std::cout << "# " << t.name << '\n' << actdiag::report::render_csv(t) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diagnostics for multi-label activity recognition and localization"};
  app.require_subcommand(1);
  Args args;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"validate", "check prediction and auxiliary coverage"},
      {"eval", "classification and per-frame localization mAP"},
      {"boundary", "localization with boundary regions excluded"},
      {"agreement", "agreement between two annotation passes"},
      {"errors", "error types of top predictions and class confusion"},
      {"attributes", "category and video attributes"},
      {"correlate", "accuracy curves and correlations against attributes"},
      {"oracles", "oracles and their combination with each method"},
      {"smooth", "temporal smoothing sweep"},
      {"context", "context benefit and class overlap"},
      {"report", "full diagnostic bundle"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), args);
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, args);
  } catch (const std::exception& e) {
    std::cerr << "actdiag " << command << ": " << e.what() << '\n';
    return 1;
  }
}
