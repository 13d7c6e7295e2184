// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// \file
// dialaug: few-shot task-oriented dialogue augmentation.
//
//   dialaug ingest   --input data.json --output corpus.json
//   dialaug augment  --input corpus.json --output synthetic.json \
//                    --domain train --shots 5 --ratio 20 --seed 7
//   dialaug stats    --input corpus.json
//   dialaug validate --input synthetic.json --strict
//
// Values come from built-in defaults, then --config (flat key = value
// file), then command-line flags.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dialaug/pipeline.hpp"

namespace {

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, CLI::Option*> flags;
  std::string config_path;

  void Value(const std::string& name, const std::string& help) {
    options[name] = app->add_option("--" + name, values[name], help);
  }
  void Flag(const std::string& name, const std::string& help) {
    flags[name] = app->add_flag("--" + name, help);
  }

  dialaug::RunConfig Resolve() const {
    dialaug::RunConfig config;
    if (!config_path.empty()) {
      for (const auto& [key, value] : dialaug::ReadConfigFile(config_path)) {
        config.Set(key, value);
      }
    }
    for (const auto& [name, opt] : options) {
      if (opt->count() > 0) config.Set(name, values.at(name));
    }
    for (const auto& [name, opt] : flags) {
      if (opt->count() > 0) config.Set(name, "true");
    }
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot task-oriented dialogue augmentation"};
  app.require_subcommand(1);

  Subcommand ingest{app.add_subcommand(
      "ingest", "Normalize a corpus (native or MultiWOZ data.json)")};
  Subcommand augment{app.add_subcommand(
      "augment", "Sample seed dialogues and generate synthetic ones")};
  Subcommand stats{app.add_subcommand("stats", "Per-domain corpus statistics")};
  Subcommand validate{
      app.add_subcommand("validate", "Check dialogue and annotation invariants")};

  for (Subcommand* sub : {&ingest, &augment, &stats, &validate}) {
    sub->Value("input", "Input corpus file");
    sub->Value("format", "Input schema: auto, native or multiwoz");
    sub->app->add_option("--config", sub->config_path,
                         "Flat key = value config file");
  }
  ingest.Value("output", "Normalized corpus file to write");

  augment.Value("output", "Synthetic corpus file to write");
  augment.Value("domain", "Target domain of the n-shot sample");
  augment.Value("shots", "Number of seed dialogues");
  augment.Value("seed", "Random seed");
  augment.Value("ratio", "Synthetic dialogues per seed dialogue");
  augment.Value("link-semantics", "equality or superset");
  augment.Value("max-depth", "Max turn pairs per dialogue template");
  augment.Value("max-nodes", "Template tree node budget");
  augment.Value("reuse", "Max uses of one template per path");
  augment.Value("categorical", "Comma list of categorical slot labels");
  augment.Value("tau", "Findability threshold for categorical slots");
  augment.Value("mode", "exhaustive or sampled");
  augment.Value("cap", "Assignments per dialogue template (sampled)");
  augment.Value("threads", "Worker threads");
  augment.Value("provenance", "Provenance sidecar file to write");
  augment.Value("bank-dump", "Write the template bank as JSON");
  augment.Value("tree-dump", "Write the template tree as JSON lines");
  augment.Flag("include-seed", "Prepend the seed dialogues to the output");
  augment.Flag("strict", "Strict validation of seed dialogues");
  augment.Flag("single-domain",
               "Only sample dialogues that mention no other domain");

  stats.Flag("json", "Machine-readable output");
  validate.Flag("strict", "Treat non-cumulative beliefs as errors");
  validate.Flag("json", "Machine-readable report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : dialaug::kExitIo;
  }

  try {
    if (*ingest.app) {
      return dialaug::RunIngest(ingest.Resolve(), std::cout, std::cerr);
    }
    if (*augment.app) {
      return dialaug::RunAugment(augment.Resolve(), std::cout, std::cerr);
    }
    if (*stats.app) {
      return dialaug::RunStats(stats.Resolve(), std::cout, std::cerr);
    }
    return dialaug::RunValidate(validate.Resolve(), std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dialaug::kExitIo;
  }
}
