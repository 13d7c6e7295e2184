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
// End-to-end commands behind the dialaug CLI: ingest, augment, stats and
// validate. Each returns the process exit code:
//   0 ok, 1 validation failures, 2 I/O or schema errors,
//   3 pipeline infeasible (insufficient data, empty bank, no dialogue).

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dialaug/composer.hpp"
#include "dialaug/corpus.hpp"
#include "dialaug/realizer.hpp"

namespace dialaug {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitIo = 2,
  kExitInfeasible = 3,
};

struct RunConfig {
  std::string input;
  std::string output;
  std::string input_format = "auto";
  std::string domain = "train";
  std::size_t shots = 5;
  std::uint64_t seed = 0;
  double ratio = 10.0;
  LinkSemantics link_semantics = LinkSemantics::kEquality;
  GrowthLimits limits;
  std::vector<std::string> categorical;
  double tau = 0.5;
  RealizationMode mode = RealizationMode::kExhaustive;
  std::size_t cap = 100;
  bool include_seed = false;
  bool strict = false;
  bool single_domain = false;
  unsigned threads = 1;
  std::string provenance;
  std::string bank_dump;
  std::string tree_dump;
  bool json = false;

  // Accepts flag names with or without dashes ("max-depth", "max_depth").
  // Throws std::invalid_argument for unknown keys or bad values.
  void Set(std::string_view key, std::string_view value);

  // Everything that affects output bytes; threads is left out.
  std::string ToJson() const;
};

// Flat "key = value" lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> ReadConfigFile(
    const std::filesystem::path& path);

struct AugmentSummary {
  std::size_t seed_dialogues = 0;
  std::size_t categorical_labels = 0;
  std::size_t dictionary_labels = 0;
  std::size_t templates_built = 0;
  std::size_t templates_rejected = 0;
  std::size_t total_pairs = 0;
  std::size_t tree_nodes = 0;
  bool tree_truncated = false;
  std::size_t dialogue_templates = 0;
  std::size_t requested = 0;
  std::size_t emitted = 0;
  bool space_exhausted = false;
};

int RunIngest(const RunConfig& config, std::ostream& out, std::ostream& err);
int RunAugment(const RunConfig& config, std::ostream& out, std::ostream& err,
               AugmentSummary* summary = nullptr);
int RunStats(const RunConfig& config, std::ostream& out, std::ostream& err);
int RunValidate(const RunConfig& config, std::ostream& out, std::ostream& err);

struct DomainStats {
  std::string domain;
  std::size_t dialogues = 0;
  double turns_per_dialogue = 0.0;  // two turns per pair
  double values_per_slot = 0.0;
  LabelSet slots;
};

struct CorpusStats {
  std::vector<DomainStats> domains;  // sorted by name
  // Number of dialogues whose belief states mention each label.
  std::map<SlotLabel, std::size_t> slot_fills;
  std::size_t dialogues = 0;
  std::size_t pairs = 0;
};

CorpusStats ComputeStats(const Corpus& corpus);
std::string FormatStats(const CorpusStats& stats, bool with_fills);
std::string StatsJson(const CorpusStats& stats);

}  // namespace dialaug
