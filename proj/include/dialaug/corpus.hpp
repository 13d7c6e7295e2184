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
// Dialogue data model: slot labels, belief states, turn pairs, dialogues and
// corpora, plus ingestion, serialization, validation and n-shot sampling.

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dialaug/common.hpp"

namespace dialaug {

// "domain-name", e.g. "train-destination". Ordered by canonical text.
class SlotLabel {
 public:
  SlotLabel(std::string_view domain, std::string_view name);

  // Splits at the first '-'. Throws Error(kInvariant) on malformed labels.
  static SlotLabel Parse(std::string_view canonical);

  std::string_view domain() const {
    return std::string_view(text_).substr(0, dash_);
  }
  std::string_view name() const {
    return std::string_view(text_).substr(dash_ + 1);
  }
  const std::string& str() const { return text_; }
  std::string Placeholder() const { return "[" + text_ + "]"; }

  bool operator==(const SlotLabel& o) const { return text_ == o.text_; }
  std::strong_ordering operator<=>(const SlotLabel& o) const {
    int c = text_.compare(o.text_);
    return c < 0 ? std::strong_ordering::less
                 : c > 0 ? std::strong_ordering::greater
                         : std::strong_ordering::equal;
  }

 private:
  std::string text_;
  std::size_t dash_;
};

inline constexpr std::array<std::string_view, 4> kReservedValues = {
    "dontcare", "none", "yes", "no"};

// Special values are function words; they are never delexicalized or
// harvested.
bool IsReservedValue(std::string_view value);

// Sorted, duplicate-free.
using LabelSet = std::vector<SlotLabel>;

std::string LabelSetString(const LabelSet& labels);

class BeliefState {
 public:
  using Map = std::map<SlotLabel, std::string>;

  BeliefState() = default;

  // Returns false when the label is already present.
  bool Insert(const SlotLabel& label, std::string value);
  void Set(const SlotLabel& label, std::string value) {
    entries_[label] = std::move(value);
  }
  const std::string* Find(const SlotLabel& label) const;
  bool Contains(const SlotLabel& label) const {
    return entries_.count(label) != 0;
  }
  LabelSet Labels() const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

  bool operator==(const BeliefState&) const = default;

 private:
  Map entries_;
};

struct TurnPair {
  std::size_t index = 0;
  std::string system_utterance;  // empty for index 0
  std::string user_utterance;
  BeliefState belief;  // state after the user utterance

  bool operator==(const TurnPair&) const = default;
};

struct Dialogue {
  std::string id;
  std::set<std::string> domains;
  std::vector<TurnPair> pairs;

  // Domains of every label appearing in any belief state.
  std::set<std::string> MentionedDomains() const;

  bool operator==(const Dialogue&) const = default;
};

struct Corpus {
  std::vector<Dialogue> dialogues;
  std::string source;

  std::size_t PairCount() const;
};

enum class Speaker { kUser, kSystem };

struct RawTurn {
  Speaker speaker = Speaker::kUser;
  std::string text;
  std::optional<BeliefState> belief;
};

// Pair k = (system turn preceding user turn k, user turn k). A trailing
// system turn has no user reply and is dropped.
std::vector<TurnPair> PairTurns(const std::vector<RawTurn>& turns,
                                std::string_view dialogue_id = {});

enum class InputSchema { kAuto, kNative, kMultiWoz };

InputSchema ParseInputSchema(std::string_view name);

Corpus ParseCorpus(std::string_view json_text, InputSchema schema,
                   std::string source);
Corpus LoadCorpus(const std::filesystem::path& path,
                  InputSchema schema = InputSchema::kAuto);

// Native schema, deterministic bytes (2-space indent, trailing newline).
std::string SerializeCorpus(const Corpus& corpus);
std::string SerializeDialogues(const std::vector<Dialogue>& dialogues);
void WriteTextFile(const std::filesystem::path& path, std::string_view bytes);
std::string ReadTextFile(const std::filesystem::path& path);

enum class Severity { kWarning, kError };

struct Violation {
  Severity severity = Severity::kWarning;
  std::string code;  // "non_cumulative", "empty_user_utterance", ...
  std::string message;
  std::optional<std::size_t> pair_index;
};

struct ValidationReport {
  std::string dialogue_id;
  std::vector<Violation> violations;

  std::size_t ErrorCount() const;
  std::size_t WarningCount() const;
  bool ok() const { return ErrorCount() == 0; }
  bool empty() const { return violations.empty(); }
};

// Checks cumulativity of belief label sets, empty user utterances,
// undeclared domains and residual "[domain-name]" placeholders. strict
// promotes non-cumulativity and placeholders from warnings to errors.
ValidationReport ValidateDialogue(const Dialogue& dialogue, bool strict);

// n dialogues drawn uniformly without replacement from those touching
// domain (or, with single_domain, touching only domain). Result is sorted
// by id. Throws Error(kInsufficientData).
Corpus SampleShots(const Corpus& corpus, std::size_t n,
                   std::string_view domain, std::uint64_t seed,
                   bool single_domain = false);

}  // namespace dialaug
