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
// Turn-pair templates and the bank that indexes them by dialogue function.
//
// A template's function is the triple of belief-state label sets of the
// previous, current and next pair in its source dialogue. Pair 0 has a
// null previous state and the last pair a null next state; null is
// distinct from the empty set.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dialaug/corpus.hpp"
#include "dialaug/delex.hpp"

namespace dialaug {

using TemplateId = std::uint32_t;

inline constexpr std::string_view kNullMarker = "__null__";

struct FunctionKey {
  std::optional<LabelSet> prev;
  LabelSet cur;
  std::optional<LabelSet> next;

  bool operator==(const FunctionKey&) const = default;
};

struct TemplateSource {
  std::string dialogue_id;
  std::size_t pair_index = 0;
};

struct TurnPairTemplate {
  TemplateId id = 0;
  TemplateSource source;
  std::string delex_system;
  std::string delex_user;
  std::vector<Substitution> subs;
  FunctionKey function;
  std::optional<BeliefState> prev_belief;
  BeliefState cur_belief;
  std::optional<BeliefState> next_belief;

  bool IsRoot() const { return !function.prev.has_value(); }
  bool IsTerminal() const { return !function.next.has_value(); }
};

struct PairRejection {
  TemplateSource source;
  Rejection rejection;
};

struct DialogueTemplates {
  std::vector<TurnPairTemplate> templates;  // ids not yet assigned
  std::vector<PairRejection> rejections;
};

// One template per accepted pair. Neighbour states always come from the
// original dialogue, also next to a rejected pair.
DialogueTemplates MakeTemplates(const Dialogue& dialogue,
                                const CategoricalPolicy& policy);

// How "met by" is read in the two link conditions.
enum class LinkSemantics { kEquality, kSuperset };

LinkSemantics ParseLinkSemantics(std::string_view name);
std::string_view LinkSemanticsName(LinkSemantics semantics);

// Can `next` follow `prev`? Requires prev.function.next to be non-null.
//   (1) next.cur relates to prev.next
//   (2) next.prev relates to prev.cur
bool CheckLink(const TurnPairTemplate& prev, const TurnPairTemplate& next,
               LinkSemantics semantics);

class TemplateBank {
 public:
  // Throws Error(kEmptyBank) when no template survives.
  static TemplateBank Build(const Corpus& corpus,
                            const CategoricalPolicy& policy);

  const std::vector<TurnPairTemplate>& templates() const { return templates_; }
  const TurnPairTemplate& at(TemplateId id) const { return templates_.at(id); }
  std::size_t size() const { return templates_.size(); }

  const std::vector<TemplateId>& roots() const { return roots_; }
  const std::vector<TemplateId>& terminals() const { return terminals_; }
  const std::vector<PairRejection>& rejections() const { return rejections_; }
  const CategoricalPolicy& policy() const { return policy_; }
  std::size_t total_pairs() const { return total_pairs_; }

  // Templates whose previous label set equals key (nullopt: roots).
  const std::vector<TemplateId>& ByPrev(
      const std::optional<LabelSet>& key) const;
  const std::map<std::optional<LabelSet>, std::vector<TemplateId>>& by_prev()
      const {
    return by_prev_;
  }

  // All templates that may follow t, ordered by id. Empty for terminals.
  std::vector<TemplateId> Successors(
      const TurnPairTemplate& t,
      LinkSemantics semantics = LinkSemantics::kEquality) const;

  // JSON list of {id, source, delex_system, delex_user, function}.
  std::string DumpJson() const;

 private:
  std::vector<TurnPairTemplate> templates_;
  std::vector<TemplateId> roots_;
  std::vector<TemplateId> terminals_;
  std::map<std::optional<LabelSet>, std::vector<TemplateId>> by_prev_;
  std::vector<PairRejection> rejections_;
  CategoricalPolicy policy_;
  std::size_t total_pairs_ = 0;
};

}  // namespace dialaug
