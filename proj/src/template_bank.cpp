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

#include "dialaug/template_bank.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace dialaug {

DialogueTemplates MakeTemplates(const Dialogue& dialogue,
                                const CategoricalPolicy& policy) {
  DialogueTemplates out;
  const auto& pairs = dialogue.pairs;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    TemplateSource source{dialogue.id, i};
    DelexResult result = DelexicalizePair(pairs[i], policy);
    if (auto* rejection = std::get_if<Rejection>(&result)) {
      out.rejections.push_back({std::move(source), std::move(*rejection)});
      continue;
    }
    auto& delex = std::get<DelexicalizedPair>(result);
    TurnPairTemplate t;
    t.source = std::move(source);
    t.delex_system = std::move(delex.system);
    t.delex_user = std::move(delex.user);
    t.subs = std::move(delex.subs);
    t.cur_belief = pairs[i].belief;
    t.function.cur = t.cur_belief.Labels();
    if (i > 0) {
      t.prev_belief = pairs[i - 1].belief;
      t.function.prev = t.prev_belief->Labels();
    }
    if (i + 1 < pairs.size()) {
      t.next_belief = pairs[i + 1].belief;
      t.function.next = t.next_belief->Labels();
    }
    out.templates.push_back(std::move(t));
  }
  return out;
}

LinkSemantics ParseLinkSemantics(std::string_view name) {
  if (name == "equality") return LinkSemantics::kEquality;
  if (name == "superset") return LinkSemantics::kSuperset;
  throw std::invalid_argument("unknown link semantics '" + std::string(name) +
                              "'");
}

std::string_view LinkSemanticsName(LinkSemantics semantics) {
  return semantics == LinkSemantics::kEquality ? "equality" : "superset";
}

namespace {

bool Relates(const LabelSet& candidate, const LabelSet& required,
             LinkSemantics semantics) {
  if (semantics == LinkSemantics::kEquality) return candidate == required;
  return std::includes(candidate.begin(), candidate.end(), required.begin(),
                       required.end());
}

}  // namespace

bool CheckLink(const TurnPairTemplate& prev, const TurnPairTemplate& next,
               LinkSemantics semantics) {
  if (!prev.function.next) {
    throw std::logic_error("CheckLink: predecessor is a terminal template");
  }
  if (!next.function.prev) return false;
  return Relates(next.function.cur, *prev.function.next, semantics) &&
         Relates(*next.function.prev, prev.function.cur, semantics);
}

TemplateBank TemplateBank::Build(const Corpus& corpus,
                                 const CategoricalPolicy& policy) {
  std::vector<const Dialogue*> ordered;
  for (const auto& d : corpus.dialogues) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(),
            [](const Dialogue* a, const Dialogue* b) { return a->id < b->id; });

  TemplateBank bank;
  bank.policy_ = policy;
  for (const Dialogue* d : ordered) {
    bank.total_pairs_ += d->pairs.size();
    DialogueTemplates made = MakeTemplates(*d, policy);
    for (auto& t : made.templates) {
      t.id = static_cast<TemplateId>(bank.templates_.size());
      bank.templates_.push_back(std::move(t));
    }
    for (auto& r : made.rejections) bank.rejections_.push_back(std::move(r));
  }
  if (bank.templates_.empty()) {
    throw Error(ErrorKind::kEmptyBank,
                "no turn-pair template survived delexicalization (" +
                    std::to_string(bank.rejections_.size()) + " rejected)");
  }
  for (const auto& t : bank.templates_) {
    if (t.IsRoot()) bank.roots_.push_back(t.id);
    if (t.IsTerminal()) bank.terminals_.push_back(t.id);
    bank.by_prev_[t.function.prev].push_back(t.id);
  }
  return bank;
}

const std::vector<TemplateId>& TemplateBank::ByPrev(
    const std::optional<LabelSet>& key) const {
  static const std::vector<TemplateId> kEmpty;
  auto it = by_prev_.find(key);
  return it == by_prev_.end() ? kEmpty : it->second;
}

std::vector<TemplateId> TemplateBank::Successors(
    const TurnPairTemplate& t, LinkSemantics semantics) const {
  std::vector<TemplateId> out;
  if (t.IsTerminal()) return out;
  if (semantics == LinkSemantics::kEquality) {
    for (TemplateId id : ByPrev(t.function.cur)) {
      if (templates_[id].function.cur == *t.function.next) out.push_back(id);
    }
    return out;
  }
  for (const auto& candidate : templates_) {
    if (CheckLink(t, candidate, semantics)) out.push_back(candidate.id);
  }
  return out;
}

namespace {

nlohmann::ordered_json LabelsJson(const std::optional<LabelSet>& labels) {
  if (!labels) return std::string(kNullMarker);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& l : *labels) arr.push_back(l.str());
  return arr;
}

}  // namespace

std::string TemplateBank::DumpJson() const {
  nlohmann::ordered_json root = nlohmann::ordered_json::array();
  for (const auto& t : templates_) {
    nlohmann::ordered_json obj;
    obj["id"] = t.id;
    obj["source"] = {{"dialogue", t.source.dialogue_id},
                     {"pair", t.source.pair_index}};
    obj["delex_system"] = t.delex_system;
    obj["delex_user"] = t.delex_user;
    obj["function"] = {{"prev", LabelsJson(t.function.prev)},
                       {"cur", LabelsJson(t.function.cur)},
                       {"next", LabelsJson(t.function.next)}};
    root.push_back(std::move(obj));
  }
  return root.dump(2, ' ', false,
                   nlohmann::ordered_json::error_handler_t::replace) +
         "\n";
}

}  // namespace dialaug
