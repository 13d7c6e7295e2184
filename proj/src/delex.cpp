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

#include "dialaug/delex.hpp"

#include <algorithm>

namespace dialaug {

std::string_view RejectionReasonName(RejectionReason reason) {
  switch (reason) {
    case RejectionReason::kValueCollision: return "ValueCollision";
    case RejectionReason::kOverlapAmbiguity: return "OverlapAmbiguity";
  }
  return "Rejection";
}

std::optional<CollisionReport> DetectCollision(
    const BeliefState& belief, const CategoricalPolicy& policy) {
  std::map<std::string, LabelSet> by_value;
  for (const auto& [label, value] : belief) {
    if (policy.IsDelexicalizable(label, value)) {
      by_value[value].push_back(label);
    }
  }
  CollisionReport report;
  for (auto& [value, labels] : by_value) {
    if (labels.size() > 1) report.groups.push_back(std::move(labels));
  }
  if (report.groups.empty()) return std::nullopt;
  std::sort(report.groups.begin(), report.groups.end(),
            [](const LabelSet& a, const LabelSet& b) { return a[0] < b[0]; });
  return report;
}

namespace {

struct Candidate {
  const SlotLabel* label;
  const std::string* value;
};

struct Occurrence {
  Span span;
  std::size_t candidate;
  bool claimed = false;
};

// Claims value occurrences longest-first; the returned occurrences are all
// boundary-valid hits, flagged when they received a placeholder.
std::vector<Occurrence> ClaimOccurrences(std::string_view text,
                                         const std::vector<Candidate>& order) {
  std::vector<Occurrence> all;
  std::vector<Span> claimed;
  for (std::size_t c = 0; c < order.size(); ++c) {
    for (const Span& span : FindTokenOccurrences(text, *order[c].value)) {
      bool free = std::none_of(claimed.begin(), claimed.end(),
                               [&](const Span& s) { return s.Overlaps(span); });
      if (free) claimed.push_back(span);
      all.push_back({span, c, free});
    }
  }
  return all;
}

std::optional<std::string> FindPartialOverlap(
    const std::vector<Occurrence>& occ, const std::vector<Candidate>& order) {
  for (std::size_t i = 0; i < occ.size(); ++i) {
    for (std::size_t j = i + 1; j < occ.size(); ++j) {
      const Occurrence& x = occ[i];
      const Occurrence& y = occ[j];
      if (x.candidate == y.candidate) continue;
      if (!(x.claimed || y.claimed)) continue;
      if (!x.span.Overlaps(y.span)) continue;
      if (x.span.Contains(y.span) || y.span.Contains(x.span)) continue;
      return "'" + *order[x.candidate].value + "' (" +
             order[x.candidate].label->str() + ") overlaps '" +
             *order[y.candidate].value + "' (" +
             order[y.candidate].label->str() + ")";
    }
  }
  return std::nullopt;
}

std::string Render(std::string_view text, const std::vector<Occurrence>& occ,
                   const std::vector<Candidate>& order,
                   std::vector<std::size_t>& counts) {
  std::vector<const Occurrence*> claimed;
  for (const auto& o : occ) {
    if (o.claimed) claimed.push_back(&o);
  }
  std::sort(claimed.begin(), claimed.end(),
            [](const Occurrence* a, const Occurrence* b) {
              return a->span.begin < b->span.begin;
            });
  std::string out;
  std::size_t pos = 0;
  for (const Occurrence* o : claimed) {
    out.append(text.substr(pos, o->span.begin - pos));
    out += order[o->candidate].label->Placeholder();
    ++counts[o->candidate];
    pos = o->span.end;
  }
  out.append(text.substr(pos));
  return out;
}

}  // namespace

DelexResult DelexicalizePair(const TurnPair& pair,
                             const CategoricalPolicy& policy) {
  if (auto collision = DetectCollision(pair.belief, policy)) {
    const LabelSet& group = collision->groups.front();
    return Rejection{RejectionReason::kValueCollision,
                     LabelSetString(group) + " share value '" +
                         *pair.belief.Find(group.front()) + "'"};
  }

  std::vector<Candidate> order;
  for (const auto& [label, value] : pair.belief) {
    if (policy.IsDelexicalizable(label, value)) {
      order.push_back({&label, &value});
    }
  }
  // Longest value first; ties by label (belief iteration is label-ordered
  // and the sort is stable).
  std::stable_sort(order.begin(), order.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.value->size() > b.value->size();
                   });

  auto system_occ = ClaimOccurrences(pair.system_utterance, order);
  auto user_occ = ClaimOccurrences(pair.user_utterance, order);
  for (const auto* occ : {&system_occ, &user_occ}) {
    if (auto overlap = FindPartialOverlap(*occ, order)) {
      return Rejection{RejectionReason::kOverlapAmbiguity, *overlap};
    }
  }

  std::vector<std::size_t> counts(order.size(), 0);
  DelexicalizedPair out;
  out.system = Render(pair.system_utterance, system_occ, order, counts);
  out.user = Render(pair.user_utterance, user_occ, order, counts);
  for (const auto& [label, value] : pair.belief) {
    std::size_t n = 0;
    for (std::size_t c = 0; c < order.size(); ++c) {
      if (*order[c].label == label) n = counts[c];
    }
    out.subs.push_back({label, value, n});
  }
  return out;
}

std::string Relexicalize(std::string_view delexicalized,
                         const std::vector<Substitution>& subs) {
  std::string out;
  std::size_t pos = 0;
  while (pos < delexicalized.size()) {
    bool replaced = false;
    if (delexicalized[pos] == '[') {
      for (const auto& sub : subs) {
        if (sub.occurrences == 0) continue;
        std::string token = sub.label.Placeholder();
        if (delexicalized.compare(pos, token.size(), token) == 0) {
          out += sub.value;
          pos += token.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(delexicalized[pos++]);
  }
  return out;
}

namespace {

std::vector<const Dialogue*> ById(const Corpus& corpus) {
  std::vector<const Dialogue*> out;
  out.reserve(corpus.dialogues.size());
  for (const auto& d : corpus.dialogues) out.push_back(&d);
  std::sort(out.begin(), out.end(),
            [](const Dialogue* a, const Dialogue* b) { return a->id < b->id; });
  return out;
}

}  // namespace

CategoricalPolicy ClassifySlots(const Corpus& corpus,
                                const ClassifyConfig& config) {
  CategoricalPolicy policy;
  struct Tally {
    std::size_t events = 0;
    std::size_t findable = 0;
  };
  std::map<SlotLabel, Tally> tallies;
  for (const Dialogue* d : ById(corpus)) {
    const BeliefState* prev = nullptr;
    for (const auto& pair : d->pairs) {
      for (const auto& [label, value] : pair.belief) {
        Tally& tally = tallies[label];
        if (policy.IsReserved(value)) continue;
        const std::string* before = prev ? prev->Find(label) : nullptr;
        if (before && *before == value) continue;
        ++tally.events;
        if (ContainsToken(pair.user_utterance, value) ||
            ContainsToken(pair.system_utterance, value)) {
          ++tally.findable;
        }
      }
      prev = &pair.belief;
    }
  }
  policy.labels = config.overrides;
  for (const auto& [label, tally] : tallies) {
    if (tally.events == 0 ||
        static_cast<double>(tally.findable) <
            config.tau * static_cast<double>(tally.events)) {
      policy.labels.insert(label);
    }
  }
  return policy;
}

bool SlotValueDict::Add(const SlotLabel& label, const std::string& value) {
  auto& values = entries_[label];
  if (std::find(values.begin(), values.end(), value) != values.end()) {
    return false;
  }
  values.push_back(value);
  return true;
}

const std::vector<std::string>& SlotValueDict::Values(
    const SlotLabel& label) const {
  static const std::vector<std::string> kEmpty;
  auto it = entries_.find(label);
  return it == entries_.end() ? kEmpty : it->second;
}

bool SlotValueDict::Contains(const SlotLabel& label,
                             std::string_view value) const {
  const auto& values = Values(label);
  return std::find(values.begin(), values.end(), value) != values.end();
}

SlotValueDict HarvestValues(const Corpus& corpus,
                            const CategoricalPolicy& policy) {
  SlotValueDict dict;
  for (const Dialogue* d : ById(corpus)) {
    for (const auto& pair : d->pairs) {
      for (const auto& [label, value] : pair.belief) {
        if (policy.IsDelexicalizable(label, value)) dict.Add(label, value);
      }
    }
  }
  return dict;
}

}  // namespace dialaug
