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
// Delexicalization of turn pairs: slot values in the text become
// "[domain-name]" placeholders. Also decides which slots are categorical
// (left lexicalized) and harvests the slot-value dictionary used later for
// surface realization.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dialaug/corpus.hpp"

namespace dialaug {

struct Substitution {
  SlotLabel label;
  std::string value;
  std::size_t occurrences = 0;

  bool operator==(const Substitution&) const = default;
};

struct CategoricalPolicy {
  std::set<SlotLabel> labels;
  std::set<std::string> reserved_values{kReservedValues.begin(),
                                        kReservedValues.end()};

  bool IsCategorical(const SlotLabel& label) const {
    return labels.count(label) != 0;
  }
  bool IsReserved(std::string_view value) const {
    return reserved_values.count(std::string(value)) != 0;
  }
  // Value would be searched for and replaced in text.
  bool IsDelexicalizable(const SlotLabel& label, std::string_view value) const {
    return !IsCategorical(label) && !IsReserved(value);
  }
};

enum class RejectionReason { kValueCollision, kOverlapAmbiguity };

std::string_view RejectionReasonName(RejectionReason reason);

struct Rejection {
  RejectionReason reason;
  std::string detail;
};

struct DelexicalizedPair {
  std::string system;
  std::string user;
  std::vector<Substitution> subs;  // one per belief entry, label order
};

using DelexResult = std::variant<DelexicalizedPair, Rejection>;

DelexResult DelexicalizePair(const TurnPair& pair,
                             const CategoricalPolicy& policy);

struct CollisionReport {
  // Each group shares one value text; groups are ordered by first label.
  std::vector<LabelSet> groups;
};

std::optional<CollisionReport> DetectCollision(const BeliefState& belief,
                                               const CategoricalPolicy& policy);

// Replaces "[label]" tokens with the recorded values, left to right.
std::string Relexicalize(std::string_view delexicalized,
                         const std::vector<Substitution>& subs);

struct ClassifyConfig {
  std::set<SlotLabel> overrides;
  double tau = 0.5;
};

// A label is categorical if overridden, or if the fraction of its entry
// events (pair where a non-reserved value enters the state or changes)
// whose value is findable in that pair's text is below tau. Labels with no
// such event are categorical too.
CategoricalPolicy ClassifySlots(const Corpus& corpus,
                                const ClassifyConfig& config);

class SlotValueDict {
 public:
  using Map = std::map<SlotLabel, std::vector<std::string>>;

  // Keeps first-observation order; returns false for a repeat.
  bool Add(const SlotLabel& label, const std::string& value);
  const std::vector<std::string>& Values(const SlotLabel& label) const;
  bool Contains(const SlotLabel& label, std::string_view value) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

 private:
  Map entries_;
};

SlotValueDict HarvestValues(const Corpus& corpus,
                            const CategoricalPolicy& policy);

}  // namespace dialaug
